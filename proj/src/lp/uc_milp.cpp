#include "fpg/lp/uc_milp.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include "fpg/grid/graph.hpp"
#include "fpg/grid/io.hpp"
#include "fpg/uc/residuals.hpp"

namespace fpg::lp {

namespace {

std::string tag(const char* var, std::size_t i, std::size_t t) {
  return std::string(var) + "[" + std::to_string(i) + "][" + std::to_string(t) + "]";
}

using Terms = std::vector<std::pair<std::size_t, double>>;

}  // namespace

UcMilp build_milp(const grid::GridCase& grid, const grid::Scenario& scenario,
                  const uc::UcParams& params) {
  grid.validate();
  scenario.validate(grid);
  params.validate(grid);
  const std::size_t periods = scenario.horizon();
  const std::size_t gens = grid.generators.size();
  const std::size_t farms = grid.renewables.size();
  const Eigen::MatrixXd farm = scenario.farm_forecast(grid);

  UcMilp model;
  LpProblem& lp = model.milp.lp;
  UcLayout& lay = model.layout;
  lay.periods = periods;
  auto grid_of = [&](std::size_t rows) {
    return std::vector<std::vector<std::size_t>>(rows, std::vector<std::size_t>(periods));
  };
  lay.commitment = grid_of(gens);
  lay.startup = grid_of(gens);
  lay.dispatch = grid_of(gens);
  lay.reserve_up = grid_of(gens);
  lay.reserve_down = grid_of(gens);
  lay.renewable = grid_of(farms);

  for (std::size_t g = 0; g < gens; ++g) {
    const auto& gen = grid.generators[g];
    const auto& init = params.initial[g];
    // Periods at the start of the horizon pinned by the initial counters.
    const int forced_on = init.commitment == 1.0 ? std::max(0, gen.min_up - init.on_periods) : 0;
    const int forced_off = init.commitment == 0.0 ? std::max(0, gen.min_down - init.off_periods) : 0;
    for (std::size_t t = 0; t < periods; ++t) {
      const int ti = static_cast<int>(t);
      double s_lo = 0.0, s_hi = 1.0;
      if (ti < forced_on) s_lo = 1.0;
      if (ti < forced_off) s_hi = 0.0;
      lay.commitment[g][t] = lp.add_variable(tag("S", g, t), s_lo, s_hi, gen.no_load_cost);
      lay.startup[g][t] = lp.add_variable(tag("u", g, t), 0.0, 1.0, gen.startup_cost);
      double p_lo = 0.0, p_hi = gen.p_max;
      if (t == 0) {
        p_lo = std::max(p_lo, init.dispatch - gen.ramp_down);
        p_hi = std::min(p_hi, init.dispatch + gen.ramp_up);
      }
      lay.dispatch[g][t] = lp.add_variable(tag("P_G", g, t), p_lo, std::max(p_lo, p_hi), gen.cost_slope);
      lay.reserve_up[g][t] = lp.add_variable(tag("R_up", g, t), 0.0, kInf, 0.0);
      lay.reserve_down[g][t] = lp.add_variable(tag("R_dn", g, t), 0.0, kInf, 0.0);
      model.milp.binaries.push_back(lay.commitment[g][t]);
      model.milp.binaries.push_back(lay.startup[g][t]);
    }
  }
  for (std::size_t r = 0; r < farms; ++r) {
    for (std::size_t t = 0; t < periods; ++t) {
      const double f = farm(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(t));
      lay.renewable[r][t] = lp.add_variable(tag("P_R", r, t), 0.0, f, -params.curtailment_price);
      lp.objective_offset += params.curtailment_price * f;
    }
  }

  for (std::size_t g = 0; g < gens; ++g) {
    const auto& gen = grid.generators[g];
    const double s_init = params.initial[g].commitment;
    for (std::size_t t = 0; t < periods; ++t) {
      const auto s = lay.commitment[g][t], p = lay.dispatch[g][t];
      const auto ru = lay.reserve_up[g][t], rd = lay.reserve_down[g][t];
      lp.add_le({{p, 1.0}, {s, -gen.p_max}}, 0.0, tag("pmax", g, t));
      lp.add_ge({{p, 1.0}, {s, -gen.p_min}}, 0.0, tag("pmin", g, t));
      lp.add_le({{ru, 1.0}, {p, 1.0}, {s, -gen.p_max}}, 0.0, tag("rup_cap", g, t));
      lp.add_le({{ru, 1.0}, {s, -gen.ramp_up}}, 0.0, tag("rup_ramp", g, t));
      lp.add_le({{rd, 1.0}, {p, -1.0}, {s, gen.p_min}}, 0.0, tag("rdn_cap", g, t));
      lp.add_le({{rd, 1.0}, {s, -gen.ramp_down}}, 0.0, tag("rdn_ramp", g, t));
      if (t > 0) {
        lp.add_row({{{p, 1.0}, {lay.dispatch[g][t - 1], -1.0}}, -gen.ramp_down, gen.ramp_up, false,
                    tag("ramp", g, t)});
      }
      // u_t >= S_t - S_{t-1}
      if (t > 0) {
        lp.add_ge({{lay.startup[g][t], 1.0}, {s, -1.0}, {lay.commitment[g][t - 1], 1.0}}, 0.0,
                  tag("startup", g, t));
      } else {
        lp.add_ge({{lay.startup[g][t], 1.0}, {s, -1.0}}, -s_init, tag("startup", g, t));
      }
      // sum of startups over the last min_up periods <= S_t
      Terms up{{s, -1.0}};
      const std::size_t up_from = t + 1 >= static_cast<std::size_t>(gen.min_up) ? t + 1 - gen.min_up : 0;
      for (std::size_t tau = up_from; tau <= t; ++tau) up.push_back({lay.startup[g][tau], 1.0});
      lp.add_le(std::move(up), 0.0, tag("min_up", g, t));
      // sum of shutdowns (u - S_tau + S_{tau-1}) over the last min_down periods + S_t <= 1
      Terms dn{{s, 1.0}};
      double rhs = 1.0;
      const std::size_t dn_from =
          t + 1 >= static_cast<std::size_t>(gen.min_down) ? t + 1 - gen.min_down : 0;
      for (std::size_t tau = dn_from; tau <= t; ++tau) {
        dn.push_back({lay.startup[g][tau], 1.0});
        dn.push_back({lay.commitment[g][tau], -1.0});
        if (tau > 0) {
          dn.push_back({lay.commitment[g][tau - 1], 1.0});
        } else {
          rhs -= s_init;
        }
      }
      lp.add_le(std::move(dn), rhs, tag("min_down", g, t));
    }
  }

  const Eigen::MatrixXd shift = grid::ptdf(grid);
  for (std::size_t t = 0; t < periods; ++t) {
    const auto tt = static_cast<Eigen::Index>(t);
    Terms up, dn, bal;
    for (std::size_t g = 0; g < gens; ++g) {
      up.push_back({lay.reserve_up[g][t], 1.0});
      dn.push_back({lay.reserve_down[g][t], 1.0});
      bal.push_back({lay.dispatch[g][t], 1.0});
    }
    for (std::size_t r = 0; r < farms; ++r) bal.push_back({lay.renewable[r][t], 1.0});
    lp.add_ge(std::move(up), scenario.reserve_up(tt), "reserve_up[" + std::to_string(t) + "]");
    lp.add_ge(std::move(dn), scenario.reserve_down(tt), "reserve_dn[" + std::to_string(t) + "]");
    lp.add_eq(std::move(bal), scenario.load.col(tt).sum(), "balance[" + std::to_string(t) + "]");

    const Eigen::VectorXd load_shift = shift * scenario.load.col(tt);
    for (std::size_t l = 0; l < grid.lines.size(); ++l) {
      const auto li = static_cast<Eigen::Index>(l);
      Terms flow;
      for (std::size_t g = 0; g < gens; ++g) {
        const double f = shift(li, static_cast<Eigen::Index>(grid.bus_index(grid.generators[g].bus)));
        if (std::abs(f) > 1e-12) flow.push_back({lay.dispatch[g][t], f});
      }
      for (std::size_t r = 0; r < farms; ++r) {
        const double f = shift(li, static_cast<Eigen::Index>(grid.bus_index(grid.renewables[r].bus)));
        if (std::abs(f) > 1e-12) flow.push_back({lay.renewable[r][t], f});
      }
      const double lim = grid.lines[l].limit_mw;
      lp.add_row({std::move(flow), -lim + load_shift(li), lim + load_shift(li), true,
                  "line[" + std::to_string(l) + "][" + std::to_string(t) + "]"});
    }
  }
  return model;
}

uc::UcDecision decode(const UcMilp& model, const std::vector<double>& x,
                      const grid::GridCase& grid, const grid::Scenario& scenario) {
  const UcLayout& lay = model.layout;
  uc::UcDecision d = uc::UcDecision::zeros(grid, lay.periods);
  for (std::size_t g = 0; g < lay.commitment.size(); ++g) {
    for (std::size_t t = 0; t < lay.periods; ++t) {
      const auto gi = static_cast<Eigen::Index>(g), ti = static_cast<Eigen::Index>(t);
      d.commitment(gi, ti) = std::round(x[lay.commitment[g][t]]);
      d.dispatch(gi, ti) = d.commitment(gi, ti) == 0.0 ? 0.0 : x[lay.dispatch[g][t]];
    }
  }
  for (std::size_t r = 0; r < lay.renewable.size(); ++r)
    for (std::size_t t = 0; t < lay.periods; ++t)
      d.renewable(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(t)) = x[lay.renewable[r][t]];
  Eigen::MatrixXd injection = -scenario.load;
  for (std::size_t g = 0; g < grid.generators.size(); ++g)
    injection.row(static_cast<Eigen::Index>(grid.bus_index(grid.generators[g].bus))) +=
        d.dispatch.row(static_cast<Eigen::Index>(g));
  for (std::size_t r = 0; r < grid.renewables.size(); ++r)
    injection.row(static_cast<Eigen::Index>(grid.bus_index(grid.renewables[r].bus))) +=
        d.renewable.row(static_cast<Eigen::Index>(r));
  d.angle = grid::angles_from_injections(grid, injection);
  return d;
}

namespace {

LpSolution solve_all_on(const UcMilp& model, const grid::GridCase& grid,
                        const grid::Scenario& scenario, const uc::UcParams& params) {
  LpProblem lp = model.milp.lp;
  for (std::size_t g = 0; g < grid.generators.size(); ++g) {
    for (std::size_t t = 0; t < scenario.horizon(); ++t) {
      const auto sv = model.layout.commitment[g][t], uv = model.layout.startup[g][t];
      const double up = t == 0 ? 1.0 - params.initial[g].commitment : 0.0;
      if (lp.ub[sv] < 1.0 || up < lp.lb[uv] || up > lp.ub[uv]) {
        LpSolution none;
        none.status = LpStatus::Infeasible;
        return none;
      }
      lp.lb[sv] = lp.ub[sv] = 1.0;
      lp.lb[uv] = lp.ub[uv] = up;
    }
  }
  return solve_lp(lp);
}

}  // namespace

UcSolveResult solve_uc(const grid::GridCase& grid, const grid::Scenario& scenario,
                       const uc::UcParams& params, const MilpOptions& options) {
  const UcMilp model = build_milp(grid, scenario, params);
  UcSolveResult out;
  if (options.start.empty()) {
    MilpOptions seeded = options;
    const LpSolution on = solve_all_on(model, grid, scenario, params);
    if (on.status == LpStatus::Optimal) seeded.start = on.x;
    out.solution = solve_milp(model.milp, seeded);
  } else {
    out.solution = solve_milp(model.milp, options);
  }
  if (!out.solution.x.empty()) out.decision = decode(model, out.solution.x, grid, scenario);
  return out;
}

bool all_on_feasible(const grid::GridCase& grid, const grid::Scenario& scenario,
                     const uc::UcParams& params) {
  return solve_all_on(build_milp(grid, scenario, params), grid, scenario, params).status ==
         LpStatus::Optimal;
}

UcSolveResult brute_force_uc(const grid::GridCase& grid, const grid::Scenario& scenario,
                             const uc::UcParams& params) {
  const std::size_t gens = grid.generators.size();
  const std::size_t periods = scenario.horizon();
  const std::size_t bits = gens * periods;
  if (bits > kBruteForceLimit) {
    throw std::length_error("brute_force_uc: " + std::to_string(bits) +
                            " commitment bits exceed the limit of " +
                            std::to_string(kBruteForceLimit));
  }
  const UcMilp model = build_milp(grid, scenario, params);
  UcSolveResult out;
  out.solution.status = MilpStatus::Infeasible;
  const std::size_t patterns = std::size_t{1} << bits;
  Eigen::MatrixXd s(static_cast<Eigen::Index>(gens), static_cast<Eigen::Index>(periods));
  for (std::size_t mask = 0; mask < patterns; ++mask) {
    for (std::size_t b = 0; b < bits; ++b)
      s(static_cast<Eigen::Index>(b / periods), static_cast<Eigen::Index>(b % periods)) =
          static_cast<double>((mask >> b) & 1U);
    const auto ud = uc::min_up_down_residuals(s, grid, params);
    if (ud.upper.maxCoeff() > 0.0 || ud.lower.maxCoeff() > 0.0) continue;
    LpProblem lp = model.milp.lp;
    for (std::size_t g = 0; g < gens; ++g) {
      double prev = params.initial[g].commitment;
      for (std::size_t t = 0; t < periods; ++t) {
        const double st = s(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(t));
        const double ut = std::max(0.0, st - prev);
        const auto sv = model.layout.commitment[g][t], uv = model.layout.startup[g][t];
        if (st < lp.lb[sv] || st > lp.ub[sv]) goto next_pattern;
        lp.lb[sv] = lp.ub[sv] = st;
        lp.lb[uv] = lp.ub[uv] = ut;
        prev = st;
      }
    }
    {
      const LpSolution sol = solve_lp(lp);
      if (sol.status == LpStatus::Optimal && sol.objective < out.solution.objective) {
        out.solution.objective = sol.objective;
        out.solution.x = sol.x;
        out.solution.status = MilpStatus::Optimal;
      }
    }
  next_pattern:;
  }
  out.solution.nodes = patterns;
  if (out.solution.status == MilpStatus::Optimal) {
    out.solution.best_bound = out.solution.objective;
    out.solution.gap = 0.0;
    out.solution.relative_gap = 0.0;
    out.decision = decode(model, out.solution.x, grid, scenario);
  }
  return out;
}

void write_solution_csv(const uc::UcDecision& d, const grid::GridCase& grid, std::ostream& out) {
  out << "var,generator_or_bus,period,value\n";
  auto dump = [&](const char* name, const Eigen::MatrixXd& m, auto label) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index t = 0; t < m.cols(); ++t)
        out << name << ',' << label(i) << ',' << t << ',' << grid::format_double(m(i, t)) << '\n';
  };
  auto position = [](Eigen::Index i) { return static_cast<long>(i); };
  dump("S", d.commitment, position);
  dump("P_G", d.dispatch, position);
  dump("P_R", d.renewable, position);
  dump("delta", d.angle, [&](Eigen::Index i) { return static_cast<long>(grid.buses[static_cast<std::size_t>(i)]); });
}

}  // namespace fpg::lp
