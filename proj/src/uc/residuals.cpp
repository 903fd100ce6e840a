#include "fpg/uc/residuals.hpp"

#include <stdexcept>
#include <string>

namespace fpg::uc {

namespace {

constexpr std::array<std::string_view, 13> kGroupNames = {
    "balance",   "reserve_up", "reserve_down", "line_upper", "line_lower",
    "gen_upper", "gen_lower",  "ren_upper",    "ren_lower",  "ramp_up",
    "ramp_down", "min_up",     "min_down"};

Eigen::MatrixXd hinge(const Eigen::MatrixXd& m) { return m.cwiseMax(0.0); }

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

}  // namespace

std::string_view group_name(Group g) { return kGroupNames[static_cast<std::size_t>(g)]; }

Group group_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kGroupNames.size(); ++i)
    if (kGroupNames[i] == name) return static_cast<Group>(i);
  throw std::invalid_argument("unknown residual group '" + std::string(name) + "'");
}

bool binary_included(Group g) {
  switch (g) {
    case Group::LineUpper:
    case Group::LineLower:
    case Group::RenUpper:
    case Group::RenLower:
    case Group::RampUp:
    case Group::RampDown:
      return false;
    default:
      return true;
  }
}

Family family_of(Group g) {
  switch (g) {
    case Group::Balance: return Family::Balance;
    case Group::ReserveUp:
    case Group::ReserveDown: return Family::Reserve;
    case Group::LineUpper:
    case Group::LineLower: return Family::Line;
    case Group::GenUpper:
    case Group::GenLower:
    case Group::RenUpper:
    case Group::RenLower: return Family::Bounds;
    case Group::RampUp:
    case Group::RampDown: return Family::Ramp;
    case Group::MinUp:
    case Group::MinDown: return Family::UpDown;
  }
  return Family::Balance;
}

std::string_view family_name(Family f) {
  static constexpr std::array<std::string_view, 6> names = {"balance", "reserve", "line",
                                                           "bounds",  "ramp",    "updown"};
  return names[static_cast<std::size_t>(f)];
}

const Eigen::MatrixXd& ConstraintResiduals::operator[](Group g) const {
  return const_cast<ConstraintResiduals&>(*this)[g];
}

Eigen::MatrixXd& ConstraintResiduals::operator[](Group g) {
  switch (g) {
    case Group::Balance: return balance;
    case Group::ReserveUp: return reserve_up;
    case Group::ReserveDown: return reserve_down;
    case Group::LineUpper: return line_upper;
    case Group::LineLower: return line_lower;
    case Group::GenUpper: return gen_upper;
    case Group::GenLower: return gen_lower;
    case Group::RenUpper: return ren_upper;
    case Group::RenLower: return ren_lower;
    case Group::RampUp: return ramp_up;
    case Group::RampDown: return ramp_down;
    case Group::MinUp: return min_up;
    case Group::MinDown: return min_down;
  }
  throw std::invalid_argument("bad group");
}

double objective(const UcDecision& dec, const grid::GridCase& grid,
                 const grid::Scenario& scenario, const UcParams& params) {
  const auto periods = dec.commitment.cols();
  double cost = 0.0;
  for (std::size_t g = 0; g < grid.generators.size(); ++g) {
    const auto& gen = grid.generators[g];
    double prev = params.initial.empty() ? 0.0 : params.initial[g].commitment;
    for (Eigen::Index t = 0; t < periods; ++t) {
      const double s = dec.commitment(idx(g), t);
      cost += gen.cost_slope * dec.dispatch(idx(g), t) + gen.no_load_cost * s +
              gen.startup_cost * std::max(0.0, s - prev);
      prev = s;
    }
  }
  const Eigen::MatrixXd farm = scenario.farm_forecast(grid);
  cost += params.curtailment_price * (farm - dec.renewable).sum();
  return cost;
}

Eigen::MatrixXd line_flows(const UcDecision& dec, const grid::GridCase& grid) {
  Eigen::MatrixXd flows(idx(grid.lines.size()), dec.angle.cols());
  for (std::size_t l = 0; l < grid.lines.size(); ++l) {
    const auto& line = grid.lines[l];
    flows.row(idx(l)) = line.susceptance * (dec.angle.row(idx(grid.bus_index(line.from))) -
                                            dec.angle.row(idx(grid.bus_index(line.to))));
  }
  return flows;
}

Eigen::MatrixXd balance_residuals(const UcDecision& dec, const grid::GridCase& grid,
                                  const grid::Scenario& scenario) {
  Eigen::MatrixXd r = -scenario.load;
  for (std::size_t g = 0; g < grid.generators.size(); ++g) {
    r.row(idx(grid.bus_index(grid.generators[g].bus))) +=
        dec.commitment.row(idx(g)).cwiseProduct(dec.dispatch.row(idx(g)));
  }
  for (std::size_t k = 0; k < grid.renewables.size(); ++k) {
    r.row(idx(grid.bus_index(grid.renewables[k].bus))) += dec.renewable.row(idx(k));
  }
  const Eigen::MatrixXd flows = line_flows(dec, grid);
  for (std::size_t l = 0; l < grid.lines.size(); ++l) {
    r.row(idx(grid.bus_index(grid.lines[l].from))) -= flows.row(idx(l));
    r.row(idx(grid.bus_index(grid.lines[l].to))) += flows.row(idx(l));
  }
  return r;
}

SidedViolation reserve_residuals(const UcDecision& dec, const grid::GridCase& grid,
                                 const grid::Scenario& scenario) {
  const auto periods = dec.commitment.cols();
  Eigen::RowVectorXd up = scenario.reserve_up.transpose();
  Eigen::RowVectorXd dn = scenario.reserve_down.transpose();
  for (std::size_t g = 0; g < grid.generators.size(); ++g) {
    const auto& gen = grid.generators[g];
    for (Eigen::Index t = 0; t < periods; ++t) {
      const double s = dec.commitment(idx(g), t), p = dec.dispatch(idx(g), t);
      up(t) -= std::min(s * gen.p_max - p, s * gen.ramp_up);
      dn(t) -= std::min(p - s * gen.p_min, s * gen.ramp_down);
    }
  }
  return {hinge(up), hinge(dn)};
}

SidedViolation line_flow_residuals(const UcDecision& dec, const grid::GridCase& grid) {
  const Eigen::MatrixXd flows = line_flows(dec, grid);
  Eigen::VectorXd limit(idx(grid.lines.size()));
  for (std::size_t l = 0; l < grid.lines.size(); ++l) limit(idx(l)) = grid.lines[l].limit_mw;
  return {hinge(flows.colwise() - limit), hinge((-flows).colwise() - limit)};
}

SidedViolation generator_bound_residuals(const UcDecision& dec, const grid::GridCase& grid) {
  Eigen::VectorXd pmin(idx(grid.generators.size())), pmax(idx(grid.generators.size()));
  for (std::size_t g = 0; g < grid.generators.size(); ++g) {
    pmin(idx(g)) = grid.generators[g].p_min;
    pmax(idx(g)) = grid.generators[g].p_max;
  }
  return {hinge(dec.dispatch - pmax.asDiagonal() * dec.commitment),
          hinge(pmin.asDiagonal() * dec.commitment - dec.dispatch)};
}

SidedViolation renewable_bound_residuals(const UcDecision& dec, const grid::GridCase& grid,
                                         const grid::Scenario& scenario) {
  return {hinge(dec.renewable - scenario.farm_forecast(grid)), hinge(-dec.renewable)};
}

SidedViolation ramp_residuals(const UcDecision& dec, const grid::GridCase& grid,
                              const UcParams& params) {
  const auto gens = idx(grid.generators.size());
  const auto periods = dec.dispatch.cols();
  Eigen::MatrixXd up(gens, periods), dn(gens, periods);
  for (Eigen::Index g = 0; g < gens; ++g) {
    const auto& gen = grid.generators[static_cast<std::size_t>(g)];
    double prev = params.initial.empty() ? 0.0 : params.initial[static_cast<std::size_t>(g)].dispatch;
    for (Eigen::Index t = 0; t < periods; ++t) {
      const double delta = dec.dispatch(g, t) - prev;
      up(g, t) = std::max(0.0, delta - gen.ramp_up);
      dn(g, t) = std::max(0.0, -delta - gen.ramp_down);
      prev = dec.dispatch(g, t);
    }
  }
  return {up, dn};
}

Counters commitment_counters(const Eigen::MatrixXd& commitment, const UcParams& params) {
  Counters c{Eigen::MatrixXd::Zero(commitment.rows(), commitment.cols()),
             Eigen::MatrixXd::Zero(commitment.rows(), commitment.cols())};
  for (Eigen::Index g = 0; g < commitment.rows(); ++g) {
    const auto& init = params.initial[static_cast<std::size_t>(g)];
    double on = init.on_periods, off = init.off_periods;
    for (Eigen::Index t = 0; t < commitment.cols(); ++t) {
      const double s = commitment(g, t);
      on = (on + 1.0) * s;
      off = (off + 1.0) * (1.0 - s);
      c.on(g, t) = on;
      c.off(g, t) = off;
    }
  }
  return c;
}

SidedViolation min_up_down_residuals(const Eigen::MatrixXd& commitment,
                                     const grid::GridCase& grid, const UcParams& params) {
  const Counters c = commitment_counters(commitment, params);
  SidedViolation v{Eigen::MatrixXd::Zero(commitment.rows(), commitment.cols()),
                   Eigen::MatrixXd::Zero(commitment.rows(), commitment.cols())};
  for (Eigen::Index g = 0; g < commitment.rows(); ++g) {
    const auto& gen = grid.generators[static_cast<std::size_t>(g)];
    const auto& init = params.initial[static_cast<std::size_t>(g)];
    double s_prev = init.commitment, on_prev = init.on_periods, off_prev = init.off_periods;
    for (Eigen::Index t = 0; t < commitment.cols(); ++t) {
      const double s = commitment(g, t);
      v.upper(g, t) = std::max(0.0, -(on_prev - gen.min_up) * (s_prev - s));
      v.lower(g, t) = std::max(0.0, -(off_prev - gen.min_down) * (s - s_prev));
      s_prev = s;
      on_prev = c.on(g, t);
      off_prev = c.off(g, t);
    }
  }
  return v;
}

ConstraintResiduals all_residuals(const UcDecision& dec, const grid::GridCase& grid,
                                  const grid::Scenario& scenario, const UcParams& params) {
  ConstraintResiduals r;
  r.balance = balance_residuals(dec, grid, scenario);
  auto reserve = reserve_residuals(dec, grid, scenario);
  r.reserve_up = std::move(reserve.upper);
  r.reserve_down = std::move(reserve.lower);
  auto line = line_flow_residuals(dec, grid);
  r.line_upper = std::move(line.upper);
  r.line_lower = std::move(line.lower);
  auto gen = generator_bound_residuals(dec, grid);
  r.gen_upper = std::move(gen.upper);
  r.gen_lower = std::move(gen.lower);
  auto ren = renewable_bound_residuals(dec, grid, scenario);
  r.ren_upper = std::move(ren.upper);
  r.ren_lower = std::move(ren.lower);
  auto ramp = ramp_residuals(dec, grid, params);
  r.ramp_up = std::move(ramp.upper);
  r.ramp_down = std::move(ramp.lower);
  auto ud = min_up_down_residuals(dec.commitment, grid, params);
  r.min_up = std::move(ud.upper);
  r.min_down = std::move(ud.lower);
  return r;
}

}  // namespace fpg::uc
