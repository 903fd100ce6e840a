#include "fpg/train/losses.hpp"

#include <stdexcept>

namespace fpg::train {

using ad::Tensor;
using ad::Var;
using uc::Group;

namespace {

Tensor from_matrix(const Eigen::MatrixXd& m) {
  Tensor t({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      t.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = m(i, j);
  return t;
}

// rows x periods, each row filled with values[row].
Tensor per_row(const std::vector<double>& values, std::size_t periods) {
  Tensor t({values.size(), periods});
  for (std::size_t i = 0; i < values.size(); ++i)
    for (std::size_t j = 0; j < periods; ++j) t.at(i, j) = values[i];
  return t;
}

std::size_t idx(Group g) { return static_cast<std::size_t>(g); }

// a - max0(a - b)
Var minimum(Var a, Var b) { return ad::sub(a, ad::max0(ad::sub(a, b))); }

// Column -1 followed by columns 0..T-2 of x.
Var shifted(ad::Tape& tape, Var x, const Tensor& initial) {
  const std::size_t periods = x.shape()[1];
  Var first = tape.constant(initial);
  if (periods == 1) return first;
  return ad::concat({first, ad::slice(x, 1, 0, periods - 1)}, 1);
}

}  // namespace

DecisionVars decision_vars(const net::Decision& d) {
  return {d.commitment, d.raw.dispatch, d.raw.renewable, d.raw.angle};
}

DecisionVars constant_decision(ad::Tape& tape, const uc::UcDecision& d) {
  return {tape.constant(from_matrix(d.commitment)), tape.constant(from_matrix(d.dispatch)),
          tape.constant(from_matrix(d.renewable)), tape.constant(from_matrix(d.angle))};
}

ResidualGraph residual_graph(ad::Tape& tape, const DecisionVars& d, const grid::GridCase& grid,
                             const grid::Scenario& scenario, const uc::UcParams& params,
                             const LossScales& scales) {
  const std::size_t periods = scenario.horizon();
  const std::size_t buses = grid.bus_count(), gens = grid.generators.size();
  const std::size_t farms = grid.renewables.size(), lines = grid.lines.size();
  if (params.initial.size() != gens) throw std::invalid_argument("residual_graph: initial state size");
  const double inv_p = 1.0 / scales.power_base_mw;

  std::vector<double> pmin, pmax, ru, rd, ton, toff, a, b, csu, s0, p0, on0, off0;
  for (std::size_t g = 0; g < gens; ++g) {
    const auto& gen = grid.generators[g];
    const auto& init = params.initial[g];
    pmin.push_back(gen.p_min);
    pmax.push_back(gen.p_max);
    ru.push_back(gen.ramp_up);
    rd.push_back(gen.ramp_down);
    ton.push_back(gen.min_up);
    toff.push_back(gen.min_down);
    a.push_back(gen.cost_slope);
    b.push_back(gen.no_load_cost);
    csu.push_back(gen.startup_cost);
    s0.push_back(init.commitment);
    p0.push_back(init.dispatch);
    on0.push_back(init.on_periods);
    off0.push_back(init.off_periods);
  }
  auto col = [&](const std::vector<double>& v) { return per_row(v, 1); };
  auto full = [&](const std::vector<double>& v) { return tape.constant(per_row(v, periods)); };

  const Var S = d.commitment, P = d.dispatch, R = d.renewable, delta = d.angle;
  const Var SP = ad::mul(S, P);
  ResidualGraph out;
  auto& r = out.residuals;

  // Nodal balance.
  Tensor gen_inc({buses, gens}, 0.0), ren_inc({buses, std::max<std::size_t>(farms, 1)}, 0.0);
  for (std::size_t g = 0; g < gens; ++g) gen_inc.at(grid.bus_index(grid.generators[g].bus), g) = 1.0;
  for (std::size_t k = 0; k < farms; ++k) ren_inc.at(grid.bus_index(grid.renewables[k].bus), k) = 1.0;
  Tensor flow({std::max<std::size_t>(lines, 1), buses}, 0.0), bbus({buses, buses}, 0.0);
  for (std::size_t l = 0; l < lines; ++l) {
    const auto& line = grid.lines[l];
    const std::size_t f = grid.bus_index(line.from), t = grid.bus_index(line.to);
    flow.at(l, f) += line.susceptance;
    flow.at(l, t) -= line.susceptance;
    bbus.at(f, f) += line.susceptance;
    bbus.at(t, t) += line.susceptance;
    bbus.at(f, t) -= line.susceptance;
    bbus.at(t, f) -= line.susceptance;
  }
  Var balance = ad::matmul(tape.constant(gen_inc), SP);
  if (farms > 0) balance = ad::add(balance, ad::matmul(tape.constant(ren_inc), R));
  balance = ad::sub(balance, tape.constant(from_matrix(scenario.load)));
  balance = ad::sub(balance, ad::matmul(tape.constant(bbus), delta));
  r[idx(Group::Balance)] = ad::scale(balance, inv_p);

  // Reserve, min evaluated literally.
  const Var ones = tape.constant(Tensor({1, gens}, 1.0));
  const Var head_up = minimum(ad::sub(ad::mul(S, full(pmax)), P), ad::mul(S, full(ru)));
  const Var head_dn = minimum(ad::sub(P, ad::mul(S, full(pmin))), ad::mul(S, full(rd)));
  const Tensor req_up = from_matrix(scenario.reserve_up.transpose());
  const Tensor req_dn = from_matrix(scenario.reserve_down.transpose());
  r[idx(Group::ReserveUp)] =
      ad::scale(ad::max0(ad::sub(tape.constant(req_up), ad::matmul(ones, head_up))), inv_p);
  r[idx(Group::ReserveDown)] =
      ad::scale(ad::max0(ad::sub(tape.constant(req_dn), ad::matmul(ones, head_dn))), inv_p);

  // Lines.
  if (lines > 0) {
    std::vector<double> limit;
    for (const auto& line : grid.lines) limit.push_back(line.limit_mw);
    const Var flows = ad::matmul(tape.constant(flow), delta);
    const Var lim = full(limit);
    r[idx(Group::LineUpper)] = ad::scale(ad::max0(ad::sub(flows, lim)), inv_p);
    r[idx(Group::LineLower)] = ad::scale(ad::max0(ad::sub(ad::neg(flows), lim)), inv_p);
  } else {
    r[idx(Group::LineUpper)] = tape.constant(Tensor({0, periods}));
    r[idx(Group::LineLower)] = tape.constant(Tensor({0, periods}));
  }

  // Generator and renewable bounds.
  r[idx(Group::GenUpper)] = ad::scale(ad::max0(ad::sub(P, ad::mul(S, full(pmax)))), inv_p);
  r[idx(Group::GenLower)] = ad::scale(ad::max0(ad::sub(ad::mul(S, full(pmin)), P)), inv_p);
  const Tensor forecast = from_matrix(scenario.farm_forecast(grid));
  if (farms > 0) {
    r[idx(Group::RenUpper)] = ad::scale(ad::max0(ad::sub(R, tape.constant(forecast))), inv_p);
    r[idx(Group::RenLower)] = ad::scale(ad::max0(ad::neg(R)), inv_p);
  } else {
    r[idx(Group::RenUpper)] = tape.constant(Tensor({0, periods}));
    r[idx(Group::RenLower)] = tape.constant(Tensor({0, periods}));
  }

  // Ramps from the previous period (or the initial dispatch).
  const Var step = ad::sub(P, shifted(tape, P, col(p0)));
  r[idx(Group::RampUp)] = ad::scale(ad::max0(ad::sub(step, full(ru))), inv_p);
  r[idx(Group::RampDown)] = ad::scale(ad::max0(ad::sub(ad::neg(step), full(rd))), inv_p);

  // Minimum up/down through reconstructed counters.
  Var s_prev = tape.constant(col(s0)), on_prev = tape.constant(col(on0)),
      off_prev = tape.constant(col(off0));
  const Var ton_c = tape.constant(col(ton)), toff_c = tape.constant(col(toff));
  std::vector<Var> up_cols, dn_cols;
  for (std::size_t t = 0; t < periods; ++t) {
    const Var s = ad::slice(S, 1, t, t + 1);
    up_cols.push_back(ad::max0(ad::neg(ad::mul(ad::sub(on_prev, ton_c), ad::sub(s_prev, s)))));
    dn_cols.push_back(ad::max0(ad::neg(ad::mul(ad::sub(off_prev, toff_c), ad::sub(s, s_prev)))));
    on_prev = ad::mul(ad::add_scalar(on_prev, 1.0), s);
    off_prev = ad::mul(ad::add_scalar(off_prev, 1.0), ad::add_scalar(ad::neg(s), 1.0));
    s_prev = s;
  }
  r[idx(Group::MinUp)] = ad::concat(up_cols, 1);
  r[idx(Group::MinDown)] = ad::concat(dn_cols, 1);

  // Objective.
  Var cost = ad::add(ad::sum(ad::mul(full(a), P)), ad::sum(ad::mul(full(b), S)));
  const Var startups = ad::max0(ad::sub(S, shifted(tape, S, col(s0))));
  cost = ad::add(cost, ad::sum(ad::mul(full(csu), startups)));
  if (farms > 0) {
    cost = ad::add(cost, ad::scale(ad::sum(ad::sub(tape.constant(forecast), R)),
                                   params.curtailment_price));
  }
  out.objective = ad::scale(cost, 1.0 / scales.cost_base);
  return out;
}

DualState DualState::zeros(const grid::GridCase& grid, std::size_t periods, double rho) {
  if (!(rho >= 0.0)) throw std::invalid_argument("dual state: rho must be >= 0");
  DualState d;
  d.rho = rho;
  const std::size_t buses = grid.bus_count(), gens = grid.generators.size();
  const std::size_t farms = grid.renewables.size(), lines = grid.lines.size();
  for (Group g : uc::kAllGroups) {
    std::size_t rows = 0;
    switch (g) {
      case Group::Balance: rows = buses; break;
      case Group::ReserveUp:
      case Group::ReserveDown: rows = 1; break;
      case Group::LineUpper:
      case Group::LineLower: rows = lines; break;
      case Group::RenUpper:
      case Group::RenLower: rows = farms; break;
      default: rows = gens; break;
    }
    d[g] = Tensor({rows, periods}, 0.0);
  }
  return d;
}

Var supervised_loss(ad::Tape& tape, const net::Decision& d, const uc::UcDecision& label,
                    double eps, const LossScales& scales) {
  if (!(eps > 0.0 && eps < 0.5)) throw std::invalid_argument("supervised_loss: eps must be in (0, 0.5)");
  const Var p_err = ad::sub(d.raw.dispatch, tape.constant(from_matrix(label.dispatch)));
  const Var a_err = ad::sub(d.raw.angle, tape.constant(from_matrix(label.angle)));
  const Var squared = ad::add(ad::scale(ad::squared_norm(p_err),
                                        1.0 / (scales.power_base_mw * scales.power_base_mw)),
                              ad::squared_norm(a_err));
  const Var sc = ad::clamp(d.status_tanh, -0.5 + eps, 0.5 - eps);
  const Tensor on = from_matrix(label.commitment);
  Tensor off(on.shape());
  for (std::size_t i = 0; i < on.size(); ++i) off[i] = 1.0 - on[i];
  const Var cross = ad::add(ad::sum(ad::mul(tape.constant(on), ad::log(ad::add_scalar(sc, 0.5)))),
                            ad::sum(ad::mul(tape.constant(off), ad::log(ad::add_scalar(ad::neg(sc), 0.5)))));
  return ad::sub(squared, cross);
}

AlmTerms alm_loss(const ResidualVars& residuals, Var objective, const DualState& duals) {
  ad::Tape& tape = *objective.tape;
  AlmTerms t;
  std::vector<Var> lin, quad;
  for (Group g : uc::kAllGroups) {
    const Var f = residuals[idx(g)];
    if (f.value().size() == 0) continue;
    if (f.shape() != duals[g].shape()) {
      throw ad::ShapeError("alm_loss: group " + std::string(uc::group_name(g)) + " residual " +
                           ad::shape_string(f.shape()) + " vs multiplier " +
                           ad::shape_string(duals[g].shape()));
    }
    const Var mag = g == Group::Balance ? ad::abs(f) : f;
    lin.push_back(ad::sum(ad::mul(tape.constant(duals[g]), mag)));
    quad.push_back(ad::squared_norm(f));
  }
  auto total_of = [&](const std::vector<Var>& parts) {
    Var acc = tape.constant(Tensor::scalar(0.0));
    for (const Var& p : parts) acc = ad::add(acc, p);
    return acc;
  };
  t.linear = total_of(lin);
  t.quadratic = ad::scale(total_of(quad), duals.rho / 2.0);
  t.total = ad::add(ad::add(objective, t.linear), t.quadratic);
  return t;
}

void dual_update(DualState& duals, const std::array<Tensor, kGroupCount>& magnitude,
                 double growth) {
  for (std::size_t g = 0; g < kGroupCount; ++g) {
    Tensor& lam = duals.lambda[g];
    const Tensor& f = magnitude[g];
    if (f.shape() != lam.shape()) {
      throw ad::ShapeError("dual_update: group " + std::string(uc::group_name(uc::kAllGroups[g])) +
                           " " + ad::shape_string(f.shape()) + " vs " + ad::shape_string(lam.shape()));
    }
    for (std::size_t i = 0; i < lam.size(); ++i) lam[i] += duals.rho * std::abs(f[i]);
  }
  duals.rho *= growth;
}

std::array<double, uc::kAllFamilies.size()> family_l1(const uc::ConstraintResiduals& r) {
  std::array<double, uc::kAllFamilies.size()> out{};
  for (Group g : uc::kAllGroups) out[static_cast<std::size_t>(uc::family_of(g))] += r[g].cwiseAbs().sum();
  return out;
}

}  // namespace fpg::train
