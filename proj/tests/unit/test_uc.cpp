#include <doctest.h>
#include <random>
#include <sstream>

#include "fpg/uc/report.hpp"

using namespace fpg;
using namespace fpg::uc;
using grid::GridCase;
using grid::Scenario;

namespace {

GridCase one_unit(double a, double b, double csu) {
  GridCase g;
  g.buses = {1};
  g.slack_bus = 1;
  g.generators.push_back({1, 0.0, 100.0, 30.0, 30.0, 3, 2, a, b, csu});
  return g;
}

Scenario blank(const GridCase& g, int periods) {
  const auto n = static_cast<Eigen::Index>(g.bus_count());
  return grid::make_scenario(g, Eigen::MatrixXd::Zero(n, periods), Eigen::MatrixXd::Zero(n, periods),
                             0.0);
}

GridCase two_bus() {
  GridCase g;
  g.buses = {1, 2};
  g.slack_bus = 2;
  g.lines = {{1, 2, 10.0, 2.0}};
  g.generators.push_back({1, 0.0, 100.0, 20.0, 20.0, 1, 1, 1.0, 0.0, 0.0});
  g.renewables.push_back({2, 30.0});
  return g;
}

}  // namespace

TEST_CASE("objective examples") {
  GridCase g = one_unit(2.0, 5.0, 7.0);
  g.renewables.push_back({1, 10.0});
  Scenario s = blank(g, 1);
  UcParams p = UcParams::defaults(g);
  UcDecision d = UcDecision::zeros(g, 1);
  CHECK(objective(d, g, s, p) == 0.0);

  d.commitment(0, 0) = 1.0;
  d.dispatch(0, 0) = 10.0;
  CHECK(objective(d, g, s, p) == doctest::Approx(32.0));

  s.forecast(0, 0) = 3.0;
  CHECK(objective(d, g, s, p) == doctest::Approx(32.0 + 120.0));
  d.renewable(0, 0) = 3.0;
  CHECK(objective(d, g, s, p) == doctest::Approx(32.0));
}

TEST_CASE("balance examples") {
  GridCase g = two_bus();
  g.slack_bus = 2;
  Scenario s = blank(g, 1);
  UcDecision d = UcDecision::zeros(g, 1);
  CHECK(balance_residuals(d, g, s).cwiseAbs().maxCoeff() == 0.0);
  d.angle(0, 0) = 0.1;
  d.commitment(0, 0) = 1.0;
  d.dispatch(0, 0) = 1.0;
  CHECK(balance_residuals(d, g, s)(0, 0) == doctest::Approx(0.0));
  d.commitment(0, 0) = 0.0;
  CHECK(balance_residuals(d, g, s)(0, 0) == doctest::Approx(-1.0));
}

TEST_CASE("reserve examples") {
  GridCase g = one_unit(1.0, 0.0, 0.0);
  g.generators[0].ramp_up = 20.0;
  Scenario s = blank(g, 1);
  UcDecision d = UcDecision::zeros(g, 1);
  CHECK(reserve_residuals(d, g, s).upper(0, 0) == 0.0);
  s.reserve_up(0) = 15.0;
  CHECK(reserve_residuals(d, g, s).upper(0, 0) == doctest::Approx(15.0));
  d.commitment(0, 0) = 1.0;
  d.dispatch(0, 0) = 90.0;
  CHECK(reserve_residuals(d, g, s).upper(0, 0) == doctest::Approx(5.0));
}

TEST_CASE("line examples") {
  GridCase g = two_bus();
  UcDecision d = UcDecision::zeros(g, 1);
  auto v = line_flow_residuals(d, g);
  CHECK(v.upper(0, 0) == 0.0);
  d.angle(0, 0) = 0.3;
  v = line_flow_residuals(d, g);
  CHECK(v.upper(0, 0) == doctest::Approx(1.0));
  CHECK(v.lower(0, 0) == 0.0);
  d.angle(0, 0) = -0.3;
  v = line_flow_residuals(d, g);
  CHECK(v.lower(0, 0) == doctest::Approx(1.0));
  CHECK(v.upper(0, 0) == 0.0);
}

TEST_CASE("min-up, min-down and ramp examples") {
  GridCase g = one_unit(1.0, 0.0, 0.0);
  UcParams p = UcParams::defaults(g);
  p.initial[0] = {1.0, 0.0, 10, 0};
  Eigen::MatrixXd on = Eigen::MatrixXd::Ones(1, 6);
  CHECK(min_up_down_residuals(on, g, p).upper.maxCoeff() == 0.0);

  p = UcParams::defaults(g);
  Eigen::MatrixXd blip(1, 3);
  blip << 1, 0, 0;
  auto v = min_up_down_residuals(blip, g, p);
  CHECK(v.upper(0, 1) == doctest::Approx(2.0));
  CHECK(v.upper.sum() == doctest::Approx(2.0));

  UcDecision d = UcDecision::zeros(g, 2);
  d.commitment.setOnes();
  d.dispatch << 0.0, 50.0;
  p.initial[0] = {1.0, 0.0, 5, 0};
  const auto r = ramp_residuals(d, g, p);
  CHECK(r.upper(0, 1) == doctest::Approx(20.0));
  CHECK(r.lower.maxCoeff() == 0.0);
}

TEST_CASE("counters follow the recursion") {
  GridCase g = one_unit(1.0, 0.0, 0.0);
  UcParams p = UcParams::defaults(g);
  Eigen::MatrixXd s(1, 5);
  s << 1, 1, 0, 0, 1;
  const Counters c = commitment_counters(s, p);
  Eigen::MatrixXd on(1, 5), off(1, 5);
  on << 1, 2, 0, 0, 1;
  off << 0, 0, 1, 2, 0;
  CHECK(c.on == on);
  CHECK(c.off == off);
  // shutting down after 2 < 3 periods and restarting after 2 >= 2 periods
  const auto v = min_up_down_residuals(s, g, p);
  CHECK(v.upper(0, 2) == doctest::Approx(1.0));
  CHECK(v.lower.maxCoeff() == 0.0);
}

TEST_CASE("partition tags") {
  CHECK(binary_included(Group::Balance));
  CHECK(binary_included(Group::ReserveUp));
  CHECK(binary_included(Group::GenLower));
  CHECK(binary_included(Group::MinDown));
  CHECK_FALSE(binary_included(Group::RampUp));
  CHECK_FALSE(binary_included(Group::LineLower));
  CHECK_FALSE(binary_included(Group::RenUpper));
}

TEST_CASE("feasibility report aggregates") {
  GridCase g = one_unit(1.0, 0.0, 0.0);
  Scenario s = blank(g, 2);
  UcParams p = UcParams::defaults(g);
  UcDecision d = UcDecision::zeros(g, 2);
  CHECK(feasibility_report(d, g, s, p, 0.0).feasible);
  s.reserve_up(1) = 1.0;
  const auto rep = feasibility_report(d, g, s, p, 1e-6);
  CHECK_FALSE(rep.feasible);
  CHECK(rep.groups.at(Group::ReserveUp).l1_violation == doctest::Approx(1.0));
  CHECK(rep.family_l1(Family::Reserve) == doctest::Approx(1.0));

  ConstraintResiduals r = all_residuals(d, g, s, p);
  r.line_upper = Eigen::MatrixXd::Zero(41, 3);
  r.line_lower = Eigen::MatrixXd::Zero(41, 3);
  r.line_upper(7, 0) = 0.5;
  r.line_lower(7, 2) = 0.5;
  const auto sum = summarize(r, 1e-6);
  CHECK(sum.overloaded_lines == 1);
  CHECK(sum.overload_frequency == doctest::Approx(1.0 / 41.0));
}

TEST_CASE("residual invariants on random decisions") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  GridCase g;
  g.buses = {1, 2, 3, 4};
  g.slack_bus = 1;
  g.lines = {{1, 2, 8, 30}, {2, 3, 12, 30}, {3, 4, 5, 30}, {4, 1, 9, 30}, {1, 3, 6, 30}};
  g.generators.push_back({1, 10, 80, 40, 40, 2, 2, 2, 3, 10});
  g.generators.push_back({3, 5, 60, 30, 30, 3, 1, 3, 1, 5});
  g.renewables.push_back({4, 40});
  for (int trial = 0; trial < 50; ++trial) {
    const int periods = 6;
    Eigen::MatrixXd load(4, periods), f = Eigen::MatrixXd::Zero(4, periods);
    for (Eigen::Index i = 0; i < load.size(); ++i) load(i) = 30.0 * u(rng);
    for (int t = 0; t < periods; ++t) f(3, t) = 40.0 * u(rng);
    const Scenario s = grid::make_scenario(g, load, f, 0.1);
    UcDecision d = UcDecision::zeros(g, periods);
    for (Eigen::Index i = 0; i < d.commitment.size(); ++i) d.commitment(i) = u(rng) < 0.5 ? 0.0 : 1.0;
    for (Eigen::Index i = 0; i < d.dispatch.size(); ++i) d.dispatch(i) = 100.0 * u(rng) - 10.0;
    for (Eigen::Index i = 0; i < d.renewable.size(); ++i) d.renewable(i) = 50.0 * u(rng) - 5.0;
    for (Eigen::Index i = 1; i < 4; ++i)
      for (int t = 0; t < periods; ++t) d.angle(i, t) = u(rng) - 0.5;
    const UcParams p = UcParams::defaults(g);
    const ConstraintResiduals r = all_residuals(d, g, s, p);
    for (Group grp : kAllGroups) {
      if (grp != Group::Balance) CHECK(r[grp].minCoeff() >= 0.0);
    }
    // network flows cancel in the system balance
    const Eigen::RowVectorXd system =
        d.commitment.cwiseProduct(d.dispatch).colwise().sum() + d.renewable.colwise().sum() -
        load.colwise().sum();
    CHECK((r.balance.colwise().sum() - system).cwiseAbs().maxCoeff() <= 1e-9);
    // linear in loads and dispatch at fixed S
    UcDecision d2 = d;
    d2.dispatch *= 2.0;
    d2.renewable *= 2.0;
    d2.angle *= 2.0;
    const Scenario s2 = grid::make_scenario(g, 2.0 * load, 2.0 * f, 0.1);
    CHECK((balance_residuals(d2, g, s2) - 2.0 * r.balance).cwiseAbs().maxCoeff() <= 1e-9);
    const auto again = all_residuals(d, g, s, p);
    for (Group grp : kAllGroups) CHECK(again[grp] == r[grp]);
  }
}

TEST_CASE("residual csv round trip") {
  GridCase g = two_bus();
  Scenario s = blank(g, 3);
  s.reserve_up << 1.0 / 3.0, 2.0, 0.1;
  UcDecision d = UcDecision::zeros(g, 3);
  d.angle(0, 1) = 0.7;
  const auto rows = residual_rows(all_residuals(d, g, s, UcParams::defaults(g)));
  CHECK(rows.size() == 13 * 3);
  std::stringstream ss;
  write_residual_csv(rows, ss);
  CHECK(read_residual_csv(ss) == rows);
}

TEST_CASE("decision and params validation") {
  GridCase g = two_bus();
  UcDecision d = UcDecision::zeros(g, 2);
  CHECK_NOTHROW(d.validate(g, 2));
  d.commitment(0, 0) = 0.5;
  CHECK_THROWS_AS(d.validate(g, 2), grid::CaseError);
  d = UcDecision::zeros(g, 2);
  d.angle(1, 0) = 0.1;
  CHECK_THROWS_AS(d.validate(g, 2), grid::CaseError);
  UcParams p = UcParams::defaults(g);
  CHECK_NOTHROW(p.validate(g));
  p.initial[0] = {1.0, 10.0, 0, 0};
  CHECK_THROWS_AS(p.validate(g), grid::CaseError);
}
