#include <doctest.h>
#include <cmath>
#include <random>
#include <sstream>

#include "fpg/lp/uc_milp.hpp"
#include "fpg/uc/report.hpp"
#include "support/random_uc.hpp"

using namespace fpg;
using namespace fpg::lp;

namespace {

grid::GridCase single_bus(double pmin, double pmax, double a) {
  grid::GridCase g;
  g.buses = {1};
  g.slack_bus = 1;
  g.generators.push_back({1, pmin, pmax, pmax, pmax, 1, 1, a, 0.0, 0.0});
  return g;
}

grid::Scenario fixed_load(const grid::GridCase& g, double load, int periods, double reserve = 0.0) {
  Eigen::MatrixXd l = Eigen::MatrixXd::Constant(1, periods, load);
  auto s = grid::make_scenario(g, l, Eigen::MatrixXd::Zero(1, periods), 0.0);
  s.reserve_up.setConstant(reserve);
  return s;
}

}  // namespace

TEST_CASE("single unit examples") {
  auto g = single_bus(10, 50, 2);
  auto s = fixed_load(g, 0.0, 1);
  auto r = solve_uc(g, s, uc::UcParams::defaults(g));
  REQUIRE(r.solution.status == MilpStatus::Optimal);
  CHECK(r.solution.objective == doctest::Approx(0.0));
  CHECK(r.decision.commitment(0, 0) == 0.0);

  s = fixed_load(g, 20.0, 1);
  r = solve_uc(g, s, uc::UcParams::defaults(g));
  REQUIRE(r.solution.status == MilpStatus::Optimal);
  CHECK(r.solution.objective == doctest::Approx(40.0));
  CHECK(r.decision.commitment(0, 0) == 1.0);
  CHECK(r.decision.dispatch(0, 0) == doctest::Approx(20.0));

  // Pmin = Pmax = load pins S = 1 in the relaxation as well
  g = single_bus(20, 20, 2);
  r = solve_uc(g, s, uc::UcParams::defaults(g));
  REQUIRE(r.solution.status == MilpStatus::Optimal);
  CHECK(r.solution.nodes == 1);
  CHECK(r.solution.gap == 0.0);
}

TEST_CASE("binary count and over-constrained reserve") {
  std::mt19937_64 rng(1);
  auto inst = testing::random_small_instance(rng, 5);
  const auto model = build_milp(inst.grid, inst.scenario, inst.params);
  CHECK(model.milp.binaries.size() == 2 * 2 * 5);

  auto g = single_bus(10, 50, 2);
  auto s = fixed_load(g, 20.0, 2, 100.0);
  CHECK(solve_uc(g, s, uc::UcParams::defaults(g)).solution.status == MilpStatus::Infeasible);
  CHECK(brute_force_uc(g, s, uc::UcParams::defaults(g)).solution.status == MilpStatus::Infeasible);
}

TEST_CASE("brute force pattern count and size guard") {
  grid::GridCase g = single_bus(0, 50, 1);
  g.generators.push_back(g.generators[0]);
  auto s = fixed_load(g, 10.0, 2);
  const auto r = brute_force_uc(g, s, uc::UcParams::defaults(g));
  CHECK(r.solution.nodes == 16);
  CHECK(r.solution.objective == doctest::Approx(20.0));
  auto big = fixed_load(g, 10.0, 11);
  CHECK_THROWS_AS(brute_force_uc(g, big, uc::UcParams::defaults(g)), std::length_error);
}

TEST_CASE("small binary programs match enumeration") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    // knapsack-like: max value s.t. two weight rows, plus a continuous slack
    const int n = 6;
    MilpProblem p;
    std::vector<double> value(n), w1(n), w2(n);
    for (int j = 0; j < n; ++j) {
      value[j] = std::round(10 * u(rng)) + 1;
      w1[j] = std::round(10 * u(rng)) + 1;
      w2[j] = std::round(10 * u(rng)) + 1;
      p.binaries.push_back(p.lp.add_variable("b" + std::to_string(j), 0, 1, -value[j]));
    }
    const auto y = p.lp.add_variable("y", 0, 3, -0.5);
    std::vector<std::pair<std::size_t, double>> r1, r2;
    for (int j = 0; j < n; ++j) {
      r1.push_back({static_cast<std::size_t>(j), w1[j]});
      r2.push_back({static_cast<std::size_t>(j), w2[j]});
    }
    r1.push_back({y, 1.0});
    p.lp.add_le(r1, 20);
    p.lp.add_le(r2, 18);
    double best = kInf;
    for (int mask = 0; mask < (1 << n); ++mask) {
      double a = 0, b = 0, z = 0;
      for (int j = 0; j < n; ++j)
        if (mask >> j & 1) {
          a += w1[j];
          b += w2[j];
          z -= value[j];
        }
      if (a > 20 || b > 18) continue;
      z -= 0.5 * std::min(3.0, 20 - a);
      best = std::min(best, z);
    }
    const auto sol = solve_milp(p);
    REQUIRE(sol.status == MilpStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(best).epsilon(1e-12));
    double last = -kInf;
    for (const auto& t : sol.trace) {
      CHECK(t.global_bound >= last);
      last = t.global_bound;
    }
  }
}

TEST_CASE("branch and bound equals brute force on random UC instances") {
  std::mt19937_64 rng(2024);
  int solved = 0;
  for (int trial = 0; trial < 40; ++trial) {
    auto inst = testing::random_small_instance(rng);
    const auto bb = solve_uc(inst.grid, inst.scenario, inst.params);
    const auto bf = brute_force_uc(inst.grid, inst.scenario, inst.params);
    REQUIRE(bb.solution.status == bf.solution.status);
    if (bf.solution.status != MilpStatus::Optimal) continue;
    ++solved;
    CHECK(std::abs(bb.solution.objective - bf.solution.objective) <= 1e-6);
    for (const auto* r : {&bb, &bf}) {
      const auto rep = uc::feasibility_report(r->decision, inst.grid, inst.scenario, inst.params, 1e-6);
      CHECK(rep.feasible);
      CHECK(uc::objective(r->decision, inst.grid, inst.scenario, inst.params) ==
            doctest::Approx(r->solution.objective).epsilon(1e-9));
    }
    double last = -kInf;
    for (const auto& t : bb.solution.trace) {
      CHECK(t.global_bound >= last - 1e-12);
      last = t.global_bound;
    }
  }
  CHECK(solved >= 25);
}

TEST_CASE("solve is deterministic") {
  std::mt19937_64 rng(5);
  auto inst = testing::random_small_instance(rng, 6);
  const auto a = solve_uc(inst.grid, inst.scenario, inst.params);
  const auto b = solve_uc(inst.grid, inst.scenario, inst.params);
  CHECK(a.solution.nodes == b.solution.nodes);
  CHECK(a.solution.x == b.solution.x);
  std::ostringstream la, lb;
  write_solver_log(a.solution, la);
  write_solver_log(b.solution, lb);
  CHECK(la.str() == lb.str());
}

TEST_CASE("node cap returns a flagged incumbent") {
  std::mt19937_64 rng(8);
  auto inst = testing::random_small_instance(rng, 6);
  MilpOptions opt;
  opt.node_cap = 1;
  const auto r = solve_uc(inst.grid, inst.scenario, inst.params, opt);
  if (r.solution.nodes < 1) FAIL("no node explored");
  if (r.solution.node_cap_hit) {
    CHECK(r.solution.status == MilpStatus::NodeCapReached);
    CHECK_FALSE(r.solution.x.empty());
  } else {
    CHECK(r.solution.status != MilpStatus::NodeCapReached);
  }
}

TEST_CASE("start point seeds the incumbent only when feasible") {
  MilpProblem p;
  const auto a = p.lp.add_variable("a", 0, 1, -3.0);
  const auto b = p.lp.add_variable("b", 0, 1, -2.0);
  p.binaries = {a, b};
  p.lp.add_le({{a, 1.0}, {b, 1.0}}, 1.0);
  MilpOptions opt;
  opt.node_cap = 0;
  opt.start = {0.0, 1.0};
  auto r = solve_milp(p, opt);
  CHECK(r.status == MilpStatus::NodeCapReached);
  CHECK(r.objective == doctest::Approx(-2.0));
  opt.start = {1.0, 1.0};
  r = solve_milp(p, opt);
  CHECK(r.x.empty());
  opt.start = {0.5, 0.5};
  CHECK(solve_milp(p, opt).x.empty());
  opt.node_cap = 200000;
  opt.start = {0.0, 1.0};
  CHECK(solve_milp(p, opt).objective == doctest::Approx(-3.0));
}

TEST_CASE("initial on state forces commitment") {
  grid::GridCase g = single_bus(10, 50, 2);
  g.generators[0].min_up = 3;
  auto s = fixed_load(g, 0.0, 4);
  auto p = uc::UcParams::defaults(g);
  p.initial[0] = {1.0, 10.0, 1, 0};
  const auto r = solve_uc(g, s, p);
  // load is zero, so staying on is infeasible for balance
  CHECK(r.solution.status == MilpStatus::Infeasible);
  s = fixed_load(g, 15.0, 4);
  const auto q = solve_uc(g, s, p);
  REQUIRE(q.solution.status == MilpStatus::Optimal);
  CHECK(q.decision.commitment(0, 0) == 1.0);
  CHECK(q.decision.commitment(0, 1) == 1.0);
}

TEST_CASE("solution csv lists every variable") {
  grid::GridCase g = single_bus(10, 50, 2);
  auto s = fixed_load(g, 20.0, 2);
  const auto r = solve_uc(g, s, uc::UcParams::defaults(g));
  std::ostringstream out;
  write_solution_csv(r.decision, g, out);
  const std::string text = out.str();
  CHECK(text.rfind("var,generator_or_bus,period,value\n", 0) == 0);
  CHECK(text.find("P_G,0,1,20\n") != std::string::npos);
  CHECK(text.find("delta,1,0,0\n") != std::string::npos);
}
