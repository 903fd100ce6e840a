#include <doctest.h>
#include <cmath>
#include <functional>
#include <random>

#include "fpg/lp/simplex.hpp"

using namespace fpg::lp;

namespace {

// Vertex enumeration oracle for min c.x s.t. A x <= b, x >= 0 (2-3 vars).
double brute_vertices(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                      bool& feasible) {
  const auto n = a.cols();
  Eigen::MatrixXd all(a.rows() + n, n);
  Eigen::VectorXd rhs(a.rows() + n);
  all << a, -Eigen::MatrixXd::Identity(n, n);
  rhs << b, Eigen::VectorXd::Zero(n);
  const auto rows = all.rows();
  double best = kInf;
  feasible = false;
  std::vector<int> pick(static_cast<std::size_t>(n));
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == n) {
      Eigen::MatrixXd m(n, n);
      Eigen::VectorXd r(n);
      for (int k = 0; k < n; ++k) {
        m.row(k) = all.row(pick[k]);
        r(k) = rhs(pick[k]);
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
      if (!lu.isInvertible()) return;
      const Eigen::VectorXd x = lu.solve(r);
      if (((all * x - rhs).array() > 1e-9).any()) return;
      feasible = true;
      best = std::min(best, c.dot(x));
      return;
    }
    for (int i = start; i < rows; ++i) {
      pick[depth] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
  return best;
}

}  // namespace

TEST_CASE("tiny LPs") {
  LpProblem a;
  const auto x = a.add_variable("x", 0.0, kInf, -1.0);
  a.add_le({{x, 1.0}}, 3.0);
  auto s = solve_lp(a);
  REQUIRE(s.status == LpStatus::Optimal);
  CHECK(s.x[0] == doctest::Approx(3.0));
  CHECK(s.objective == doctest::Approx(-3.0));

  LpProblem b;
  const auto u = b.add_variable("x", 0.0, kInf, 1.0);
  const auto v = b.add_variable("y", 0.0, kInf, 1.0);
  b.add_ge({{u, 1.0}, {v, 1.0}}, 2.0);
  s = solve_lp(b);
  REQUIRE(s.status == LpStatus::Optimal);
  CHECK(s.objective == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("infeasible and unbounded are distinguished") {
  LpProblem a;
  const auto x = a.add_variable("x", 0.0, 1.0, 1.0);
  a.add_ge({{x, 1.0}}, 2.0);
  CHECK(solve_lp(a).status == LpStatus::Infeasible);

  LpProblem b;
  const auto y = b.add_variable("y", 0.0, kInf, -1.0);
  b.add_ge({{y, 1.0}}, 1.0);
  CHECK(solve_lp(b).status == LpStatus::Unbounded);

  LpProblem c;
  c.add_variable("z", -kInf, kInf, 0.0);
  c.add_variable("w", 2.0, 1.0, 0.0);
  CHECK_THROWS_AS(solve_lp(c), std::invalid_argument);
}

TEST_CASE("Klee-Minty cube") {
  // max sum 2^(n-j) x_j  s.t. 2 sum_{j<i} 2^(i-j) x_j + x_i <= 5^i
  for (int n = 3; n <= 8; ++n) {
    LpProblem lp;
    for (int j = 1; j <= n; ++j) lp.add_variable("x" + std::to_string(j), 0.0, kInf, -std::pow(2.0, n - j));
    for (int i = 1; i <= n; ++i) {
      std::vector<std::pair<std::size_t, double>> row;
      for (int j = 1; j < i; ++j) row.push_back({static_cast<std::size_t>(j - 1), std::pow(2.0, i - j + 1)});
      row.push_back({static_cast<std::size_t>(i - 1), 1.0});
      lp.add_le(row, std::pow(5.0, i));
    }
    const auto s = solve_lp(lp);
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.objective == doctest::Approx(-std::pow(5.0, n)).epsilon(1e-12));
    CHECK(s.x.back() == doctest::Approx(std::pow(5.0, n)));
  }
}

TEST_CASE("random LPs agree with vertex enumeration") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int feasible_count = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 2, m = 3 + trial % 4;
    Eigen::MatrixXd a(m, n);
    Eigen::VectorXd b(m), c(n);
    for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = std::round(4.0 * u(rng));
    for (Eigen::Index i = 0; i < m; ++i) b(i) = std::round(5.0 * u(rng)) + 1.0;
    for (Eigen::Index i = 0; i < n; ++i) c(i) = std::round(3.0 * u(rng));
    // a box row keeps every instance bounded
    LpProblem lp;
    for (int j = 0; j < n; ++j) lp.add_variable("x" + std::to_string(j), 0.0, kInf, c(j));
    Eigen::MatrixXd full(m + 1, n);
    Eigen::VectorXd rhs(m + 1);
    full << a, Eigen::RowVectorXd::Ones(n);
    rhs << b, 10.0;
    for (int i = 0; i <= m; ++i) {
      std::vector<std::pair<std::size_t, double>> row;
      for (int j = 0; j < n; ++j) row.push_back({static_cast<std::size_t>(j), full(i, j)});
      lp.add_le(row, rhs(i));
    }
    bool feasible = false;
    const double oracle = brute_vertices(full, rhs, c, feasible);
    const auto s = solve_lp(lp);
    if (!feasible) {
      CHECK(s.status == LpStatus::Infeasible);
      continue;
    }
    ++feasible_count;
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(std::abs(s.objective - oracle) <= 1e-9 * (1.0 + std::abs(oracle)));
    CHECK(lp.max_violation(s.x) <= 1e-9);
  }
  CHECK(feasible_count > 50);
}

TEST_CASE("free variables, equalities and ranged rows") {
  LpProblem lp;
  const auto x = lp.add_variable("x", -kInf, kInf, 1.0);
  const auto y = lp.add_variable("y", -kInf, kInf, 2.0);
  lp.add_eq({{x, 1.0}, {y, -1.0}}, 1.0);
  lp.add_row({{{x, 1.0}, {y, 1.0}}, -3.0, 5.0, false, "range"});
  const auto s = solve_lp(lp);
  REQUIRE(s.status == LpStatus::Optimal);
  CHECK(s.x[0] == doctest::Approx(-1.0));
  CHECK(s.x[1] == doctest::Approx(-2.0));
}

TEST_CASE("lazy rows are enforced and warm starts match cold solves") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    LpProblem lp;
    const int n = 6;
    for (int j = 0; j < n; ++j) lp.add_variable("x" + std::to_string(j), 0.0, 10.0, -u(rng) - 0.1);
    for (int i = 0; i < 8; ++i) {
      std::vector<std::pair<std::size_t, double>> row;
      for (int j = 0; j < n; ++j) row.push_back({static_cast<std::size_t>(j), u(rng)});
      LpRow r{row, -kInf, 5.0 + 5.0 * u(rng), i % 2 == 0, ""};
      lp.add_row(r);
    }
    SimplexEngine engine(lp);
    auto warm = engine.solve();
    REQUIRE(warm.status == LpStatus::Optimal);
    CHECK(lp.max_violation(warm.x) <= 1e-9);
    LpProblem eager = lp;
    for (auto& r : eager.rows) r.lazy = false;
    auto cold = solve_lp(eager);
    CHECK(warm.objective == doctest::Approx(cold.objective).epsilon(1e-10));

    const std::size_t var = static_cast<std::size_t>(trial % n);
    engine.set_bounds(var, 1.0, 1.0);
    warm = engine.solve();
    eager.lb[var] = eager.ub[var] = 1.0;
    cold = solve_lp(eager);
    REQUIRE(warm.status == cold.status);
    if (cold.status == LpStatus::Optimal) {
      CHECK(warm.objective == doctest::Approx(cold.objective).epsilon(1e-10));
    }
  }
}

TEST_CASE("Beale cycling example terminates") {
  LpProblem lp;
  const auto x4 = lp.add_variable("x4", 0.0, kInf, -0.75);
  const auto x5 = lp.add_variable("x5", 0.0, kInf, 150.0);
  const auto x6 = lp.add_variable("x6", 0.0, kInf, -0.02);
  const auto x7 = lp.add_variable("x7", 0.0, kInf, 6.0);
  lp.add_le({{x4, 0.25}, {x5, -60.0}, {x6, -0.04}, {x7, 9.0}}, 0.0);
  lp.add_le({{x4, 0.5}, {x5, -90.0}, {x6, -0.02}, {x7, 3.0}}, 0.0);
  lp.add_le({{x6, 1.0}}, 1.0);
  SimplexOptions opt;
  opt.bland_after = 0;
  for (const auto& o : {SimplexOptions{}, opt}) {
    const auto s = solve_lp(lp, o);
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.objective == doctest::Approx(-0.05).epsilon(1e-12));
  }
}
