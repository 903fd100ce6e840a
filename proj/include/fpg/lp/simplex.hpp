#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fpg/lp/lp_problem.hpp"

namespace fpg::lp {

struct SimplexOptions {
  double primal_tol = 1e-9;
  double dual_tol = 1e-9;
  double pivot_tol = 1e-9;
  std::size_t max_iterations = 500000;
  /// Consecutive degenerate pivots before switching to Bland's rule.
  int bland_after = 30;
  /// Iterations between drift checks of the basic values.
  int check_every = 200;
  /// Try the dual simplex first when the basis is dual feasible.
  bool use_dual = true;
};

/// Bounded-variable primal simplex on a condensed tableau (basic variables
/// expressed in the nonbasic ones). Every row carries an activity variable
/// bounded by the row range; structural and activity variables are treated
/// alike. The engine keeps its basis between solve() calls, so bound changes
/// followed by solve() warm start from the previous optimum.
class SimplexEngine {
 public:
  explicit SimplexEngine(LpProblem problem, SimplexOptions options = {});

  void set_bounds(std::size_t var, double lo, double hi);
  double lower(std::size_t var) const { return lo_[var]; }
  double upper(std::size_t var) const { return hi_[var]; }

  LpSolution solve();

  const LpProblem& problem() const noexcept { return lp_; }
  std::size_t active_row_count() const noexcept { return active_.size(); }
  std::size_t refactor_count() const noexcept { return refactors_; }

 private:
  using Tableau = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  enum class Phase { One, Two };
  enum class Outcome { Done, Infeasible, Unbounded, IterationLimit };

  void add_tableau_row(std::size_t problem_row);
  Outcome run(Phase phase);
  /// Dual simplex from a dual feasible basis; returns Done when primal
  /// feasibility is reached. Falls back (returns IterationLimit) when the
  /// basis is not dual feasible or the pass stalls.
  Outcome run_dual();
  /// Moves boxed nonbasic variables to the bound their reduced cost favours;
  /// true when every nonbasic variable is then dual feasible.
  bool make_dual_feasible();
  void pivot(std::size_t r, std::size_t j, double step, double dir, double leave_value);
  void recompute_reduced_costs();
  bool refactor();
  bool drift_ok();
  std::vector<double> structural_values() const;
  double value_of(std::size_t var) const;
  double tol(double bound) const;
  bool is_basic(std::size_t var) const { return where_[var] >= 0; }

  LpProblem lp_;
  SimplexOptions opt_;
  std::size_t n_ = 0;
  std::vector<std::size_t> active_;   // problem rows in tableau order
  std::vector<bool> in_tableau_;      // per problem row
  std::vector<double> lo_, hi_, cost_;  // per variable (structural then activity)
  std::vector<std::size_t> basic_;    // tableau row -> variable
  std::vector<std::size_t> nonbasic_; // tableau column -> variable
  std::vector<long> where_;           // >= 0 basic row, < 0 -(column + 1)
  Tableau t_;
  Eigen::VectorXd xb_, xn_, d_;
  std::size_t iterations_ = 0;
  std::size_t refactors_ = 0;
  bool singular_ = false;
};

LpSolution solve_lp(const LpProblem& problem, SimplexOptions options = {});

}  // namespace fpg::lp
