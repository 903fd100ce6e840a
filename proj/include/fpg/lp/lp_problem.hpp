#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace fpg::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Ranged row lo <= sum coef * x <= hi. Equality rows use lo == hi.
struct LpRow {
  std::vector<std::pair<std::size_t, double>> coef;
  double lo = -kInf;
  double hi = kInf;
  /// Lazy rows enter the working tableau only once violated.
  bool lazy = false;
  std::string name;
};

/// minimize cost . x + objective_offset subject to rows and lb <= x <= ub.
struct LpProblem {
  std::vector<double> cost;
  std::vector<double> lb;
  std::vector<double> ub;
  std::vector<std::string> names;
  std::vector<LpRow> rows;
  double objective_offset = 0.0;

  std::size_t variable_count() const noexcept { return cost.size(); }
  std::size_t add_variable(std::string name, double lo, double hi, double c);
  std::size_t add_row(LpRow row);
  std::size_t add_eq(std::vector<std::pair<std::size_t, double>> coef, double rhs,
                     std::string name = {});
  std::size_t add_le(std::vector<std::pair<std::size_t, double>> coef, double rhs,
                     std::string name = {});
  std::size_t add_ge(std::vector<std::pair<std::size_t, double>> coef, double rhs,
                     std::string name = {});

  /// Throws std::invalid_argument on inconsistent sizes, NaNs, lb > ub or
  /// out-of-range column indices.
  void validate() const;

  double evaluate(const std::vector<double>& x) const;
  double row_activity(std::size_t r, const std::vector<double>& x) const;
  /// Largest bound or row violation of x.
  double max_violation(const std::vector<double>& x) const;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, NumericalFailure, IterationLimit };

const char* status_name(LpStatus s);

struct LpSolution {
  LpStatus status = LpStatus::NumericalFailure;
  std::vector<double> x;
  double objective = 0.0;
  std::size_t iterations = 0;
  std::string detail;  // diagnostics for non-optimal outcomes
};

}  // namespace fpg::lp
