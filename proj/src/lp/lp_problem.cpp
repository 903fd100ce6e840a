#include "fpg/lp/lp_problem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fpg::lp {

std::size_t LpProblem::add_variable(std::string name, double lo, double hi, double c) {
  cost.push_back(c);
  lb.push_back(lo);
  ub.push_back(hi);
  names.push_back(std::move(name));
  return cost.size() - 1;
}

std::size_t LpProblem::add_row(LpRow row) {
  rows.push_back(std::move(row));
  return rows.size() - 1;
}

std::size_t LpProblem::add_eq(std::vector<std::pair<std::size_t, double>> coef, double rhs,
                              std::string name) {
  return add_row({std::move(coef), rhs, rhs, false, std::move(name)});
}

std::size_t LpProblem::add_le(std::vector<std::pair<std::size_t, double>> coef, double rhs,
                              std::string name) {
  return add_row({std::move(coef), -kInf, rhs, false, std::move(name)});
}

std::size_t LpProblem::add_ge(std::vector<std::pair<std::size_t, double>> coef, double rhs,
                              std::string name) {
  return add_row({std::move(coef), rhs, kInf, false, std::move(name)});
}

void LpProblem::validate() const {
  const std::size_t n = cost.size();
  if (lb.size() != n || ub.size() != n || names.size() != n) {
    throw std::invalid_argument("LpProblem: cost/bound/name sizes differ");
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (std::isnan(cost[j]) || !std::isfinite(cost[j])) {
      throw std::invalid_argument("LpProblem: non-finite cost on " + names[j]);
    }
    if (std::isnan(lb[j]) || std::isnan(ub[j]) || lb[j] > ub[j] || lb[j] == kInf ||
        ub[j] == -kInf) {
      throw std::invalid_argument("LpProblem: bad bounds on " + names[j]);
    }
  }
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const LpRow& row = rows[r];
    if (std::isnan(row.lo) || std::isnan(row.hi) || row.lo > row.hi) {
      throw std::invalid_argument("LpProblem: bad range on row " + std::to_string(r));
    }
    for (const auto& [j, a] : row.coef) {
      if (j >= n || !std::isfinite(a)) {
        throw std::invalid_argument("LpProblem: bad coefficient on row " + std::to_string(r));
      }
    }
  }
}

double LpProblem::evaluate(const std::vector<double>& x) const {
  double z = objective_offset;
  for (std::size_t j = 0; j < cost.size(); ++j) z += cost[j] * x[j];
  return z;
}

double LpProblem::row_activity(std::size_t r, const std::vector<double>& x) const {
  double s = 0.0;
  for (const auto& [j, a] : rows[r].coef) s += a * x[j];
  return s;
}

double LpProblem::max_violation(const std::vector<double>& x) const {
  double worst = 0.0;
  for (std::size_t j = 0; j < cost.size(); ++j) {
    worst = std::max({worst, lb[j] - x[j], x[j] - ub[j]});
  }
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const double s = row_activity(r, x);
    worst = std::max({worst, rows[r].lo - s, s - rows[r].hi});
  }
  return worst;
}

const char* status_name(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::NumericalFailure: return "numerical_failure";
    case LpStatus::IterationLimit: return "iteration_limit";
  }
  return "unknown";
}

}  // namespace fpg::lp
