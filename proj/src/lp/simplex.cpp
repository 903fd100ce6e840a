#include "fpg/lp/simplex.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fpg::lp {

namespace {

double initial_value(double lo, double hi) {
  if (std::isfinite(lo)) return lo;
  if (std::isfinite(hi)) return hi;
  return 0.0;
}

}  // namespace

SimplexEngine::SimplexEngine(LpProblem problem, SimplexOptions options)
    : lp_(std::move(problem)), opt_(options) {
  lp_.validate();
  n_ = lp_.variable_count();
  lo_ = lp_.lb;
  hi_ = lp_.ub;
  cost_ = lp_.cost;
  nonbasic_.resize(n_);
  where_.resize(n_);
  xn_.resize(static_cast<Eigen::Index>(n_));
  for (std::size_t j = 0; j < n_; ++j) {
    nonbasic_[j] = j;
    where_[j] = -static_cast<long>(j) - 1;
    xn_(static_cast<Eigen::Index>(j)) = initial_value(lo_[j], hi_[j]);
  }
  t_.resize(0, static_cast<Eigen::Index>(n_));
  xb_.resize(0);
  d_ = Eigen::Map<const Eigen::VectorXd>(cost_.data(), static_cast<Eigen::Index>(n_));
  in_tableau_.assign(lp_.rows.size(), false);
  for (std::size_t r = 0; r < lp_.rows.size(); ++r)
    if (!lp_.rows[r].lazy) add_tableau_row(r);
}

double SimplexEngine::tol(double bound) const {
  return opt_.primal_tol * std::max(1.0, std::isfinite(bound) ? std::abs(bound) : 1.0);
}

double SimplexEngine::value_of(std::size_t var) const {
  const long w = where_[var];
  return w >= 0 ? xb_(w) : xn_(-w - 1);
}

void SimplexEngine::add_tableau_row(std::size_t problem_row) {
  const LpRow& row = lp_.rows[problem_row];
  Eigen::RowVectorXd t = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(n_));
  for (const auto& [k, a] : row.coef) {
    const long w = where_[k];
    if (w >= 0) {
      t += a * t_.row(w);
    } else {
      t(-w - 1) += a;
    }
  }
  const auto m = t_.rows();
  t_.conservativeResize(m + 1, Eigen::NoChange);
  t_.row(m) = t;
  xb_.conservativeResize(m + 1);
  xb_(m) = t.dot(xn_);
  const std::size_t var = n_ + active_.size();
  active_.push_back(problem_row);
  in_tableau_[problem_row] = true;
  lo_.push_back(row.lo);
  hi_.push_back(row.hi);
  cost_.push_back(0.0);
  basic_.push_back(var);
  where_.push_back(static_cast<long>(m));
}

void SimplexEngine::set_bounds(std::size_t var, double lo, double hi) {
  if (var >= n_) throw std::out_of_range("set_bounds: not a structural variable");
  if (lo > hi) throw std::invalid_argument("set_bounds: lo > hi");
  const long w = where_[var];
  if (w < 0) {
    const auto j = -w - 1;
    const double old = xn_(j);
    const bool at_upper = std::isfinite(hi_[var]) && old == hi_[var] && old != lo_[var];
    double target = initial_value(lo, hi);
    if (at_upper && std::isfinite(hi)) target = hi;
    if (target != old) {
      xb_ += t_.col(j) * (target - old);
      xn_(j) = target;
    }
  }
  lo_[var] = lo;
  hi_[var] = hi;
}

void SimplexEngine::recompute_reduced_costs() {
  d_.resize(static_cast<Eigen::Index>(n_));
  for (std::size_t j = 0; j < n_; ++j) d_(static_cast<Eigen::Index>(j)) = cost_[nonbasic_[j]];
  for (Eigen::Index i = 0; i < t_.rows(); ++i) {
    const double c = cost_[basic_[static_cast<std::size_t>(i)]];
    if (c != 0.0) d_ += c * t_.row(i).transpose();
  }
}

bool SimplexEngine::refactor() {
  ++refactors_;
  const auto m = static_cast<Eigen::Index>(active_.size());
  const auto n = static_cast<Eigen::Index>(n_);
  // Row q of the system: activity_q - a_q . x = 0.
  // Structural columns of the row matrix, gathered once.
  std::vector<std::vector<std::pair<Eigen::Index, double>>> cols(n_);
  for (Eigen::Index q = 0; q < m; ++q)
    for (const auto& [k, a] : lp_.rows[active_[static_cast<std::size_t>(q)]].coef)
      cols[k].push_back({q, -a});
  using Triplet = Eigen::Triplet<double>;
  std::vector<Triplet> tb, tn;
  auto fill = [&](std::size_t var, std::vector<Triplet>& target, Eigen::Index col) {
    if (var >= n_) {
      target.emplace_back(static_cast<Eigen::Index>(var - n_), col, 1.0);
    } else {
      for (const auto& [q, v] : cols[var]) target.emplace_back(q, col, v);
    }
  };
  for (Eigen::Index i = 0; i < m; ++i) fill(basic_[static_cast<std::size_t>(i)], tb, i);
  for (Eigen::Index j = 0; j < n; ++j) fill(nonbasic_[static_cast<std::size_t>(j)], tn, j);
  if (m > 0) {
    Eigen::SparseMatrix<double> mb(m, m), mn(m, n);
    mb.setFromTriplets(tb.begin(), tb.end());
    mn.setFromTriplets(tn.begin(), tn.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(mb);
    if (lu.info() != Eigen::Success) {
      singular_ = true;
      return false;
    }
    const Eigen::MatrixXd dn(mn);
    const Eigen::MatrixXd sol = lu.solve(dn);
    const double scale = 1.0 + dn.cwiseAbs().maxCoeff() + sol.cwiseAbs().maxCoeff();
    if (lu.info() != Eigen::Success || !sol.allFinite() ||
        (mb * sol - dn).cwiseAbs().maxCoeff() > 1e-9 * scale) {
      singular_ = true;
      return false;
    }
    t_ = -sol;
  }
  xb_ = t_ * xn_;
  recompute_reduced_costs();
  return true;
}

bool SimplexEngine::drift_ok() {
  xb_ = t_ * xn_;
  const std::vector<double> x = structural_values();
  for (std::size_t q = 0; q < active_.size(); ++q) {
    const double s = lp_.row_activity(active_[q], x);
    const double v = value_of(n_ + q);
    if (std::abs(s - v) > 1e-7 * (1.0 + std::abs(s))) return false;
  }
  return true;
}

std::vector<double> SimplexEngine::structural_values() const {
  std::vector<double> x(n_);
  for (std::size_t k = 0; k < n_; ++k) x[k] = value_of(k);
  return x;
}

void SimplexEngine::pivot(std::size_t r, std::size_t j, double step, double dir,
                          double leave_value) {
  const auto ri = static_cast<Eigen::Index>(r), ji = static_cast<Eigen::Index>(j);
  const std::size_t entering = nonbasic_[j];
  const std::size_t leaving = basic_[r];
  xn_(ji) += dir * step;
  xb_ += t_.col(ji) * (dir * step);
  const double entering_value = xn_(ji);

  const double p = t_(ri, ji);
  t_.row(ri) *= -1.0 / p;
  t_(ri, ji) = 1.0 / p;
  const Eigen::RowVectorXd pivot_row = t_.row(ri);
  for (Eigen::Index i = 0; i < t_.rows(); ++i) {
    if (i == ri) continue;
    const double f = t_(i, ji);
    if (f == 0.0) continue;
    t_(i, ji) = 0.0;
    t_.row(i) += f * pivot_row;
  }
  const double fd = d_(ji);
  if (fd != 0.0) {
    d_(ji) = 0.0;
    d_ += fd * pivot_row.transpose();
  }
  basic_[r] = entering;
  nonbasic_[j] = leaving;
  where_[entering] = static_cast<long>(r);
  where_[leaving] = -static_cast<long>(j) - 1;
  xb_(ri) = entering_value;
  xn_(ji) = leave_value;
}

SimplexEngine::Outcome SimplexEngine::run(Phase phase) {
  const auto m = t_.rows();
  const auto n = static_cast<Eigen::Index>(n_);
  Eigen::VectorXd w(m);
  Eigen::VectorXd phase1_d(n);
  int degenerate = 0;
  bool bland = false;
  bool retried = false;
  for (;;) {
    if (iterations_ >= opt_.max_iterations) return Outcome::IterationLimit;
    if (iterations_ > 0 && iterations_ % static_cast<std::size_t>(opt_.check_every) == 0) {
      if (!drift_ok()) refactor();
    }
    const Eigen::VectorXd* d = &d_;
    if (phase == Phase::One) {
      bool any = false;
      for (Eigen::Index i = 0; i < m; ++i) {
        const std::size_t v = basic_[static_cast<std::size_t>(i)];
        const double x = xb_(i);
        w(i) = x < lo_[v] - tol(lo_[v]) ? -1.0 : (x > hi_[v] + tol(hi_[v]) ? 1.0 : 0.0);
        any = any || w(i) != 0.0;
      }
      if (!any) return Outcome::Done;
      phase1_d.setZero();
      for (Eigen::Index i = 0; i < m; ++i)
        if (w(i) != 0.0) phase1_d += w(i) * t_.row(i).transpose();
      d = &phase1_d;
    }

    // Pricing.
    Eigen::Index enter = -1;
    double best = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double dj = (*d)(j);
      const std::size_t v = nonbasic_[static_cast<std::size_t>(j)];
      const bool can_up = xn_(j) < hi_[v];
      const bool can_down = xn_(j) > lo_[v];
      if (!((dj < -opt_.dual_tol && can_up) || (dj > opt_.dual_tol && can_down))) continue;
      if (bland) {
        if (enter < 0 || v < nonbasic_[static_cast<std::size_t>(enter)]) enter = j;
      } else if (std::abs(dj) > best) {
        best = std::abs(dj);
        enter = j;
      }
    }
    if (enter < 0) {
      if (phase == Phase::One) {
        // Confirm on a fresh factorization before declaring infeasibility.
        if (!retried) {
          retried = true;
          if (refactor()) continue;
        }
        return Outcome::Infeasible;
      }
      return Outcome::Done;
    }
    const std::size_t ev = nonbasic_[static_cast<std::size_t>(enter)];
    const double dir = (*d)(enter) < 0.0 ? 1.0 : -1.0;
    const double range = hi_[ev] - lo_[ev];

    // Ratio test. kind: limit target bound for each candidate.
    struct Candidate {
      Eigen::Index row;
      double exact;
      double relaxed;
      double alpha;
      double target;
    };
    std::vector<Candidate> cands;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double alpha = t_(i, enter) * dir;
      if (std::abs(alpha) < opt_.pivot_tol) continue;
      const std::size_t v = basic_[static_cast<std::size_t>(i)];
      const double x = xb_(i);
      const double lo = lo_[v], hi = hi_[v];
      const bool below = x < lo - tol(lo), above = x > hi + tol(hi);
      if (phase == Phase::One && (below || above)) {
        if (below && alpha > 0.0) cands.push_back({i, (lo - x) / alpha, (lo - x) / alpha, alpha, lo});
        if (above && alpha < 0.0) cands.push_back({i, (x - hi) / -alpha, (x - hi) / -alpha, alpha, hi});
        continue;
      }
      if (alpha > 0.0 && std::isfinite(hi)) {
        cands.push_back({i, std::max(0.0, (hi - x) / alpha), std::max(0.0, (hi + tol(hi) - x) / alpha),
                         alpha, hi});
      } else if (alpha < 0.0 && std::isfinite(lo)) {
        cands.push_back({i, std::max(0.0, (x - lo) / -alpha),
                         std::max(0.0, (x - lo + tol(lo)) / -alpha), alpha, lo});
      }
    }
    const Candidate* chosen = nullptr;
    if (bland) {
      double min_ratio = kInf;
      for (const auto& c : cands) min_ratio = std::min(min_ratio, c.exact);
      for (const auto& c : cands) {
        if (c.exact <= min_ratio + 1e-12 &&
            (!chosen || basic_[static_cast<std::size_t>(c.row)] <
                            basic_[static_cast<std::size_t>(chosen->row)])) {
          chosen = &c;
        }
      }
    } else {
      double bound = kInf;
      for (const auto& c : cands) bound = std::min(bound, c.relaxed);
      for (const auto& c : cands) {
        if (c.exact <= bound && (!chosen || std::abs(c.alpha) > std::abs(chosen->alpha))) chosen = &c;
      }
    }
    ++iterations_;
    const double limit = chosen ? chosen->exact : kInf;
    if (std::isfinite(range) && range <= limit) {
      // Bound flip of the entering variable.
      xn_(enter) = dir > 0.0 ? hi_[ev] : lo_[ev];
      xb_ += t_.col(enter) * (dir * range);
      degenerate = 0;
      bland = false;
      continue;
    }
    if (!chosen) {
      if (phase == Phase::Two) return Outcome::Unbounded;
      // Phase one always has a limiting row when the pricing picked a column.
      if (!retried) {
        retried = true;
        if (refactor()) continue;
      }
      return Outcome::Infeasible;
    }
    if (limit <= 1e-12) {
      if (++degenerate > opt_.bland_after) bland = true;
    } else {
      degenerate = 0;
      bland = false;
    }
    pivot(static_cast<std::size_t>(chosen->row), static_cast<std::size_t>(enter), limit, dir,
          chosen->target);
  }
}

bool SimplexEngine::make_dual_feasible() {
  bool ok = true;
  for (std::size_t j = 0; j < n_; ++j) {
    const auto ji = static_cast<Eigen::Index>(j);
    const std::size_t v = nonbasic_[j];
    const double dj = d_(ji);
    const bool at_lo = xn_(ji) == lo_[v], at_hi = xn_(ji) == hi_[v];
    if (lo_[v] == hi_[v]) continue;
    if (dj < -opt_.dual_tol && !at_hi) {
      if (!std::isfinite(hi_[v])) {
        ok = false;
        continue;
      }
      xb_ += t_.col(ji) * (hi_[v] - xn_(ji));
      xn_(ji) = hi_[v];
    } else if (dj > opt_.dual_tol && !at_lo) {
      if (!std::isfinite(lo_[v])) {
        ok = false;
        continue;
      }
      xb_ += t_.col(ji) * (lo_[v] - xn_(ji));
      xn_(ji) = lo_[v];
    }
  }
  return ok;
}

SimplexEngine::Outcome SimplexEngine::run_dual() {
  const auto m = t_.rows();
  const auto n = static_cast<Eigen::Index>(n_);
  const std::size_t budget = 10 * static_cast<std::size_t>(m + n) + 100;
  for (std::size_t k = 0; k < budget; ++k) {
    if (iterations_ >= opt_.max_iterations) return Outcome::IterationLimit;
    if (iterations_ > 0 && iterations_ % static_cast<std::size_t>(opt_.check_every) == 0) {
      if (!drift_ok()) refactor();
    }
    // Leaving row: largest bound violation.
    Eigen::Index r = -1;
    double worst = 0.0, target = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      const std::size_t v = basic_[static_cast<std::size_t>(i)];
      const double x = xb_(i);
      if (x < lo_[v] - tol(lo_[v]) && lo_[v] - x > worst) {
        worst = lo_[v] - x;
        r = i;
        target = lo_[v];
      } else if (x > hi_[v] + tol(hi_[v]) && x - hi_[v] > worst) {
        worst = x - hi_[v];
        r = i;
        target = hi_[v];
      }
    }
    if (r < 0) return Outcome::Done;
    const double need = target - xb_(r);  // sign of the required change
    // Entering column: keeps reduced costs sign-consistent (Harris two pass).
    double bound = kInf;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double a = t_(r, j);
      if (std::abs(a) < opt_.pivot_tol) continue;
      const std::size_t v = nonbasic_[static_cast<std::size_t>(j)];
      if (lo_[v] == hi_[v]) continue;
      const double dir = (need > 0.0) == (a > 0.0) ? 1.0 : -1.0;
      if (dir > 0.0 && xn_(j) >= hi_[v]) continue;
      if (dir < 0.0 && xn_(j) <= lo_[v]) continue;
      // Moving xN_j by dir changes the objective at rate d_j * dir >= 0.
      const double rate = d_(j) * dir;
      bound = std::min(bound, (std::max(rate, 0.0) + opt_.dual_tol) / std::abs(a));
    }
    if (!std::isfinite(bound)) return Outcome::Infeasible;
    Eigen::Index enter = -1;
    double best_alpha = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double a = t_(r, j);
      if (std::abs(a) < opt_.pivot_tol) continue;
      const std::size_t v = nonbasic_[static_cast<std::size_t>(j)];
      if (lo_[v] == hi_[v]) continue;
      const double dir = (need > 0.0) == (a > 0.0) ? 1.0 : -1.0;
      if (dir > 0.0 && xn_(j) >= hi_[v]) continue;
      if (dir < 0.0 && xn_(j) <= lo_[v]) continue;
      const double ratio = std::max(d_(j) * dir, 0.0) / std::abs(a);
      if (ratio <= bound && std::abs(a) > best_alpha) {
        best_alpha = std::abs(a);
        enter = j;
      }
    }
    if (enter < 0) return Outcome::Infeasible;
    const double a = t_(r, enter);
    const double dir = (need > 0.0) == (a > 0.0) ? 1.0 : -1.0;
    const double step = std::abs(need / a);
    ++iterations_;
    pivot(static_cast<std::size_t>(r), static_cast<std::size_t>(enter), step, dir, target);
  }
  return Outcome::IterationLimit;
}

LpSolution SimplexEngine::solve() {
  LpSolution sol;
  const std::size_t start = iterations_;
  bool refreshed = false;
  singular_ = false;
  for (;;) {
    Outcome o = Outcome::IterationLimit;
    if (opt_.use_dual && make_dual_feasible()) {
      o = run_dual();
      // A stalled dual pass hands over to the primal phases; a dual
      // infeasibility verdict is confirmed by phase one.
      if (o == Outcome::Infeasible) o = Outcome::IterationLimit;
    }
    if (o != Outcome::Done || iterations_ >= opt_.max_iterations) o = run(Phase::One);
    if (o == Outcome::Done) o = run(Phase::Two);
    sol.iterations = iterations_ - start;
    if (singular_) {
      sol.status = LpStatus::NumericalFailure;
      sol.detail = "basis matrix became singular (rcond <= 1e-13)";
      return sol;
    }
    if (o == Outcome::Infeasible) {
      sol.status = LpStatus::Infeasible;
      return sol;
    }
    if (o == Outcome::Unbounded) {
      sol.status = LpStatus::Unbounded;
      return sol;
    }
    if (o == Outcome::IterationLimit) {
      sol.status = LpStatus::IterationLimit;
      sol.detail = "iteration limit " + std::to_string(opt_.max_iterations);
      return sol;
    }
    std::vector<double> x = structural_values();
    bool added = false;
    for (std::size_t r = 0; r < lp_.rows.size(); ++r) {
      if (in_tableau_[r]) continue;
      const double s = lp_.row_activity(r, x);
      if (s < lp_.rows[r].lo - tol(lp_.rows[r].lo) || s > lp_.rows[r].hi + tol(lp_.rows[r].hi)) {
        add_tableau_row(r);
        added = true;
      }
    }
    if (added) continue;
    double worst = 0.0;
    for (std::size_t k = 0; k < n_; ++k) {
      worst = std::max({worst, (lo_[k] - x[k]) / std::max(1.0, std::abs(lo_[k])),
                        (x[k] - hi_[k]) / std::max(1.0, std::abs(hi_[k]))});
    }
    for (std::size_t q = 0; q < active_.size(); ++q) {
      const auto& row = lp_.rows[active_[q]];
      const double s = lp_.row_activity(active_[q], x);
      worst = std::max({worst, (row.lo - s) / std::max(1.0, std::abs(row.lo)),
                        (s - row.hi) / std::max(1.0, std::abs(row.hi))});
    }
    if (worst > 1e-7) {
      if (!refreshed) {
        refreshed = true;
        if (refactor()) continue;
      }
      sol.status = LpStatus::NumericalFailure;
      sol.detail = "final point violates constraints by " + std::to_string(worst);
      return sol;
    }
    sol.status = LpStatus::Optimal;
    sol.x = std::move(x);
    sol.objective = lp_.evaluate(sol.x);
    return sol;
  }
}

LpSolution solve_lp(const LpProblem& problem, SimplexOptions options) {
  SimplexEngine engine(problem, options);
  return engine.solve();
}

}  // namespace fpg::lp
