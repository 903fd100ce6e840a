#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <queue>
#include <stdexcept>

#include "fpg/lp/milp.hpp"

namespace fpg::lp {

void MilpProblem::validate() const {
  lp.validate();
  for (std::size_t b : binaries) {
    if (b >= lp.variable_count()) throw std::invalid_argument("binary index out of range");
    if (lp.lb[b] < 0.0 || lp.ub[b] > 1.0) {
      throw std::invalid_argument("binary " + lp.names[b] + " has bounds outside [0, 1]");
    }
  }
}

const char* status_name(MilpStatus s) {
  switch (s) {
    case MilpStatus::Optimal: return "optimal";
    case MilpStatus::Infeasible: return "infeasible";
    case MilpStatus::NodeCapReached: return "node_cap_reached";
    case MilpStatus::NumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

namespace {

struct Node {
  std::size_t id = 0;
  std::size_t depth = 0;
  double bound = -kInf;
  std::vector<std::pair<std::size_t, double>> fixings;
};

struct WorseBound {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id > b.id;
  }
};

}  // namespace

MilpSolution solve_milp(const MilpProblem& problem, const MilpOptions& options) {
  if (options.abs_gap < 0.0 || options.rel_gap < 0.0) {
    throw std::invalid_argument("solve_milp: gap tolerances must be >= 0");
  }
  problem.validate();
  const auto started = std::chrono::steady_clock::now();
  MilpSolution out;
  SimplexEngine engine(problem.lp, options.simplex);
  double incumbent = kInf;
  double global_bound = -kInf;
  bool numerical_trouble = false;
  const std::vector<double> base_lb = problem.lp.lb, base_ub = problem.lp.ub;

  auto apply = [&](const std::vector<std::pair<std::size_t, double>>& fixings) {
    for (std::size_t b : problem.binaries) {
      double lo = base_lb[b], hi = base_ub[b];
      for (const auto& [v, val] : fixings)
        if (v == b) lo = hi = val;
      if (engine.lower(b) != lo || engine.upper(b) != hi) engine.set_bounds(b, lo, hi);
    }
  };
  auto solve_node = [&]() {
    LpSolution s = engine.solve();
    if (s.status == LpStatus::NumericalFailure || s.status == LpStatus::IterationLimit) {
      // Retry from a fresh basis with the same bounds.
      LpProblem cold = problem.lp;
      for (std::size_t k = 0; k < cold.variable_count(); ++k) {
        cold.lb[k] = engine.lower(k);
        cold.ub[k] = engine.upper(k);
      }
      engine = SimplexEngine(cold, options.simplex);
      s = engine.solve();
      for (std::size_t k = 0; k < cold.variable_count(); ++k) engine.set_bounds(k, base_lb[k], base_ub[k]);
    }
    return s;
  };
  auto gap_closed = [&](double incumbent, double bound) {
    if (!std::isfinite(incumbent)) return false;
    const double gap = incumbent - bound;
    if (gap <= options.abs_gap) return true;
    return options.rel_gap > 0.0 && gap / std::max(1.0, std::abs(incumbent)) <= options.rel_gap;
  };

  // Diving heuristic: round up every fractional binary at or above one half
  // (or the largest one if none is), re-solve, repeat until the LP point is
  // integral or infeasible. Leaves the engine bounds dirty; callers re-apply.
  auto dive = [&](std::vector<std::pair<std::size_t, double>> fixings, const LpSolution& start) {
    LpSolution lp = start;
    std::vector<char> fixed(problem.lp.variable_count(), 0);
    for (const auto& f : fixings) fixed[f.first] = 1;
    for (std::size_t round = 0; round < options.dive_rounds; ++round) {
      std::size_t added = 0;
      bool integral = true;
      for (std::size_t b : problem.binaries) {
        if (fixed[b]) continue;
        const double v = lp.x[b];
        const bool near = std::abs(v - std::round(v)) <= options.integrality_tol;
        integral = integral && near;
        if (!near && v >= 0.5) {
          fixings.push_back({b, 1.0});
          fixed[b] = 1;
          ++added;
        }
      }
      if (integral) return true;
      if (added == 0) {
        // Everything left sits below one half: round the largest up.
        std::size_t pick = problem.binaries.size();
        double best = -1.0;
        for (std::size_t k = 0; k < problem.binaries.size(); ++k) {
          const std::size_t b = problem.binaries[k];
          const double v = lp.x[b];
          if (!fixed[b] && std::abs(v - std::round(v)) > options.integrality_tol && v > best) {
            best = lp.x[b];
            pick = k;
          }
        }
        fixings.push_back({problem.binaries[pick], 1.0});
        fixed[problem.binaries[pick]] = 1;
      }
      apply(fixings);
      lp = solve_node();
      if (lp.status != LpStatus::Optimal || lp.objective >= incumbent - options.abs_gap) return false;
      bool done = true;
      for (std::size_t b : problem.binaries) done = done && std::abs(lp.x[b] - std::round(lp.x[b])) <= options.integrality_tol;
      if (done) {
        incumbent = lp.objective;
        out.x = lp.x;
        for (std::size_t b : problem.binaries) out.x[b] = std::round(out.x[b]);
        return true;
      }
    }
    return false;
  };

  if (options.start.size() == problem.lp.variable_count() &&
      problem.lp.max_violation(options.start) <= options.integrality_tol) {
    bool integral = true;
    for (std::size_t b : problem.binaries)
      integral = integral && std::abs(options.start[b] - std::round(options.start[b])) <= options.integrality_tol;
    if (integral) {
      out.x = options.start;
      for (std::size_t b : problem.binaries) out.x[b] = std::round(out.x[b]);
      incumbent = problem.lp.evaluate(out.x);
    }
  }

  std::priority_queue<Node, std::vector<Node>, WorseBound> open;
  open.push(Node{});
  std::size_t next_id = 1;

  while (!open.empty()) {
    Node node = open.top();
    open.pop();
    if (node.bound >= incumbent - options.abs_gap) {
      // Every remaining node is at least as bad.
      global_bound = std::max(global_bound, std::min(node.bound, incumbent));
      while (!open.empty()) open.pop();
      break;
    }
    global_bound = std::max(global_bound, node.bound);
    if (gap_closed(incumbent, global_bound)) {
      open.push(node);
      break;
    }
    // Plunge.
    for (;;) {
      if (out.nodes >= options.node_cap) {
        out.node_cap_hit = true;
        open.push(node);
        break;
      }
      ++out.nodes;
      apply(node.fixings);
      const LpSolution lp = solve_node();
      NodeTrace tr{node.id, node.depth, std::numeric_limits<double>::quiet_NaN(), 0.0, incumbent, ""};
      auto log = [&](const char* outcome) {
        const double open_min = open.empty() ? kInf : open.top().bound;
        const double bound_now = std::min({open_min, std::isnan(tr.lp_bound) ? kInf : tr.lp_bound, incumbent});
        if (std::isfinite(bound_now)) global_bound = std::max(global_bound, bound_now);
        tr.global_bound = global_bound;
        tr.incumbent = incumbent;
        tr.outcome = outcome;
        if (options.keep_trace) out.trace.push_back(tr);
      };
      if (lp.status == LpStatus::Infeasible) {
        log("infeasible");
        break;
      }
      if (lp.status != LpStatus::Optimal) {
        numerical_trouble = true;
        log(status_name(lp.status));
        break;
      }
      tr.lp_bound = lp.objective;
      if (lp.objective >= incumbent - options.abs_gap) {
        log("pruned");
        break;
      }
      std::size_t branch = problem.binaries.size();
      double most = options.integrality_tol;
      for (std::size_t k = 0; k < problem.binaries.size(); ++k) {
        const double v = lp.x[problem.binaries[k]];
        const double frac = std::abs(v - std::round(v));
        if (frac > most) {
          most = frac;
          branch = k;
        }
      }
      if (branch == problem.binaries.size()) {
        // Integral: polish with the binaries fixed at their rounded values.
        std::vector<std::pair<std::size_t, double>> fixed;
        for (std::size_t b : problem.binaries) fixed.push_back({b, std::round(lp.x[b])});
        apply(fixed);
        const LpSolution polished = solve_node();
        const LpSolution& use = polished.status == LpStatus::Optimal ? polished : lp;
        if (use.objective < incumbent) {
          incumbent = use.objective;
          out.x = use.x;
          for (std::size_t b : problem.binaries) out.x[b] = std::round(out.x[b]);
        }
        log("incumbent");
        break;
      }
      if (options.dive_every > 0 && (out.nodes - 1) % options.dive_every == 0) {
        const double before = incumbent;
        dive(node.fixings, lp);
        apply(node.fixings);
        if (incumbent < before && options.keep_trace) {
          out.trace.push_back({node.id, node.depth, lp.objective, global_bound, incumbent, "dive"});
        }
        if (lp.objective >= incumbent - options.abs_gap) {
          log("pruned");
          break;
        }
      }
      log("branched");
      const std::size_t var = problem.binaries[branch];
      const double toward = lp.x[var] >= 0.5 ? 1.0 : 0.0;
      Node away{next_id++, node.depth + 1, lp.objective, node.fixings};
      away.fixings.push_back({var, 1.0 - toward});
      Node dive{next_id++, node.depth + 1, lp.objective, node.fixings};
      dive.fixings.push_back({var, toward});
      open.push(std::move(away));
      node = std::move(dive);
    }
    if (out.node_cap_hit) break;
  }

  out.objective = incumbent;
  if (open.empty()) {
    // Search exhausted: the incumbent is optimal.
    if (std::isfinite(incumbent)) global_bound = incumbent;
  } else {
    global_bound = std::max(global_bound, std::min(open.top().bound, incumbent));
  }
  out.best_bound = global_bound;
  if (std::isfinite(incumbent)) {
    out.gap = std::max(0.0, incumbent - global_bound);
    out.relative_gap = out.gap / std::max(1.0, std::abs(incumbent));
  }
  if (out.node_cap_hit) {
    out.status = MilpStatus::NodeCapReached;
  } else if (std::isfinite(incumbent)) {
    out.status = MilpStatus::Optimal;
  } else {
    out.status = numerical_trouble ? MilpStatus::NumericalFailure : MilpStatus::Infeasible;
  }
  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return out;
}

void write_solver_log(const MilpSolution& s, std::ostream& out) {
  out << "status " << status_name(s.status) << "\n";
  out << "objective " << s.objective << "\n";
  out << "best_bound " << s.best_bound << "\n";
  out << "gap " << s.gap << " relative_gap " << s.relative_gap << "\n";
  out << "nodes " << s.nodes << (s.node_cap_hit ? " (node cap reached)" : "") << "\n";
  out << "node depth lp_bound global_bound incumbent outcome\n";
  for (const auto& t : s.trace) {
    out << t.node << ' ' << t.depth << ' ' << t.lp_bound << ' ' << t.global_bound << ' '
        << t.incumbent << ' ' << t.outcome << "\n";
  }
}

}  // namespace fpg::lp
