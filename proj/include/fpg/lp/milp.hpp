#pragma once

#include <iosfwd>
#include <vector>

#include "fpg/lp/simplex.hpp"

namespace fpg::lp {

struct MilpProblem {
  LpProblem lp;
  std::vector<std::size_t> binaries;

  /// Throws std::invalid_argument when a binary index is out of range or its
  /// bounds are not within [0, 1].
  void validate() const;
};

struct MilpOptions {
  double abs_gap = 1e-6;
  /// Stop once (incumbent - bound) / max(1, |incumbent|) falls below this;
  /// zero disables the test.
  double rel_gap = 0.0;
  std::size_t node_cap = 200000;
  double integrality_tol = 1e-6;
  bool keep_trace = true;
  /// Run the diving heuristic at the root and then every this many nodes
  /// (0 disables it).
  std::size_t dive_every = 50;
  std::size_t dive_rounds = 50;
  /// Known feasible point, taken as the first incumbent when it satisfies
  /// bounds, rows and integrality within integrality_tol. Ignored otherwise.
  std::vector<double> start;
  SimplexOptions simplex;
};

enum class MilpStatus { Optimal, Infeasible, NodeCapReached, NumericalFailure };

const char* status_name(MilpStatus s);

struct NodeTrace {
  std::size_t node = 0;
  std::size_t depth = 0;
  double lp_bound = 0.0;      // NaN when the node LP is infeasible
  double global_bound = 0.0;  // running maximum of the open-set minimum
  double incumbent = 0.0;     // +inf before the first incumbent
  const char* outcome = "";
};

struct MilpSolution {
  MilpStatus status = MilpStatus::NumericalFailure;
  std::vector<double> x;
  double objective = kInf;
  double best_bound = -kInf;
  double gap = kInf;
  double relative_gap = kInf;
  std::size_t nodes = 0;
  double wall_seconds = 0.0;
  /// Set when node_cap stopped the search; x is then the best incumbent,
  /// empty if none was found.
  bool node_cap_hit = false;
  std::vector<NodeTrace> trace;
};

/// Best-bound branch and bound with depth-first plunging. Branches on the
/// most fractional binary (ties to the lowest index) and dives first into
/// the child that rounds the LP value.
MilpSolution solve_milp(const MilpProblem& problem, const MilpOptions& options = {});

void write_solver_log(const MilpSolution& solution, std::ostream& out);

}  // namespace fpg::lp
