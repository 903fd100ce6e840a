#pragma once

#include <iosfwd>
#include <vector>

#include "fpg/lp/milp.hpp"
#include "fpg/uc/decision.hpp"

namespace fpg::lp {

/// Column indices of the UC variables, [unit][period] / [farm][period].
struct UcLayout {
  std::vector<std::vector<std::size_t>> commitment, startup, dispatch, reserve_up, reserve_down;
  std::vector<std::vector<std::size_t>> renewable;
  std::size_t periods = 0;
};

struct UcMilp {
  MilpProblem milp;
  UcLayout layout;
};

/// Linearized UC. Nodal balance and line limits use the DC network through
/// a system balance row per period and PTDF-based line rows (lazy), so bus
/// angles are recovered after the solve rather than carried as columns.
UcMilp build_milp(const grid::GridCase& grid, const grid::Scenario& scenario,
                  const uc::UcParams& params);

/// Decision from a MILP point: S rounded, dispatch and renewables copied,
/// angles from the DC power flow of the resulting injections.
uc::UcDecision decode(const UcMilp& model, const std::vector<double>& x,
                      const grid::GridCase& grid, const grid::Scenario& scenario);

struct UcSolveResult {
  MilpSolution solution;
  uc::UcDecision decision;  // valid when solution has an incumbent
};

/// Seeds the search with the all-on dispatch (below) when it is feasible
/// and options.start is empty.
UcSolveResult solve_uc(const grid::GridCase& grid, const grid::Scenario& scenario,
                       const uc::UcParams& params, const MilpOptions& options = {});

/// LP with every unit committed in every period. Feasibility here implies
/// the MILP has a feasible point.
bool all_on_feasible(const grid::GridCase& grid, const grid::Scenario& scenario,
                     const uc::UcParams& params);

inline constexpr std::size_t kBruteForceLimit = 20;

/// Exhaustive oracle: every commitment pattern that passes the min-up/down
/// residual check gets a fresh LP with S and the startup indicators fixed.
/// solution.nodes reports the number of patterns enumerated. Throws
/// std::length_error when generators x periods exceeds kBruteForceLimit.
UcSolveResult brute_force_uc(const grid::GridCase& grid, const grid::Scenario& scenario,
                             const uc::UcParams& params);

/// var,generator_or_bus,period,value with var in S, P_G, P_R, delta.
/// Generators and farms are indexed by position, angles by bus id.
void write_solution_csv(const uc::UcDecision& decision, const grid::GridCase& grid,
                        std::ostream& out);

}  // namespace fpg::lp
