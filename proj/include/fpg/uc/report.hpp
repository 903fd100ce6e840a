#pragma once

#include <iosfwd>
#include <map>
#include <vector>

#include "fpg/uc/residuals.hpp"

namespace fpg::uc {

struct GroupSummary {
  double max_violation = 0.0;  // max |entry|
  double l1_violation = 0.0;   // sum |entry|
};

struct FeasibilityReport {
  std::map<Group, GroupSummary> groups;
  bool feasible = true;
  std::size_t overloaded_lines = 0;
  std::size_t total_lines = 0;
  /// Share of lines over their limit in at least one period.
  double overload_frequency = 0.0;

  double total_l1() const;
  double family_l1(Family f) const;
};

FeasibilityReport summarize(const ConstraintResiduals& residuals, double tol);

FeasibilityReport feasibility_report(const UcDecision& dec, const grid::GridCase& grid,
                                     const grid::Scenario& scenario, const UcParams& params,
                                     double tol);

/// One row of the residual CSV: group,period,max_violation,l1_violation.
struct ResidualRow {
  Group group = Group::Balance;
  std::size_t period = 0;
  double max_violation = 0.0;
  double l1_violation = 0.0;
  bool operator==(const ResidualRow&) const = default;
};

std::vector<ResidualRow> residual_rows(const ConstraintResiduals& residuals);
void write_residual_csv(const std::vector<ResidualRow>& rows, std::ostream& out);
std::vector<ResidualRow> read_residual_csv(std::istream& in);

}  // namespace fpg::uc
