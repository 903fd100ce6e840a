#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "fpg/grid/grid_case.hpp"
#include "fpg/uc/decision.hpp"

namespace fpg::harness {

/// Aggregate violation per epoch for each method (methods as columns).
struct ViolationTable {
  std::vector<std::string> methods;
  std::vector<std::size_t> epochs;
  /// values[e][m]; NaN where a method stopped early.
  std::vector<std::vector<double>> values;
  bool operator==(const ViolationTable& other) const;
};

/// epoch,<method>,... with an empty cell for missing values.
void write_violation_csv(std::ostream& out, const ViolationTable& table);
ViolationTable read_violation_csv(std::istream& in);

/// Line chart of violation against epoch, one polyline per method, log y.
void write_violation_svg(std::ostream& out, const ViolationTable& table);

/// Inverse of lp::write_solution_csv for a known case and horizon.
uc::UcDecision read_solution_csv(std::istream& in, const grid::GridCase& grid,
                                 std::size_t horizon);

}  // namespace fpg::harness
