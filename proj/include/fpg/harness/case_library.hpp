#pragma once

#include <string>
#include <vector>

#include "fpg/grid/grid_case.hpp"

namespace fpg::harness {

/// Three buses in a triangle, two units and one wind farm.
grid::GridCase toy3_case();

/// IEEE 30-bus network with five wind farms (buses 6, 12, 10, 15, 27) and a
/// six-unit conventional fleet sized so wind is ~39.6% of installed capacity.
grid::GridCase ieee30_case();

/// Nominal per-bus load (MW), aligned with the case's bus order.
std::vector<double> nominal_load(const grid::GridCase& grid);

/// Lookup by name ("toy3", "ieee30"); throws grid::CaseError otherwise.
grid::GridCase builtin_case(const std::string& name);

}  // namespace fpg::harness
