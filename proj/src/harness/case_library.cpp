#include "fpg/harness/case_library.hpp"

#include <array>
#include <map>

namespace fpg::harness {

namespace {

// from, to, reactance (p.u.), rating (MW)
struct Branch {
  int from;
  int to;
  double x;
  double rate;
};

constexpr std::array<Branch, 41> kIeee30Branches = {{
    {1, 2, 0.06, 130},  {1, 3, 0.19, 130},  {2, 4, 0.17, 65},   {3, 4, 0.04, 130},
    {2, 5, 0.20, 130},  {2, 6, 0.18, 65},   {4, 6, 0.04, 90},   {5, 7, 0.12, 70},
    {6, 7, 0.08, 130},  {6, 8, 0.04, 32},   {6, 9, 0.21, 65},   {6, 10, 0.56, 32},
    {9, 11, 0.21, 65},  {9, 10, 0.11, 65},  {4, 12, 0.26, 65},  {12, 13, 0.14, 65},
    {12, 14, 0.26, 32}, {12, 15, 0.13, 32}, {12, 16, 0.20, 32}, {14, 15, 0.20, 16},
    {16, 17, 0.19, 16}, {15, 18, 0.22, 16}, {18, 19, 0.13, 16}, {19, 20, 0.07, 32},
    {10, 20, 0.21, 32}, {10, 17, 0.08, 32}, {10, 21, 0.07, 32}, {10, 22, 0.15, 32},
    {21, 22, 0.02, 32}, {15, 23, 0.20, 16}, {22, 24, 0.18, 16}, {23, 24, 0.27, 16},
    {24, 25, 0.33, 16}, {25, 26, 0.38, 16}, {25, 27, 0.21, 16}, {28, 27, 0.40, 65},
    {27, 29, 0.42, 16}, {27, 30, 0.60, 16}, {29, 30, 0.45, 16}, {8, 28, 0.20, 32},
    {6, 28, 0.06, 32},
}};

constexpr std::array<double, 30> kIeee30Load = {
    0.0, 21.7, 2.4, 7.6,  94.2, 0.0, 22.8, 30.0, 0.0, 5.8, 0.0, 11.2, 0.0, 6.2, 8.2,
    3.5, 9.0,  3.2, 9.5,  2.2,  17.5, 0.0, 3.2, 8.7, 0.0, 3.5, 0.0, 0.0, 2.4, 10.6};

constexpr double kBaseMva = 100.0;

grid::Generator unit(int bus, double p_max, double slope) {
  grid::Generator g;
  g.bus = bus;
  g.p_max = p_max;
  g.p_min = 0.2 * p_max;
  g.ramp_up = g.ramp_down = 0.5 * p_max;
  g.min_up = g.min_down = 2;
  g.cost_slope = slope;
  return g;
}

}  // namespace

grid::GridCase toy3_case() {
  grid::GridCase g;
  g.name = "toy3";
  g.buses = {1, 2, 3};
  g.slack_bus = 1;
  g.lines = {{1, 2, 1000.0, 60.0}, {2, 3, 1000.0, 40.0}, {1, 3, 1000.0, 40.0}};
  g.generators = {unit(1, 100.0, 2.0), unit(2, 80.0, 3.0)};
  g.generators[0].no_load_cost = 20.0;
  g.generators[1].no_load_cost = 10.0;
  g.generators[0].startup_cost = 100.0;
  g.generators[1].startup_cost = 40.0;
  g.generators[0].min_up = g.generators[0].min_down = 2;
  g.generators[1].min_up = g.generators[1].min_down = 1;
  g.renewables = {{3, 50.0}};
  return g;
}

grid::GridCase ieee30_case() {
  grid::GridCase g;
  g.name = "ieee30";
  for (int b = 1; b <= 30; ++b) g.buses.push_back(b);
  g.slack_bus = 1;
  for (const auto& br : kIeee30Branches) g.lines.push_back({br.from, br.to, kBaseMva / br.x, br.rate});
  g.generators = {unit(1, 115.0, 3.6),  unit(2, 115.0, 3.15), unit(22, 72.0, 4.125),
                  unit(27, 79.0, 3.71), unit(23, 43.0, 3.75), unit(13, 56.0, 4.0)};
  g.renewables = {{6, 60.0}, {12, 70.0}, {10, 55.0}, {15, 65.0}, {27, 65.0}};
  return g;
}

std::vector<double> nominal_load(const grid::GridCase& grid) {
  if (grid.name == "ieee30") return {kIeee30Load.begin(), kIeee30Load.end()};
  if (grid.name == "toy3") return {0.0, 45.0, 35.0};
  // Unknown case: spread 60% of conventional capacity evenly.
  return std::vector<double>(grid.bus_count(),
                             0.6 * grid.installed_conventional_mw() / static_cast<double>(grid.bus_count()));
}

grid::GridCase builtin_case(const std::string& name) {
  if (name == "toy3") return toy3_case();
  if (name == "ieee30") return ieee30_case();
  throw grid::CaseError("unknown built-in case '" + name + "' (expected toy3 or ieee30)");
}

}  // namespace fpg::harness
