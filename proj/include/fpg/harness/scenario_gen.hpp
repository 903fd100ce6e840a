#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "fpg/grid/scenario.hpp"

namespace fpg::harness {

struct ScenarioKnobs {
  std::size_t horizon = 24;
  std::size_t steps_per_period = 12;  // 5-minute resolution inside an hour
  double load_scale = 1.0;            // multiplies the case's nominal load
  double day_sigma = 0.08;            // lognormal day factor
  double bus_sigma = 0.05;            // lognormal per-bus weight noise
  double step_sigma = 0.01;           // fine-step load noise
  double wind_scale = 1.0;            // 0 zeroes every forecast
  double wind_alpha = 1.6;            // beta marginal of capacity factors
  double wind_beta = 2.8;
  double wind_phi = 0.8;              // AR(1) coefficient between periods
  double wind_common = 0.5;           // share of variance common to all farms
  double reserve_fraction = 0.15;
  /// Redraw days that admit no dispatch with every unit committed.
  bool screen_infeasible = true;
};

using ScenarioSet = std::vector<grid::Scenario>;

/// Throws std::runtime_error when screening rejects kMaxDraws days in a row.
inline constexpr std::size_t kMaxDraws = 1000;

ScenarioSet generate_scenarios(const grid::GridCase& grid, std::size_t count, std::uint64_t seed,
                               const ScenarioKnobs& knobs = {});

/// Directory of scenario_NNNN.csv / scenario_NNNN_reserve.csv pairs.
void save_scenario_set(const grid::GridCase& grid, const ScenarioSet& set,
                       const std::filesystem::path& dir);
ScenarioSet load_scenario_set(const grid::GridCase& grid, const std::filesystem::path& dir);

}  // namespace fpg::harness
