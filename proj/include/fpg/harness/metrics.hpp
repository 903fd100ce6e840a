#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "fpg/uc/decision.hpp"

namespace fpg::harness {

struct Stat {
  double mean = 0.0;
  double std = 0.0;  // population
  bool operator==(const Stat&) const = default;
};

Stat mean_std(const std::vector<double>& values);

/// Per-scenario deviations from the baseline, summarized over the set.
/// Freq is the percentage of lines over their limit in at least one period
/// of the horizon.
struct MetricsRow {
  std::string method;
  Stat e_cost;    // $
  Stat e_curt;    // MW
  Stat freq_pct;  // %
  Stat seconds;   // wall time per scenario
  bool operator==(const MetricsRow&) const = default;
};

struct ScenarioMetrics {
  double e_cost = 0.0;
  double e_curt = 0.0;
  double freq_pct = 0.0;
};

/// Lines above their limit by more than this count as overloaded.
inline constexpr double kOverloadTol = 1e-6;

/// Sum over farms and periods of forecast minus scheduled renewable output.
double curtailment(const uc::UcDecision& decision, const grid::GridCase& grid,
                   const grid::Scenario& scenario);

ScenarioMetrics scenario_metrics(const uc::UcDecision& decision, const uc::UcDecision& baseline,
                                 const grid::GridCase& grid, const grid::Scenario& scenario,
                                 const uc::UcParams& params);

/// Throws std::invalid_argument when decisions, baseline, scenarios or
/// timings differ in count, or a decision does not match its scenario.
MetricsRow compute_metrics(const std::string& method, const std::vector<uc::UcDecision>& decisions,
                           const std::vector<double>& seconds, const grid::GridCase& grid,
                           const std::vector<grid::Scenario>& scenarios,
                           const std::vector<uc::UcDecision>& baseline,
                           const uc::UcParams& params);

/// method,e_cost_mean,e_cost_std,e_curt_mean,e_curt_std,freq_mean,freq_std
/// Wall times go to a separate file so this one is reproducible.
void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows);
/// method,seconds_mean,seconds_std
void write_timing_csv(std::ostream& out, const std::vector<MetricsRow>& rows);
/// Reads a metrics CSV and, optionally, merges timings by method name.
std::vector<MetricsRow> read_metrics_csv(std::istream& in);
void read_timing_csv(std::istream& in, std::vector<MetricsRow>& rows);

/// Table with mean ± std per column.
void write_metrics_markdown(std::ostream& out, const std::vector<MetricsRow>& rows);

}  // namespace fpg::harness
