#include "fpg/harness/metrics.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "fpg/grid/io.hpp"
#include "fpg/uc/report.hpp"

namespace fpg::harness {

using grid::format_double;

Stat mean_std(const std::vector<double>& values) {
  Stat s;
  if (values.empty()) return s;
  const double n = static_cast<double>(values.size());
  for (double v : values) s.mean += v;
  s.mean /= n;
  double var = 0.0;
  for (double v : values) var += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(var / n);
  return s;
}

double curtailment(const uc::UcDecision& decision, const grid::GridCase& grid,
                   const grid::Scenario& scenario) {
  return (scenario.farm_forecast(grid) - decision.renewable).sum();
}

ScenarioMetrics scenario_metrics(const uc::UcDecision& decision, const uc::UcDecision& baseline,
                                 const grid::GridCase& grid, const grid::Scenario& scenario,
                                 const uc::UcParams& params) {
  ScenarioMetrics m;
  m.e_cost = uc::objective(decision, grid, scenario, params) -
             uc::objective(baseline, grid, scenario, params);
  m.e_curt = curtailment(decision, grid, scenario) - curtailment(baseline, grid, scenario);
  const auto rep = uc::summarize(uc::all_residuals(decision, grid, scenario, params), kOverloadTol);
  m.freq_pct = 100.0 * rep.overload_frequency;
  return m;
}

MetricsRow compute_metrics(const std::string& method, const std::vector<uc::UcDecision>& decisions,
                           const std::vector<double>& seconds, const grid::GridCase& grid,
                           const std::vector<grid::Scenario>& scenarios,
                           const std::vector<uc::UcDecision>& baseline,
                           const uc::UcParams& params) {
  const std::size_t n = scenarios.size();
  if (decisions.size() != n || baseline.size() != n || seconds.size() != n) {
    throw std::invalid_argument("compute_metrics: " + std::to_string(decisions.size()) +
                                " decisions, " + std::to_string(baseline.size()) +
                                " baseline decisions, " + std::to_string(seconds.size()) +
                                " timings for " + std::to_string(n) + " scenarios");
  }
  std::vector<double> cost, curt, freq;
  for (std::size_t i = 0; i < n; ++i) {
    try {
      decisions[i].validate(grid, scenarios[i].horizon());
      baseline[i].validate(grid, scenarios[i].horizon());
    } catch (const std::exception& e) {
      throw std::invalid_argument("compute_metrics: scenario " + std::to_string(i) + ": " + e.what());
    }
    const ScenarioMetrics m = scenario_metrics(decisions[i], baseline[i], grid, scenarios[i], params);
    cost.push_back(m.e_cost);
    curt.push_back(m.e_curt);
    freq.push_back(m.freq_pct);
  }
  MetricsRow row;
  row.method = method;
  row.e_cost = mean_std(cost);
  row.e_curt = mean_std(curt);
  row.freq_pct = mean_std(freq);
  row.seconds = mean_std(seconds);
  return row;
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

double parse_number(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw std::invalid_argument("metrics csv: bad number '" + s + "'");
  return v;
}

}  // namespace

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows) {
  out << "method,e_cost_mean,e_cost_std,e_curt_mean,e_curt_std,freq_mean,freq_std\n";
  for (const auto& r : rows) {
    out << r.method << ',' << format_double(r.e_cost.mean) << ',' << format_double(r.e_cost.std)
        << ',' << format_double(r.e_curt.mean) << ',' << format_double(r.e_curt.std) << ','
        << format_double(r.freq_pct.mean) << ',' << format_double(r.freq_pct.std) << '\n';
  }
}

void write_timing_csv(std::ostream& out, const std::vector<MetricsRow>& rows) {
  out << "method,seconds_mean,seconds_std\n";
  for (const auto& r : rows) {
    out << r.method << ',' << format_double(r.seconds.mean) << ',' << format_double(r.seconds.std)
        << '\n';
  }
}

std::vector<MetricsRow> read_metrics_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) ||
      line != "method,e_cost_mean,e_cost_std,e_curt_mean,e_curt_std,freq_mean,freq_std") {
    throw std::invalid_argument("metrics csv: unexpected header");
  }
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c = split(line);
    if (c.size() != 7) throw std::invalid_argument("metrics csv: expected 7 fields: " + line);
    MetricsRow r;
    r.method = c[0];
    r.e_cost = {parse_number(c[1]), parse_number(c[2])};
    r.e_curt = {parse_number(c[3]), parse_number(c[4])};
    r.freq_pct = {parse_number(c[5]), parse_number(c[6])};
    rows.push_back(r);
  }
  return rows;
}

void read_timing_csv(std::istream& in, std::vector<MetricsRow>& rows) {
  std::string line;
  if (!std::getline(in, line) || line != "method,seconds_mean,seconds_std") {
    throw std::invalid_argument("timing csv: unexpected header");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c = split(line);
    if (c.size() != 3) throw std::invalid_argument("timing csv: expected 3 fields: " + line);
    bool found = false;
    for (auto& r : rows) {
      if (r.method == c[0]) {
        r.seconds = {parse_number(c[1]), parse_number(c[2])};
        found = true;
      }
    }
    if (!found) throw std::invalid_argument("timing csv: no metrics row for method " + c[0]);
  }
}

void write_metrics_markdown(std::ostream& out, const std::vector<MetricsRow>& rows) {
  auto cell = [](const Stat& s) {
    std::ostringstream os;
    os.precision(4);
    os << s.mean << " ± " << s.std;
    return os.str();
  };
  out << "| method | E_cost ($) | E_curt (MW) | time (s) | Freq (%) |\n";
  out << "|---|---|---|---|---|\n";
  for (const auto& r : rows) {
    out << "| " << r.method << " | " << cell(r.e_cost) << " | " << cell(r.e_curt) << " | "
        << cell(r.seconds) << " | " << cell(r.freq_pct) << " |\n";
  }
}

}  // namespace fpg::harness
