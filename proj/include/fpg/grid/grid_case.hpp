#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace fpg::grid {

class CaseError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Transmission line; flow = susceptance * (angle_from - angle_to) in MW.
struct Line {
  int from = 0;
  int to = 0;
  double susceptance = 0.0;
  double limit_mw = 0.0;
};

struct Generator {
  int bus = 0;
  double p_min = 0.0;          // MW
  double p_max = 0.0;          // MW
  double ramp_up = 0.0;        // MW per period
  double ramp_down = 0.0;      // MW per period
  int min_up = 1;              // periods
  int min_down = 1;            // periods
  double cost_slope = 0.0;     // $/MWh
  double no_load_cost = 0.0;   // $/period while committed
  double startup_cost = 0.0;   // $ per 0 -> 1 transition
};

struct Renewable {
  int bus = 0;
  double rated_mw = 0.0;
};

/// Static network description. Buses are referenced by id; internal matrices
/// use the position of the id in `buses`.
struct GridCase {
  std::string name;
  std::vector<int> buses;
  std::vector<Line> lines;
  std::vector<Generator> generators;
  std::vector<Renewable> renewables;
  int slack_bus = 0;

  std::size_t bus_count() const noexcept { return buses.size(); }
  std::size_t bus_index(int id) const;
  std::size_t slack_index() const { return bus_index(slack_bus); }

  /// Throws CaseError on the first violated invariant.
  void validate() const;

  double installed_conventional_mw() const;
  double installed_renewable_mw() const;
};

}  // namespace fpg::grid
