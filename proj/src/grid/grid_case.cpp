#include "fpg/grid/grid_case.hpp"

#include <algorithm>
#include <set>

namespace fpg::grid {

std::size_t GridCase::bus_index(int id) const {
  auto it = std::find(buses.begin(), buses.end(), id);
  if (it == buses.end()) throw CaseError("unknown bus id " + std::to_string(id));
  return static_cast<std::size_t>(it - buses.begin());
}

void GridCase::validate() const {
  if (buses.empty()) throw CaseError("case has no buses");
  std::set<int> ids(buses.begin(), buses.end());
  if (ids.size() != buses.size()) throw CaseError("duplicate bus ids");
  if (!ids.contains(slack_bus)) {
    throw CaseError("slack bus " + std::to_string(slack_bus) + " is not a declared bus");
  }
  for (std::size_t l = 0; l < lines.size(); ++l) {
    const Line& line = lines[l];
    const std::string tag = "line " + std::to_string(l);
    if (!ids.contains(line.from) || !ids.contains(line.to)) {
      throw CaseError(tag + " references an undeclared bus");
    }
    if (line.from == line.to) throw CaseError(tag + " is a self loop");
    if (!(line.susceptance > 0.0)) throw CaseError(tag + " needs susceptance > 0");
    if (!(line.limit_mw >= 0.0)) throw CaseError(tag + " needs a nonnegative limit");
  }
  for (std::size_t g = 0; g < generators.size(); ++g) {
    const Generator& gen = generators[g];
    const std::string tag = "generator " + std::to_string(g);
    if (!ids.contains(gen.bus)) throw CaseError(tag + " sits on an undeclared bus");
    if (gen.p_min < 0.0 || gen.p_min > gen.p_max) throw CaseError(tag + " needs 0 <= p_min <= p_max");
    if (!(gen.ramp_up > 0.0) || !(gen.ramp_down > 0.0)) throw CaseError(tag + " needs positive ramps");
    if (gen.min_up < 1 || gen.min_down < 1) throw CaseError(tag + " needs min up/down >= 1");
    if (gen.no_load_cost < 0.0 || gen.startup_cost < 0.0) {
      throw CaseError(tag + " has negative commitment costs");
    }
  }
  std::set<int> renewable_buses;
  for (std::size_t r = 0; r < renewables.size(); ++r) {
    const Renewable& ren = renewables[r];
    const std::string tag = "renewable " + std::to_string(r);
    if (!ids.contains(ren.bus)) throw CaseError(tag + " sits on an undeclared bus");
    if (!(ren.rated_mw >= 0.0)) throw CaseError(tag + " needs nonnegative rating");
    if (!renewable_buses.insert(ren.bus).second) {
      throw CaseError(tag + ": at most one renewable farm per bus");
    }
  }
}

double GridCase::installed_conventional_mw() const {
  double total = 0.0;
  for (const auto& g : generators) total += g.p_max;
  return total;
}

double GridCase::installed_renewable_mw() const {
  double total = 0.0;
  for (const auto& r : renewables) total += r.rated_mw;
  return total;
}

}  // namespace fpg::grid
