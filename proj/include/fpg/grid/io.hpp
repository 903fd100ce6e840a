#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "fpg/grid/grid_case.hpp"
#include "fpg/grid/scenario.hpp"

namespace fpg::grid {

// Case files are JSON with sections buses, lines, generators, renewables and
// slack. Parse failures and invariant violations throw CaseError.
std::string case_to_json(const GridCase& grid);
GridCase case_from_json(const std::string& text);
void save_case(const GridCase& grid, const std::filesystem::path& path);
GridCase load_case(const std::filesystem::path& path);

// Scenario CSV: bus,period,load_mw,forecast_mw (bus ids, periods from 0).
// Reserve CSV: period,r_up_mw,r_dn_mw.
void write_scenario_csv(const GridCase& grid, const Scenario& scenario, std::ostream& out);
void write_reserve_csv(const Scenario& scenario, std::ostream& out);
Scenario read_scenario_csv(const GridCase& grid, std::istream& loads, std::istream& reserves);

/// Writes `<stem>.csv` and `<stem>_reserve.csv`.
void save_scenario(const GridCase& grid, const Scenario& scenario,
                   const std::filesystem::path& stem);
Scenario load_scenario(const GridCase& grid, const std::filesystem::path& stem);

/// Shortest round-trip representation of a double.
std::string format_double(double value);

}  // namespace fpg::grid
