#include "fpg/grid/io.hpp"

#include <charconv>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <vector>

namespace fpg::grid {

using nlohmann::json;

std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, end);
}

std::string case_to_json(const GridCase& grid) {
  json j;
  j["name"] = grid.name;
  j["buses"] = grid.buses;
  j["slack"] = grid.slack_bus;
  j["lines"] = json::array();
  for (const auto& l : grid.lines) {
    j["lines"].push_back(
        {{"from", l.from}, {"to", l.to}, {"susceptance", l.susceptance}, {"limit_mw", l.limit_mw}});
  }
  j["generators"] = json::array();
  for (const auto& g : grid.generators) {
    j["generators"].push_back({{"bus", g.bus},
                               {"p_min", g.p_min},
                               {"p_max", g.p_max},
                               {"ramp_up", g.ramp_up},
                               {"ramp_down", g.ramp_down},
                               {"min_up", g.min_up},
                               {"min_down", g.min_down},
                               {"cost_slope", g.cost_slope},
                               {"no_load_cost", g.no_load_cost},
                               {"startup_cost", g.startup_cost}});
  }
  j["renewables"] = json::array();
  for (const auto& r : grid.renewables) {
    j["renewables"].push_back({{"bus", r.bus}, {"rated_mw", r.rated_mw}});
  }
  return j.dump(2) + "\n";
}

GridCase case_from_json(const std::string& text) {
  GridCase grid;
  try {
    const json j = json::parse(text);
    grid.name = j.value("name", std::string());
    grid.buses = j.at("buses").get<std::vector<int>>();
    grid.slack_bus = j.at("slack").get<int>();
    for (const auto& l : j.at("lines")) {
      grid.lines.push_back({l.at("from").get<int>(), l.at("to").get<int>(),
                            l.at("susceptance").get<double>(), l.at("limit_mw").get<double>()});
    }
    for (const auto& g : j.at("generators")) {
      Generator gen;
      gen.bus = g.at("bus").get<int>();
      gen.p_min = g.at("p_min").get<double>();
      gen.p_max = g.at("p_max").get<double>();
      gen.ramp_up = g.at("ramp_up").get<double>();
      gen.ramp_down = g.at("ramp_down").get<double>();
      gen.min_up = g.at("min_up").get<int>();
      gen.min_down = g.at("min_down").get<int>();
      gen.cost_slope = g.at("cost_slope").get<double>();
      gen.no_load_cost = g.value("no_load_cost", 0.0);
      gen.startup_cost = g.value("startup_cost", 0.0);
      grid.generators.push_back(gen);
    }
    for (const auto& r : j.value("renewables", json::array())) {
      grid.renewables.push_back({r.at("bus").get<int>(), r.at("rated_mw").get<double>()});
    }
  } catch (const json::exception& e) {
    throw CaseError(std::string("malformed case file: ") + e.what());
  }
  grid.validate();
  return grid;
}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CaseError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

double parse_number(const std::string& cell, const std::string& where) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw CaseError(where + ": bad number '" + cell + "'");
  }
  return v;
}

struct CsvRows {
  std::vector<std::vector<double>> rows;
};

CsvRows read_csv(std::istream& in, const std::string& header, const std::string& what) {
  std::string line;
  if (!std::getline(in, line)) throw CaseError(what + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header) throw CaseError(what + ": expected header '" + header + "'");
  const std::size_t width = split(header).size();
  CsvRows out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != width) throw CaseError(what + " row " + std::to_string(row) + ": wrong width");
    std::vector<double> values;
    for (const auto& c : cells) values.push_back(parse_number(c, what + " row " + std::to_string(row)));
    out.rows.push_back(std::move(values));
  }
  return out;
}

}  // namespace

void save_case(const GridCase& grid, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << case_to_json(grid);
}

GridCase load_case(const std::filesystem::path& path) { return case_from_json(read_file(path)); }

void write_scenario_csv(const GridCase& grid, const Scenario& scenario, std::ostream& out) {
  out << "bus,period,load_mw,forecast_mw\n";
  for (Eigen::Index i = 0; i < scenario.load.rows(); ++i)
    for (Eigen::Index t = 0; t < scenario.load.cols(); ++t)
      out << grid.buses[i] << ',' << t << ',' << format_double(scenario.load(i, t)) << ','
          << format_double(scenario.forecast(i, t)) << '\n';
}

void write_reserve_csv(const Scenario& scenario, std::ostream& out) {
  out << "period,r_up_mw,r_dn_mw\n";
  for (Eigen::Index t = 0; t < scenario.reserve_up.size(); ++t)
    out << t << ',' << format_double(scenario.reserve_up(t)) << ','
        << format_double(scenario.reserve_down(t)) << '\n';
}

Scenario read_scenario_csv(const GridCase& grid, std::istream& loads, std::istream& reserves) {
  const auto load_rows = read_csv(loads, "bus,period,load_mw,forecast_mw", "scenario csv");
  const auto res_rows = read_csv(reserves, "period,r_up_mw,r_dn_mw", "reserve csv");
  const auto periods = static_cast<Eigen::Index>(res_rows.rows.size());
  const auto n = static_cast<Eigen::Index>(grid.bus_count());
  if (static_cast<Eigen::Index>(load_rows.rows.size()) != n * periods) {
    throw CaseError("scenario csv: expected " + std::to_string(n * periods) + " rows, found " +
                    std::to_string(load_rows.rows.size()));
  }
  Scenario s;
  s.load = Eigen::MatrixXd::Zero(n, periods);
  s.forecast = Eigen::MatrixXd::Zero(n, periods);
  s.reserve_up = Eigen::VectorXd::Zero(periods);
  s.reserve_down = Eigen::VectorXd::Zero(periods);
  Eigen::MatrixXi seen = Eigen::MatrixXi::Zero(n, periods);
  for (const auto& r : load_rows.rows) {
    const auto i = static_cast<Eigen::Index>(grid.bus_index(static_cast<int>(r[0])));
    const auto t = static_cast<Eigen::Index>(r[1]);
    if (t < 0 || t >= periods || seen(i, t)++) throw CaseError("scenario csv: bad or repeated period");
    s.load(i, t) = r[2];
    s.forecast(i, t) = r[3];
  }
  for (const auto& r : res_rows.rows) {
    const auto t = static_cast<Eigen::Index>(r[0]);
    if (t < 0 || t >= periods) throw CaseError("reserve csv: period out of range");
    s.reserve_up(t) = r[1];
    s.reserve_down(t) = r[2];
  }
  s.validate(grid);
  return s;
}

void save_scenario(const GridCase& grid, const Scenario& scenario,
                   const std::filesystem::path& stem) {
  auto loads = open_out(stem.string() + ".csv");
  write_scenario_csv(grid, scenario, loads);
  auto res = open_out(stem.string() + "_reserve.csv");
  write_reserve_csv(scenario, res);
}

Scenario load_scenario(const GridCase& grid, const std::filesystem::path& stem) {
  std::ifstream loads(stem.string() + ".csv");
  std::ifstream res(stem.string() + "_reserve.csv");
  if (!loads || !res) throw CaseError("cannot open scenario " + stem.string());
  return read_scenario_csv(grid, loads, res);
}

}  // namespace fpg::grid
