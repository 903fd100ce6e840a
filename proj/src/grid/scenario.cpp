#include "fpg/grid/scenario.hpp"

#include <string>
#include <vector>

namespace fpg::grid {

void Scenario::validate(const GridCase& grid) const {
  const auto n = static_cast<Eigen::Index>(grid.bus_count());
  if (load.rows() != n || forecast.rows() != n) {
    throw CaseError("scenario has " + std::to_string(load.rows()) + " bus rows, case has " +
                    std::to_string(n));
  }
  if (forecast.cols() != load.cols() || reserve_up.size() != load.cols() ||
      reserve_down.size() != load.cols()) {
    throw CaseError("scenario horizon mismatch between load, forecast and reserves");
  }
  if (load.cols() < 1) throw CaseError("scenario horizon is empty");
  if ((load.array() < 0.0).any()) throw CaseError("negative load");
  if ((forecast.array() < 0.0).any()) throw CaseError("negative renewable forecast");
  if ((reserve_up.array() < 0.0).any() || (reserve_down.array() < 0.0).any()) {
    throw CaseError("negative reserve requirement");
  }
  std::vector<bool> has_farm(grid.bus_count(), false);
  for (const auto& r : grid.renewables) has_farm[grid.bus_index(r.bus)] = true;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!has_farm[i] && (forecast.row(i).array() != 0.0).any()) {
      throw CaseError("renewable forecast at bus " + std::to_string(grid.buses[i]) +
                      " which hosts no farm");
    }
  }
}

Eigen::MatrixXd Scenario::farm_forecast(const GridCase& grid) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(grid.renewables.size()), load.cols());
  for (std::size_t r = 0; r < grid.renewables.size(); ++r) {
    out.row(static_cast<Eigen::Index>(r)) =
        forecast.row(static_cast<Eigen::Index>(grid.bus_index(grid.renewables[r].bus)));
  }
  return out;
}

Scenario make_scenario(const GridCase& grid, Eigen::MatrixXd load, Eigen::MatrixXd forecast,
                       double reserve_fraction) {
  Scenario s;
  s.load = std::move(load);
  s.forecast = std::move(forecast);
  s.reserve_up = reserve_fraction * s.load.colwise().sum().transpose();
  s.reserve_down = s.reserve_up;
  s.validate(grid);
  return s;
}

ad::Tensor assemble_input(const GridCase& grid, const Scenario& scenario) {
  if (scenario.bus_count() != grid.bus_count() ||
      static_cast<std::size_t>(scenario.forecast.rows()) != grid.bus_count() ||
      scenario.forecast.cols() != scenario.load.cols()) {
    throw CaseError("assemble_input: scenario has " + std::to_string(scenario.bus_count()) +
                    " buses, case has " + std::to_string(grid.bus_count()));
  }
  const std::size_t periods = scenario.horizon();
  const std::size_t nodes = grid.bus_count();
  ad::Tensor x({periods, 2, nodes}, 0.0);
  for (std::size_t t = 0; t < periods; ++t) {
    for (std::size_t i = 0; i < nodes; ++i) {
      const auto ii = static_cast<Eigen::Index>(i), tt = static_cast<Eigen::Index>(t);
      x.at(t, 0, i) = scenario.load(ii, tt);
      x.at(t, 1, i) = scenario.forecast(ii, tt);
    }
  }
  return x;
}

}  // namespace fpg::grid
