#pragma once

#include <Eigen/Dense>
#include <cstddef>

#include "fpg/ad/tensor.hpp"
#include "fpg/grid/grid_case.hpp"

namespace fpg::grid {

/// Per-bus load and renewable forecast over the horizon.
struct Scenario {
  Eigen::MatrixXd load;        // bus x period, MW
  Eigen::MatrixXd forecast;    // bus x period, MW; zero off renewable buses
  Eigen::VectorXd reserve_up;  // period, MW
  Eigen::VectorXd reserve_down;

  std::size_t horizon() const noexcept { return static_cast<std::size_t>(load.cols()); }
  std::size_t bus_count() const noexcept { return static_cast<std::size_t>(load.rows()); }

  /// Throws CaseError when shapes disagree with the case or values are
  /// negative / misplaced.
  void validate(const GridCase& grid) const;

  /// Forecast per renewable farm (farm x period).
  Eigen::MatrixXd farm_forecast(const GridCase& grid) const;

  double total_load() const { return load.sum(); }
};

/// Zero scenario with reserves set to `reserve_fraction` of total load.
Scenario make_scenario(const GridCase& grid, Eigen::MatrixXd load, Eigen::MatrixXd forecast,
                       double reserve_fraction);

/// Network input tensor [period x 2 x bus]: channel 0 load, channel 1
/// renewable forecast, zero padding where a bus has neither.
ad::Tensor assemble_input(const GridCase& grid, const Scenario& scenario);

}  // namespace fpg::grid
