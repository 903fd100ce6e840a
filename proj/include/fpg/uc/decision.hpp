#pragma once

#include <Eigen/Dense>

#include "fpg/grid/grid_case.hpp"
#include "fpg/grid/scenario.hpp"

namespace fpg::uc {

/// Candidate UC decision. Rows follow the order of generators, renewables
/// and buses in the case; columns are periods.
struct UcDecision {
  Eigen::MatrixXd commitment;  // S, 0/1
  Eigen::MatrixXd dispatch;    // P_G, MW
  Eigen::MatrixXd renewable;   // P_R, MW
  Eigen::MatrixXd angle;       // delta, rad; slack row zero

  /// All zeros with the shapes implied by case and horizon.
  static UcDecision zeros(const grid::GridCase& grid, std::size_t horizon);

  std::size_t horizon() const noexcept { return static_cast<std::size_t>(commitment.cols()); }

  /// Throws grid::CaseError on shape mismatch, non-binary S or a nonzero
  /// slack angle.
  void validate(const grid::GridCase& grid, std::size_t horizon) const;
};

/// State of each generator in the period before the horizon.
struct InitialState {
  double commitment = 0.0;
  double dispatch = 0.0;
  int on_periods = 0;   // X^on_{-1}
  int off_periods = 0;  // X^off_{-1}
};

struct UcParams {
  double curtailment_price = 40.0;  // $/MWh
  std::vector<InitialState> initial;

  /// Every unit off for at least its minimum down time, zero output.
  static UcParams defaults(const grid::GridCase& grid);

  void validate(const grid::GridCase& grid) const;
};

}  // namespace fpg::uc
