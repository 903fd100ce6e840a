#pragma once

#include <Eigen/Dense>
#include <array>
#include <string_view>

#include "fpg/uc/decision.hpp"

namespace fpg::uc {

enum class Group {
  Balance,
  ReserveUp,
  ReserveDown,
  LineUpper,
  LineLower,
  GenUpper,
  GenLower,
  RenUpper,
  RenLower,
  RampUp,
  RampDown,
  MinUp,
  MinDown,
};

inline constexpr std::array<Group, 13> kAllGroups = {
    Group::Balance,  Group::ReserveUp, Group::ReserveDown, Group::LineUpper, Group::LineLower,
    Group::GenUpper, Group::GenLower,  Group::RenUpper,    Group::RenLower,  Group::RampUp,
    Group::RampDown, Group::MinUp,     Group::MinDown};

std::string_view group_name(Group g);
Group group_from_name(std::string_view name);

/// True for groups whose expressions contain the commitment S.
bool binary_included(Group g);

/// Coarse families used in training histories.
enum class Family { Balance, Reserve, Line, Bounds, Ramp, UpDown };
inline constexpr std::array<Family, 6> kAllFamilies = {Family::Balance, Family::Reserve,
                                                       Family::Line,    Family::Bounds,
                                                       Family::Ramp,    Family::UpDown};
Family family_of(Group g);
std::string_view family_name(Family f);

/// Balance is signed; every other entry is a violation magnitude >= 0.
/// Row-vector groups (reserve) are stored as 1 x period.
struct ConstraintResiduals {
  Eigen::MatrixXd balance;       // bus x period
  Eigen::MatrixXd reserve_up;    // 1 x period
  Eigen::MatrixXd reserve_down;  // 1 x period
  Eigen::MatrixXd line_upper;    // line x period
  Eigen::MatrixXd line_lower;
  Eigen::MatrixXd gen_upper;     // generator x period
  Eigen::MatrixXd gen_lower;
  Eigen::MatrixXd ren_upper;     // renewable x period
  Eigen::MatrixXd ren_lower;
  Eigen::MatrixXd ramp_up;       // generator x period
  Eigen::MatrixXd ramp_down;
  Eigen::MatrixXd min_up;        // generator x period
  Eigen::MatrixXd min_down;

  const Eigen::MatrixXd& operator[](Group g) const;
  Eigen::MatrixXd& operator[](Group g);
};

double objective(const UcDecision& dec, const grid::GridCase& grid,
                 const grid::Scenario& scenario, const UcParams& params);

/// Flows B_ij (delta_i - delta_j) per line and period.
Eigen::MatrixXd line_flows(const UcDecision& dec, const grid::GridCase& grid);

Eigen::MatrixXd balance_residuals(const UcDecision& dec, const grid::GridCase& grid,
                                  const grid::Scenario& scenario);

struct SidedViolation {
  Eigen::MatrixXd upper;
  Eigen::MatrixXd lower;
};

/// upper = reserve-up shortfall, lower = reserve-down shortfall (1 x period).
SidedViolation reserve_residuals(const UcDecision& dec, const grid::GridCase& grid,
                                 const grid::Scenario& scenario);
SidedViolation line_flow_residuals(const UcDecision& dec, const grid::GridCase& grid);
SidedViolation generator_bound_residuals(const UcDecision& dec, const grid::GridCase& grid);
SidedViolation renewable_bound_residuals(const UcDecision& dec, const grid::GridCase& grid,
                                         const grid::Scenario& scenario);
SidedViolation ramp_residuals(const UcDecision& dec, const grid::GridCase& grid,
                              const UcParams& params);

/// Reconstructed X^on / X^off (generator x period).
struct Counters {
  Eigen::MatrixXd on;
  Eigen::MatrixXd off;
};
Counters commitment_counters(const Eigen::MatrixXd& commitment, const UcParams& params);

/// upper = minimum-up violation, lower = minimum-down violation.
SidedViolation min_up_down_residuals(const Eigen::MatrixXd& commitment,
                                     const grid::GridCase& grid, const UcParams& params);

ConstraintResiduals all_residuals(const UcDecision& dec, const grid::GridCase& grid,
                                  const grid::Scenario& scenario, const UcParams& params);

}  // namespace fpg::uc
