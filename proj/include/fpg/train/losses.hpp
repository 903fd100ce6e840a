#pragma once

#include <array>
#include <cstddef>

#include "fpg/ad/ops.hpp"
#include "fpg/grid/grid_case.hpp"
#include "fpg/grid/scenario.hpp"
#include "fpg/net/stgcn.hpp"
#include "fpg/uc/decision.hpp"
#include "fpg/uc/residuals.hpp"

namespace fpg::train {

inline constexpr std::size_t kGroupCount = uc::kAllGroups.size();

/// Unit conversions applied before residuals and cost enter the loss.
struct LossScales {
  double power_base_mw = 100.0;  // MW quantities are divided by this
  double cost_base = 1000.0;     // $ are divided by this
};

/// Decision tensors on a tape, rows are units, columns periods.
struct DecisionVars {
  ad::Var commitment;  // S
  ad::Var dispatch;    // P_G (raw, not multiplied by S)
  ad::Var renewable;   // P_R
  ad::Var angle;       // delta
};

DecisionVars decision_vars(const net::Decision& d);
/// Constants holding a fixed decision (used for cross-checks).
DecisionVars constant_decision(ad::Tape& tape, const uc::UcDecision& d);

/// Per-group residual tensors matching uc::ConstraintResiduals shapes.
using ResidualVars = std::array<ad::Var, kGroupCount>;

/// Differentiable versions of the uc-core residuals and objective. MW groups
/// and the objective are divided by the scales; the minimum up/down groups
/// stay in periods.
struct ResidualGraph {
  ResidualVars residuals;
  ad::Var objective;
};

ResidualGraph residual_graph(ad::Tape& tape, const DecisionVars& d, const grid::GridCase& grid,
                             const grid::Scenario& scenario, const uc::UcParams& params,
                             const LossScales& scales);

/// Multipliers per residual group plus the penalty weight.
struct DualState {
  std::array<ad::Tensor, kGroupCount> lambda;
  double rho = 10.0;

  /// Zero multipliers shaped like the groups of `grid` over `periods`.
  static DualState zeros(const grid::GridCase& grid, std::size_t periods, double rho);
  const ad::Tensor& operator[](uc::Group g) const { return lambda[static_cast<std::size_t>(g)]; }
  ad::Tensor& operator[](uc::Group g) { return lambda[static_cast<std::size_t>(g)]; }
};

/// ||P_G - P^_G||^2 + ||delta - delta^||^2
///   - sum[S^ log(1/2 + s~c) + (1 - S^) log(1/2 - s~c)]
/// with s~c = tanh(s) clamped into [-1/2 + eps, 1/2 - eps]. Powers are in
/// units of scales.power_base_mw.
ad::Var supervised_loss(ad::Tape& tape, const net::Decision& d, const uc::UcDecision& label,
                        double eps, const LossScales& scales);

struct AlmTerms {
  ad::Var linear;     // sum lambda . |f|
  ad::Var quadratic;  // rho / 2 * sum f^2
  ad::Var total;      // objective + linear + quadratic
};

/// Augmented Lagrangian of one sample. Balance enters the linear term by
/// magnitude and the quadratic term signed; the other groups are already
/// hinged.
AlmTerms alm_loss(const ResidualVars& residuals, ad::Var objective, const DualState& duals);

/// lambda += rho * |f| elementwise; rho *= growth.
void dual_update(DualState& duals, const std::array<ad::Tensor, kGroupCount>& magnitude,
                 double growth = 1.0);

/// Sum over groups of the per-family L1 norms of a residual set.
std::array<double, uc::kAllFamilies.size()> family_l1(const uc::ConstraintResiduals& r);

}  // namespace fpg::train
