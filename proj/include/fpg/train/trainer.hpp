#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "fpg/net/stgcn.hpp"
#include "fpg/train/losses.hpp"
#include "fpg/train/shots.hpp"

namespace fpg::train {

/// M0 is the branch-and-bound baseline; M1 imitates the labels only; M2
/// trains on the augmented Lagrangian without labels; Ours combines both.
enum class Method { M0, M1, M2, Ours };

const char* method_name(Method m);
/// Accepts m0, m1, m2, ours. Throws std::invalid_argument otherwise.
Method method_from_name(const std::string& name);

struct TrainConfig {
  Method method = Method::Ours;
  double learning_rate = 1e-3;
  std::size_t inner_steps = 50;
  std::size_t outer_iterations = 100;
  double rho = 10.0;
  double rho_growth = 1.0;
  double log_eps = 1e-4;
  std::size_t shots = 10;
  std::uint64_t seed = 7;
  /// Unlabeled scenarios per gradient step; 0 uses all of them.
  std::size_t batch_size = 0;
  /// Scenarios used for dual updates and the violation history; 0 = all.
  std::size_t monitor_size = 0;
  /// Global gradient-norm cap; 0 disables it.
  double grad_clip = 0.0;
  LossScales scales;

  void validate() const;
};

inline constexpr std::size_t kFamilyCount = uc::kAllFamilies.size();

/// Loss terms averaged over the inner steps of one outer iteration, plus
/// the mean per-family L1 violation of the reported decisions on the
/// monitor set at its end.
struct EpochRecord {
  std::size_t epoch = 0;
  double loss_total = 0.0;
  double loss_sup = 0.0;
  double loss_obj = 0.0;
  double loss_lin = 0.0;
  double loss_quad = 0.0;
  std::array<double, kFamilyCount> violation{};

  double violation_total() const;
};

struct TrainResult {
  net::ModelParams params;
  std::vector<EpochRecord> history;
  DualState duals;
  /// Multipliers after every outer iteration (first entry: initial state).
  std::vector<DualState> dual_trace;
  bool diverged = false;
  std::string divergence;
};

inline constexpr double kDivergenceLimit = 1e12;

using EpochCallback = std::function<void(const EpochRecord&, const net::ModelParams&)>;

/// Alternates `inner_steps` gradient-descent steps with one dual update per
/// outer iteration. On a non-finite or exploding loss the run stops and
/// returns the last parameters that produced a finite loss with
/// `diverged` set.
TrainResult train(const net::NetContext& context, const std::vector<grid::Scenario>& unlabeled,
                  const FewShotSet& shots, const uc::UcParams& params, const TrainConfig& config,
                  net::ModelParams initial, const EpochCallback& on_epoch = {});

/// Loss terms of one step on the given model (no update). Used by tests and
/// the ablation bookkeeping checks.
struct StepLoss {
  double total = 0.0, sup = 0.0, obj = 0.0, lin = 0.0, quad = 0.0;
};
StepLoss evaluate_loss(const net::NetContext& context, const std::vector<grid::Scenario>& batch,
                       const FewShotSet& shots, const uc::UcParams& params,
                       const TrainConfig& config, const DualState& duals,
                       const net::ModelParams& model);

/// Residuals of the reported decision (S rounded, P_G zeroed where off).
uc::ConstraintResiduals reported_residuals(const net::ModelParams& model,
                                           const net::NetContext& context,
                                           const grid::Scenario& scenario,
                                           const uc::UcParams& params);

/// epoch,loss_total,loss_sup,loss_lin,loss_quad,viol_balance,viol_reserve,
/// viol_line,viol_bounds,viol_ramp,viol_updown
void write_history_csv(std::ostream& out, const std::vector<EpochRecord>& history);

}  // namespace fpg::train
