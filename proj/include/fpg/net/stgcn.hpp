#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fpg/ad/checkpoint.hpp"
#include "fpg/ad/ops.hpp"
#include "fpg/grid/graph.hpp"
#include "fpg/grid/grid_case.hpp"
#include "fpg/grid/scenario.hpp"
#include "fpg/uc/decision.hpp"

namespace fpg::net {

struct NetworkConfig {
  std::size_t layers = 2;
  std::size_t cheb_order = 3;
  std::size_t kernel_width = 3;
  /// channels[0] is the input width, channels[l + 1] the output of block l.
  std::vector<std::size_t> channels{2, 32, 64};
  std::uint64_t seed = 42;
  /// Inputs are divided by this many MW before the first block.
  double input_base_mw = 100.0;
  /// Multiplies the linear angle head.
  double angle_scale = 0.1;

  /// Throws std::invalid_argument on the first bad field.
  void validate() const;
};

/// Where every generator and renewable farm reads its head output: node
/// index plus slot (rank among the units at the same bus).
class UnitLayout {
 public:
  explicit UnitLayout(const grid::GridCase& grid);

  std::size_t nodes() const noexcept { return nodes_; }
  std::size_t generator_slots() const noexcept { return gen_slots_; }
  std::size_t renewable_slots() const noexcept { return ren_slots_; }
  std::size_t generators() const noexcept { return gen_node_.size(); }
  std::size_t renewables() const noexcept { return ren_node_.size(); }
  std::size_t slack() const noexcept { return slack_; }
  std::size_t generator_node(std::size_t g) const { return gen_node_.at(g); }
  std::size_t generator_slot(std::size_t g) const { return gen_slot_.at(g); }
  std::size_t renewable_node(std::size_t r) const { return ren_node_.at(r); }
  std::size_t renewable_slot(std::size_t r) const { return ren_slot_.at(r); }

  /// [slots x nodes] masks: 1 where a unit sits in that slot.
  ad::Tensor generator_mask() const;
  ad::Tensor renewable_mask() const;
  /// [1 x nodes]: 0 at the slack bus, 1 elsewhere.
  ad::Tensor angle_mask() const;

  /// [slots * nodes x units] 0/1 selection used to gather unit rows.
  ad::Tensor generator_selection() const;
  ad::Tensor renewable_selection() const;

 private:
  std::size_t nodes_ = 0, gen_slots_ = 0, ren_slots_ = 0, slack_ = 0;
  std::vector<std::size_t> gen_node_, gen_slot_, ren_node_, ren_slot_;
};

/// Parameters plus the configuration and head widths they were built for.
struct ModelParams {
  NetworkConfig config;
  std::size_t generator_slots = 1;
  std::size_t renewable_slots = 1;
  ad::ParameterSet tensors;

  const ad::Tensor& get(const std::string& name) const;
  ad::Tensor& get(const std::string& name);
  std::size_t parameter_count() const;
};

/// Glorot-uniform weights, zero biases, deterministic in `seed`.
ModelParams init_params(const NetworkConfig& config, const UnitLayout& layout,
                        std::uint64_t seed);
inline ModelParams init_params(const NetworkConfig& config, const UnitLayout& layout) {
  return init_params(config, layout, config.seed);
}

/// Parameters bound to a tape as variables (or constants for inference).
struct BoundParams {
  std::vector<ad::Var> vars;  // same order as ModelParams::tensors
};
BoundParams bind(ad::Tape& tape, const ModelParams& params, bool trainable);

/// Masked head outputs at node level, each [period x slots x node].
struct NodeOutputs {
  ad::Var dispatch_logit;
  ad::Var status;
  ad::Var angle;  // one slot, slack column zero
  ad::Var renewable_logit;
};

/// Unit-level outputs, rows are units, columns periods.
struct RawOutputs {
  ad::Var dispatch_logit;  // generator x period
  ad::Var dispatch;        // P_min + (P_max - P_min) * sigmoid(logit)
  ad::Var status;          // s, unbounded
  ad::Var angle;           // bus x period, radians, slack row zero
  ad::Var renewable;       // farm x period, forecast * sigmoid(logit)
};

struct Decision {
  RawOutputs raw;
  ad::Var status_tanh;  // tanh(s)
  ad::Var commitment;   // S in {0, 1}, straight-through gradient
};

/// Constant per-case context shared by every forward pass.
class NetContext {
 public:
  NetContext(const grid::GridCase& grid, const grid::GraphMatrices& graph);

  const grid::GridCase& grid() const noexcept { return *grid_; }
  const UnitLayout& layout() const noexcept { return layout_; }
  const ad::Tensor& scaled_laplacian() const noexcept { return laplacian_; }
  const ad::Tensor& generator_mask() const noexcept { return gen_mask_; }
  const ad::Tensor& renewable_mask() const noexcept { return ren_mask_; }
  const ad::Tensor& angle_mask() const noexcept { return angle_mask_; }
  const ad::Tensor& generator_selection() const noexcept { return gen_select_; }
  const ad::Tensor& renewable_selection() const noexcept { return ren_select_; }

 private:
  const grid::GridCase* grid_;
  UnitLayout layout_;
  ad::Tensor laplacian_;
  ad::Tensor gen_mask_, ren_mask_, angle_mask_, gen_select_, ren_select_;
};

/// Spatio-temporal trunk plus masked heads on an input tensor
/// [period x channel x node].
NodeOutputs forward_nodes(ad::Tape& tape, const BoundParams& bound, const ModelParams& params,
                          const ad::Tensor& input, const ad::Tensor& scaled_laplacian,
                          const ad::Tensor& generator_mask, const ad::Tensor& renewable_mask,
                          const ad::Tensor& angle_mask);

RawOutputs forward(ad::Tape& tape, const BoundParams& bound, const ModelParams& params,
                   const NetContext& context, const grid::Scenario& scenario);

Decision decide(ad::Tape& tape, const BoundParams& bound, const ModelParams& params,
                const NetContext& context, const grid::Scenario& scenario);

/// Reporting form of a decision: S rounded, P_G zeroed where S = 0.
uc::UcDecision to_uc_decision(const Decision& decision);

/// Convenience inference on a fresh tape.
uc::UcDecision infer(const ModelParams& params, const NetContext& context,
                     const grid::Scenario& scenario);

void save_model(const std::filesystem::path& path, const ModelParams& params);
/// Rebuilds the configuration from the checkpoint's shapes plus the stored
/// config record.
ModelParams load_model(const std::filesystem::path& path);

/// Plain-text description of the config, seed and free-form provenance lines.
void write_model_card(const std::filesystem::path& path, const ModelParams& params,
                      const std::vector<std::string>& provenance);

}  // namespace fpg::net
