#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "fpg/harness/metrics.hpp"
#include "fpg/harness/report.hpp"
#include "fpg/harness/scenario_gen.hpp"
#include "fpg/lp/milp.hpp"
#include "fpg/net/stgcn.hpp"
#include "fpg/train/trainer.hpp"

namespace fpg::harness {

/// Bad or inconsistent configuration (CLI exit code 3).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A MILP without an incumbent, or a label that fails the gate (exit 2).
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Training stopped on a non-finite or exploding loss (exit 4).
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  /// Built-in case name (toy3, ieee30) or a case JSON path.
  std::string case_source = "toy3";
  /// Optional scenario directory; when empty scenarios are generated.
  std::filesystem::path scenarios;
  std::filesystem::path out = "out";
  std::vector<train::Method> methods{train::Method::M0, train::Method::M1, train::Method::M2,
                                     train::Method::Ours};
  std::uint64_t seed = 1;
  std::size_t train_count = 1000;
  std::size_t test_count = 200;
  ScenarioKnobs knobs;
  train::TrainConfig train;
  net::NetworkConfig network;
  /// Branch-and-bound settings for labels and the M0 baseline.
  lp::MilpOptions milp;
  bool train_enabled = true;
  /// Skip the held-out evaluation (training histories only).
  bool evaluate = true;
  /// Checkpoints are read from here when training is disabled.
  std::filesystem::path checkpoints;

  RunConfig();
  /// Throws ConfigError.
  void validate() const;
};

/// Reads a JSON config; unknown keys are rejected. Keys mirror RunConfig,
/// with "train", "network", "knobs" and "milp" as nested objects.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);
std::string run_config_to_json(const RunConfig& config);

/// Seed for one method, derived from the run seed.
std::uint64_t method_seed(std::uint64_t seed, train::Method method);

struct ExperimentReport {
  std::vector<MetricsRow> metrics;
  /// Mean over scenarios of |E_cost|, by method name.
  std::map<std::string, double> abs_cost;
  std::map<train::Method, std::vector<train::EpochRecord>> histories;
  std::map<train::Method, std::vector<train::DualState>> dual_traces;
  ViolationTable violations;
  train::FewShotSet shots;
  std::vector<std::string> written;  // output files in write order
};

/// Trains (or loads) every learned method on identical splits, evaluates
/// all methods on the held-out set against M0 and writes metrics.csv,
/// timing.csv, metrics.md, violation.csv, violation.svg, history_<m>.csv,
/// model_<m>.ckpt and labels.txt under config.out.
ExperimentReport run_experiment(const RunConfig& config);

grid::GridCase resolve_case(const std::string& source);

}  // namespace fpg::harness
