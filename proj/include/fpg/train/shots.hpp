#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fpg/grid/scenario.hpp"
#include "fpg/lp/uc_milp.hpp"
#include "fpg/uc/decision.hpp"

namespace fpg::train {

struct KMeansOptions {
  std::size_t max_iterations = 100;
  double relative_tolerance = 1e-8;
};

struct KMeansResult {
  Eigen::MatrixXd centroids;             // k x dim
  std::vector<std::size_t> assignment;   // per point
  double inertia = 0.0;
  std::size_t iterations = 0;
};

/// Lloyd iterations from k-means++ seeding. A cluster that empties is
/// re-seeded at the point farthest from its current centroid.
KMeansResult kmeans(const Eigen::MatrixXd& points, std::size_t k, std::uint64_t seed,
                    KMeansOptions options = {});

/// Flattened load || forecast vector of one scenario.
Eigen::VectorXd scenario_features(const grid::Scenario& scenario);

/// Indices of the k scenarios nearest to the k-means centroids (distinct,
/// in cluster order).
std::vector<std::size_t> select_shots(const std::vector<grid::Scenario>& scenarios,
                                      std::size_t k, std::uint64_t seed);

class LabelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FewShotSet {
  std::vector<std::size_t> indices;  // into the training scenarios
  std::vector<grid::Scenario> scenarios;
  std::vector<uc::UcDecision> labels;
  std::vector<std::string> provenance;  // one line per label

  std::size_t size() const noexcept { return labels.size(); }
};

/// Solves each selected scenario with branch and bound and keeps the
/// decision. Throws LabelError when a solve yields no incumbent or the
/// label fails the feasibility check at `tolerance`.
FewShotSet label_shots(const grid::GridCase& grid, const std::vector<grid::Scenario>& scenarios,
                       const std::vector<std::size_t>& indices, const uc::UcParams& params,
                       const lp::MilpOptions& options, double tolerance = 1e-6);

}  // namespace fpg::train
