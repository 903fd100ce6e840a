#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

#include "fpg/ad/tensor.hpp"
#include "fpg/grid/grid_case.hpp"

namespace fpg::grid {

class DisconnectedGraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Power iteration hit its iteration cap; carries the last estimate.
class EigenNonConvergence : public std::runtime_error {
 public:
  EigenNonConvergence(double last_estimate, int iterations);
  double last_estimate() const noexcept { return last_estimate_; }

 private:
  double last_estimate_;
};

/// Unweighted graph of the grid and its spectral scaling.
struct GraphMatrices {
  Eigen::MatrixXd adjacency;  // 0/1, parallel lines collapse
  Eigen::MatrixXd degree;     // diagonal
  Eigen::MatrixXd laplacian;  // degree - adjacency
  double lambda_max = 0.0;
  Eigen::MatrixXd scaled_laplacian;  // 2 L / lambda_max - I

  ad::Tensor scaled_laplacian_tensor() const;
};

/// Throws DisconnectedGraphError naming the buses of the first component
/// that is not reachable from the first bus.
GraphMatrices build_graph(const GridCase& grid);

struct PowerIterationOptions {
  double relative_tolerance = 1e-10;
  int max_iterations = 10000;
};

/// Largest eigenvalue of a symmetric positive semidefinite matrix by power
/// iteration from the fixed start vectors 1 + 0.1 r and 1 + 0.1 r + 0.05 r^2,
/// r = (i + 1) / n.
double largest_eigenvalue(const Eigen::MatrixXd& matrix, PowerIterationOptions options = {});

// DC network matrices. Angles in rad, flows and injections in MW.

/// Susceptance-weighted Laplacian: (B theta)_i = sum_j B_ij (theta_i - theta_j).
Eigen::MatrixXd susceptance_laplacian(const GridCase& grid);
/// [line x bus] map from angles to line flows.
Eigen::MatrixXd flow_matrix(const GridCase& grid);
/// [line x bus] power transfer distribution factors with the slack as
/// reference (slack column is zero).
Eigen::MatrixXd ptdf(const GridCase& grid);
/// Angles (slack = 0) producing the given balanced injections [bus x period].
Eigen::MatrixXd angles_from_injections(const GridCase& grid, const Eigen::MatrixXd& injections);

}  // namespace fpg::grid
