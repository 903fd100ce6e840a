#include "fpg/grid/graph.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>
#include <vector>

namespace fpg::grid {

EigenNonConvergence::EigenNonConvergence(double last_estimate, int iterations)
    : std::runtime_error("power iteration did not converge after " + std::to_string(iterations) +
                         " iterations (last estimate " + std::to_string(last_estimate) + ")"),
      last_estimate_(last_estimate) {}

ad::Tensor GraphMatrices::scaled_laplacian_tensor() const {
  const auto n = static_cast<std::size_t>(scaled_laplacian.rows());
  ad::Tensor t({n, n});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      t.at(i, j) = scaled_laplacian(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return t;
}

namespace {

void require_connected(const GridCase& grid, const Eigen::MatrixXd& adjacency) {
  const auto n = adjacency.rows();
  std::vector<int> component(static_cast<std::size_t>(n), -1);
  int components = 0;
  for (Eigen::Index start = 0; start < n; ++start) {
    if (component[start] >= 0) continue;
    std::queue<Eigen::Index> frontier;
    frontier.push(start);
    component[start] = components;
    while (!frontier.empty()) {
      const auto i = frontier.front();
      frontier.pop();
      for (Eigen::Index j = 0; j < n; ++j) {
        if (adjacency(i, j) != 0.0 && component[j] < 0) {
          component[j] = components;
          frontier.push(j);
        }
      }
    }
    ++components;
  }
  if (components == 1) return;
  std::ostringstream msg;
  msg << "grid graph is disconnected; isolated component buses:";
  for (Eigen::Index i = 0; i < n; ++i)
    if (component[i] == 1) msg << ' ' << grid.buses[i];
  throw DisconnectedGraphError(msg.str());
}

}  // namespace

GraphMatrices build_graph(const GridCase& grid) {
  grid.validate();
  const auto n = static_cast<Eigen::Index>(grid.bus_count());
  GraphMatrices g;
  g.adjacency = Eigen::MatrixXd::Zero(n, n);
  for (const auto& line : grid.lines) {
    const auto i = static_cast<Eigen::Index>(grid.bus_index(line.from));
    const auto j = static_cast<Eigen::Index>(grid.bus_index(line.to));
    g.adjacency(i, j) = g.adjacency(j, i) = 1.0;
  }
  require_connected(grid, g.adjacency);
  g.degree = g.adjacency.rowwise().sum().asDiagonal();
  g.laplacian = g.degree - g.adjacency;
  g.lambda_max = largest_eigenvalue(g.laplacian);
  if (g.lambda_max <= 0.0) {
    // single bus: no edges, keep the scaled operator at -I
    g.scaled_laplacian = -Eigen::MatrixXd::Identity(n, n);
  } else {
    g.scaled_laplacian = 2.0 * g.laplacian / g.lambda_max - Eigen::MatrixXd::Identity(n, n);
  }
  return g;
}

namespace {

double power_iteration(const Eigen::MatrixXd& matrix, Eigen::VectorXd v,
                       const PowerIterationOptions& options) {
  v.normalize();
  double estimate = 0.0;
  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    const Eigen::VectorXd w = matrix * v;
    const double next = v.dot(w);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    // The residual guard keeps a slowly moving Rayleigh quotient from
    // stopping early when the top two eigenvalues are close.
    const double residual = (w - next * v).norm();
    const bool settled = std::abs(next - estimate) <= options.relative_tolerance * std::abs(next);
    estimate = next;
    if (iter > 1 && settled && residual <= 1e-7 * std::abs(next)) return estimate;
    v = w / norm;
  }
  throw EigenNonConvergence(estimate, options.max_iterations);
}

}  // namespace

double largest_eigenvalue(const Eigen::MatrixXd& matrix, PowerIterationOptions options) {
  if (matrix.rows() != matrix.cols() || matrix.rows() == 0) {
    throw std::invalid_argument("largest_eigenvalue: expected a non-empty square matrix");
  }
  const auto n = matrix.rows();
  // A linear start is orthogonal to every eigenvector that is symmetric
  // about the middle index (the path graph's top mode is one), so a second
  // start with a quadratic term runs as well.
  Eigen::VectorXd linear(n), quadratic(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = static_cast<double>(i + 1) / static_cast<double>(n);
    linear(i) = 1.0 + 0.1 * r;
    quadratic(i) = 1.0 + 0.1 * r + 0.05 * r * r;
  }
  return std::max(power_iteration(matrix, linear, options),
                  power_iteration(matrix, quadratic, options));
}

Eigen::MatrixXd susceptance_laplacian(const GridCase& grid) {
  const auto n = static_cast<Eigen::Index>(grid.bus_count());
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
  for (const auto& line : grid.lines) {
    const auto i = static_cast<Eigen::Index>(grid.bus_index(line.from));
    const auto j = static_cast<Eigen::Index>(grid.bus_index(line.to));
    b(i, i) += line.susceptance;
    b(j, j) += line.susceptance;
    b(i, j) -= line.susceptance;
    b(j, i) -= line.susceptance;
  }
  return b;
}

Eigen::MatrixXd flow_matrix(const GridCase& grid) {
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(grid.lines.size()),
                                            static_cast<Eigen::Index>(grid.bus_count()));
  for (std::size_t l = 0; l < grid.lines.size(); ++l) {
    const auto& line = grid.lines[l];
    const auto row = static_cast<Eigen::Index>(l);
    f(row, static_cast<Eigen::Index>(grid.bus_index(line.from))) += line.susceptance;
    f(row, static_cast<Eigen::Index>(grid.bus_index(line.to))) -= line.susceptance;
  }
  return f;
}

namespace {

// Inverse of the susceptance Laplacian with the slack row/column removed,
// embedded back into bus coordinates (slack row/column zero).
Eigen::MatrixXd reduced_inverse(const GridCase& grid) {
  const auto n = static_cast<Eigen::Index>(grid.bus_count());
  const auto slack = static_cast<Eigen::Index>(grid.slack_index());
  const Eigen::MatrixXd b = susceptance_laplacian(grid);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < n; ++i)
    if (i != slack) keep.push_back(i);
  const auto m = static_cast<Eigen::Index>(keep.size());
  Eigen::MatrixXd reduced(m, m);
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index c = 0; c < m; ++c) reduced(a, c) = b(keep[a], keep[c]);
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(n, n);
  if (m == 0) return full;
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(reduced);
  if (!lu.isInvertible()) throw DisconnectedGraphError("susceptance matrix is singular");
  const Eigen::MatrixXd inv = lu.inverse();
  for (Eigen::Index a = 0; a < m; ++a)
    for (Eigen::Index c = 0; c < m; ++c) full(keep[a], keep[c]) = inv(a, c);
  return full;
}

}  // namespace

Eigen::MatrixXd ptdf(const GridCase& grid) { return flow_matrix(grid) * reduced_inverse(grid); }

Eigen::MatrixXd angles_from_injections(const GridCase& grid, const Eigen::MatrixXd& injections) {
  return reduced_inverse(grid) * injections;
}

}  // namespace fpg::grid
