#include "fpg/train/shots.hpp"

#include <limits>
#include <random>

#include "fpg/grid/io.hpp"
#include "fpg/uc/report.hpp"

namespace fpg::train {

namespace {

double nearest(const Eigen::MatrixXd& centroids, std::size_t count, const Eigen::VectorXd& x,
               std::size_t* which) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < count; ++c) {
    const double d = (centroids.row(static_cast<Eigen::Index>(c)).transpose() - x).squaredNorm();
    if (d < best) {
      best = d;
      if (which) *which = c;
    }
  }
  return best;
}

}  // namespace

KMeansResult kmeans(const Eigen::MatrixXd& points, std::size_t k, std::uint64_t seed,
                    KMeansOptions options) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (k == 0 || k > n) {
    throw std::invalid_argument("kmeans: k = " + std::to_string(k) + " with " + std::to_string(n) +
                                " points");
  }
  std::mt19937_64 rng(seed);
  KMeansResult out;
  out.centroids.resize(static_cast<Eigen::Index>(k), points.cols());
  out.assignment.assign(n, 0);
  auto point = [&](std::size_t i) -> Eigen::VectorXd {
    return points.row(static_cast<Eigen::Index>(i)).transpose();
  };

  // k-means++ seeding.
  std::uniform_int_distribution<std::size_t> first(0, n - 1);
  out.centroids.row(0) = points.row(static_cast<Eigen::Index>(first(rng)));
  std::vector<double> d2(n);
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = nearest(out.centroids, c, point(i), nullptr);
      total += d2[i];
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      const double r = std::uniform_real_distribution<double>(0.0, total)(rng);
      double acc = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (r < acc) {
          pick = i;
          break;
        }
      }
    } else {
      pick = c;  // every point coincides with a centroid
    }
    out.centroids.row(static_cast<Eigen::Index>(c)) = points.row(static_cast<Eigen::Index>(pick));
  }

  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    out.iterations = it + 1;
    out.inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t c = 0;
      d2[i] = nearest(out.centroids, k, point(i), &c);
      out.assignment[i] = c;
      out.inertia += d2[i];
    }
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), points.cols());
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums.row(static_cast<Eigen::Index>(out.assignment[i])) += points.row(static_cast<Eigen::Index>(i));
      ++counts[out.assignment[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      const auto ci = static_cast<Eigen::Index>(c);
      if (counts[c] > 0) {
        out.centroids.row(ci) = sums.row(ci) / static_cast<double>(counts[c]);
        continue;
      }
      std::size_t far = 0;
      for (std::size_t i = 1; i < n; ++i)
        if (d2[i] > d2[far]) far = i;
      out.centroids.row(ci) = points.row(static_cast<Eigen::Index>(far));
      d2[far] = 0.0;
    }
    if (previous - out.inertia <= options.relative_tolerance * previous) break;
    previous = out.inertia;
  }
  return out;
}

Eigen::VectorXd scenario_features(const grid::Scenario& scenario) {
  Eigen::VectorXd f(scenario.load.size() + scenario.forecast.size());
  f << scenario.load.reshaped(), scenario.forecast.reshaped();
  return f;
}

std::vector<std::size_t> select_shots(const std::vector<grid::Scenario>& scenarios,
                                      std::size_t k, std::uint64_t seed) {
  if (scenarios.empty()) throw std::invalid_argument("select_shots: no scenarios");
  Eigen::MatrixXd points(static_cast<Eigen::Index>(scenarios.size()),
                         scenario_features(scenarios.front()).size());
  for (std::size_t i = 0; i < scenarios.size(); ++i)
    points.row(static_cast<Eigen::Index>(i)) = scenario_features(scenarios[i]).transpose();
  const KMeansResult km = kmeans(points, k, seed);
  std::vector<std::size_t> chosen;
  std::vector<char> taken(scenarios.size(), 0);
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t best = scenarios.size();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
      if (taken[i]) continue;
      const double d = (points.row(static_cast<Eigen::Index>(i)) - km.centroids.row(static_cast<Eigen::Index>(c))).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    taken[best] = 1;
    chosen.push_back(best);
  }
  return chosen;
}

FewShotSet label_shots(const grid::GridCase& grid, const std::vector<grid::Scenario>& scenarios,
                       const std::vector<std::size_t>& indices, const uc::UcParams& params,
                       const lp::MilpOptions& options, double tolerance) {
  FewShotSet set;
  for (std::size_t idx : indices) {
    if (idx >= scenarios.size()) throw std::out_of_range("label_shots: index out of range");
    const lp::UcSolveResult r = lp::solve_uc(grid, scenarios[idx], params, options);
    if (r.solution.x.empty()) {
      throw LabelError("scenario " + std::to_string(idx) + ": solver returned " +
                       lp::status_name(r.solution.status) + " without an incumbent");
    }
    const uc::FeasibilityReport rep =
        uc::feasibility_report(r.decision, grid, scenarios[idx], params, tolerance);
    if (!rep.feasible) {
      throw LabelError("scenario " + std::to_string(idx) + ": label violates constraints by more than " +
                       grid::format_double(tolerance));
    }
    set.indices.push_back(idx);
    set.scenarios.push_back(scenarios[idx]);
    set.labels.push_back(r.decision);
    set.provenance.push_back("scenario " + std::to_string(idx) + " status " +
                             lp::status_name(r.solution.status) + " objective " +
                             grid::format_double(r.solution.objective) + " gap " +
                             grid::format_double(r.solution.gap) + " nodes " +
                             std::to_string(r.solution.nodes));
  }
  return set;
}

}  // namespace fpg::train
