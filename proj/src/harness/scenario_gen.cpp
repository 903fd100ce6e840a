#include "fpg/harness/scenario_gen.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <cstdio>
#include <random>

#include "fpg/grid/io.hpp"
#include "fpg/harness/case_library.hpp"
#include "fpg/lp/uc_milp.hpp"

namespace fpg::harness {

namespace {

// Morning and evening peaks over a trough around 4 am, mean 1 over the day.
std::vector<double> daily_profile(std::size_t fine_steps) {
  std::vector<double> p(fine_steps);
  double total = 0.0;
  for (std::size_t k = 0; k < fine_steps; ++k) {
    const double h = 24.0 * (static_cast<double>(k) + 0.5) / static_cast<double>(fine_steps);
    const double morning = std::exp(-std::pow((h - 10.5) / 2.5, 2.0));
    const double evening = std::exp(-std::pow((h - 19.0) / 2.5, 2.0));
    p[k] = 0.7 + 0.25 * morning + 0.3 * evening;
    total += p[k];
  }
  for (double& v : p) v *= static_cast<double>(fine_steps) / total;
  return p;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

ScenarioSet generate_scenarios(const grid::GridCase& grid, std::size_t count, std::uint64_t seed,
                               const ScenarioKnobs& knobs) {
  if (count < 1) throw std::invalid_argument("generate_scenarios: count must be >= 1");
  const std::size_t periods = knobs.horizon, steps = knobs.steps_per_period;
  const std::size_t fine = periods * steps;
  const auto profile = daily_profile(fine);
  const auto nominal = nominal_load(grid);
  const auto n = static_cast<Eigen::Index>(grid.bus_count());
  // Period-to-period correlation phi means a per-step coefficient phi^(1/steps).
  const double phi_step = std::pow(knobs.wind_phi, 1.0 / static_cast<double>(steps));
  const double innov = std::sqrt(1.0 - phi_step * phi_step);

  const uc::UcParams params = uc::UcParams::defaults(grid);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto draw = [&] {
    const double day = std::exp(knobs.day_sigma * gauss(rng) - 0.5 * knobs.day_sigma * knobs.day_sigma);
    std::vector<double> weight(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
      weight[i] = nominal[i] * knobs.load_scale *
                  std::exp(knobs.bus_sigma * gauss(rng) - 0.5 * knobs.bus_sigma * knobs.bus_sigma);
    }
    Eigen::MatrixXd load = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(periods));
    Eigen::MatrixXd forecast = load;
    for (std::size_t k = 0; k < fine; ++k) {
      const double level = day * profile[k] * (1.0 + knobs.step_sigma * gauss(rng));
      const auto t = static_cast<Eigen::Index>(k / steps);
      for (Eigen::Index i = 0; i < n; ++i) load(i, t) += std::max(0.0, weight[i] * level);
    }
    load /= static_cast<double>(steps);

    const std::size_t farms = grid.renewables.size();
    std::vector<double> z(farms);
    double common = gauss(rng);
    for (double& v : z) v = gauss(rng);
    const double wc = std::sqrt(knobs.wind_common), wo = std::sqrt(1.0 - knobs.wind_common);
    for (std::size_t k = 0; k < fine; ++k) {
      if (k > 0) {
        common = phi_step * common + innov * gauss(rng);
        for (double& v : z) v = phi_step * v + innov * gauss(rng);
      }
      const auto t = static_cast<Eigen::Index>(k / steps);
      for (std::size_t r = 0; r < farms; ++r) {
        const double u = std::clamp(normal_cdf(wc * common + wo * z[r]), 1e-12, 1.0 - 1e-12);
        const double cf = boost::math::ibeta_inv(knobs.wind_alpha, knobs.wind_beta, u);
        forecast(static_cast<Eigen::Index>(grid.bus_index(grid.renewables[r].bus)), t) +=
            knobs.wind_scale * cf * grid.renewables[r].rated_mw;
      }
    }
    forecast /= static_cast<double>(steps);
    return grid::make_scenario(grid, std::move(load), std::move(forecast), knobs.reserve_fraction);
  };

  ScenarioSet out;
  out.reserve(count);
  for (std::size_t c = 0; c < count; ++c) {
    for (std::size_t attempt = 0;; ++attempt) {
      if (attempt == kMaxDraws)
        throw std::runtime_error("generate_scenarios: no dispatchable day in " +
                                 std::to_string(kMaxDraws) + " draws");
      grid::Scenario s = draw();
      if (!knobs.screen_infeasible || lp::all_on_feasible(grid, s, params)) {
        out.push_back(std::move(s));
        break;
      }
    }
  }
  return out;
}

void save_scenario_set(const grid::GridCase& grid, const ScenarioSet& set,
                       const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < set.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "scenario_%04zu", i);
    grid::save_scenario(grid, set[i], dir / name);
  }
}

ScenarioSet load_scenario_set(const grid::GridCase& grid, const std::filesystem::path& dir) {
  ScenarioSet set;
  for (std::size_t i = 0;; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "scenario_%04zu", i);
    if (!std::filesystem::exists(dir / (std::string(name) + ".csv"))) break;
    set.push_back(grid::load_scenario(grid, dir / name));
  }
  if (set.empty()) throw grid::CaseError("no scenarios found in " + dir.string());
  return set;
}

}  // namespace fpg::harness
