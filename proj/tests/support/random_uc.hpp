#pragma once

#include <random>

#include "fpg/grid/scenario.hpp"
#include "fpg/uc/decision.hpp"

namespace fpg::testing {

struct UcInstance {
  grid::GridCase grid;
  grid::Scenario scenario;
  uc::UcParams params;
};

/// Triangle network, units at buses 1 and 2, a wind farm at bus 3.
inline UcInstance random_small_instance(std::mt19937_64& rng, int periods = 4) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto in = [&](double lo, double hi) { return lo + (hi - lo) * u(rng); };
  UcInstance inst;
  grid::GridCase& g = inst.grid;
  g.name = "random3";
  g.buses = {1, 2, 3};
  g.slack_bus = 1;
  g.lines = {{1, 2, in(5, 20), in(30, 80)}, {2, 3, in(5, 20), in(30, 80)}, {1, 3, in(5, 20), in(30, 80)}};
  for (int bus : {1, 2}) {
    grid::Generator gen;
    gen.bus = bus;
    gen.p_max = in(40, 80);
    gen.p_min = in(0.1, 0.3) * gen.p_max;
    gen.ramp_up = in(0.5, 1.0) * gen.p_max;
    gen.ramp_down = gen.ramp_up;
    gen.min_up = 1 + static_cast<int>(3 * u(rng));
    gen.min_down = 1 + static_cast<int>(3 * u(rng));
    gen.cost_slope = in(1, 5);
    gen.no_load_cost = in(0, 20);
    gen.startup_cost = in(0, 50);
    g.generators.push_back(gen);
  }
  g.renewables.push_back({3, in(20, 40)});
  Eigen::MatrixXd load(3, periods), forecast = Eigen::MatrixXd::Zero(3, periods);
  for (int t = 0; t < periods; ++t) {
    for (int i = 0; i < 3; ++i) load(i, t) = in(5, 30);
    forecast(2, t) = in(0, 1) * g.renewables[0].rated_mw;
  }
  inst.scenario = grid::make_scenario(g, load, forecast, in(0.0, 0.1));
  inst.params = uc::UcParams::defaults(g);
  if (u(rng) < 0.5) {
    const double p = in(g.generators[0].p_min, 0.5 * g.generators[0].p_max);
    inst.params.initial[0] = {1.0, p, 1, 0};
  }
  return inst;
}

}  // namespace fpg::testing
