#include "fpg/harness/experiment.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "fpg/grid/graph.hpp"
#include "fpg/grid/io.hpp"
#include "fpg/harness/case_library.hpp"
#include "fpg/lp/uc_milp.hpp"

namespace fpg::harness {

using nlohmann::json;
using train::Method;

RunConfig::RunConfig() {
  milp.node_cap = 200;
  milp.rel_gap = 1e-3;
  milp.keep_trace = false;
  train.batch_size = 16;
  train.monitor_size = 50;
  train.grad_clip = 1.0;
}

void RunConfig::validate() const {
  try {
    train::TrainConfig t = train;
    t.method = Method::Ours;
    t.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  try {
    network.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (methods.empty()) throw ConfigError("config: no methods");
  for (std::size_t i = 0; i < methods.size(); ++i)
    for (std::size_t j = i + 1; j < methods.size(); ++j)
      if (methods[i] == methods[j]) throw ConfigError("config: duplicate method");
  if (train_count < 1) throw ConfigError("config: train_count must be >= 1");
  if (evaluate && test_count < 1) throw ConfigError("config: test_count must be >= 1");
  if (train.shots > train_count) throw ConfigError("config: more shots than training scenarios");
  if (knobs.reserve_fraction < 0.15 || knobs.reserve_fraction > 0.20) {
    throw ConfigError("config: reserve_fraction must lie in [0.15, 0.20]");
  }
  if (knobs.horizon < 1) throw ConfigError("config: horizon must be >= 1");
  if (!train_enabled && checkpoints.empty()) {
    throw ConfigError("config: training disabled and no checkpoint directory");
  }
}

namespace {

template <class T>
void take(const json& j, T& into, const std::string& key) {
  try {
    into = j.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config: bad value for '" + key + "'");
  }
}

void walk(const json& obj, const std::string& section,
          const std::map<std::string, std::function<void(const json&, const std::string&)>>& fields) {
  if (!obj.is_object()) throw ConfigError("config: '" + section + "' must be an object");
  for (const auto& [key, value] : obj.items()) {
    const auto it = fields.find(key);
    const std::string path = section.empty() ? key : section + "." + key;
    if (it == fields.end()) throw ConfigError("config: unknown key '" + path + "'");
    it->second(value, path);
  }
}

template <class T>
std::function<void(const json&, const std::string&)> into(T& field) {
  return [&field](const json& j, const std::string& key) { take(j, field, key); };
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text,
                std::vector<std::string>& written) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
  written.push_back(path.string());
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  RunConfig c;
  std::string scenarios, out, checkpoints;
  std::vector<std::string> methods;
  bool have_methods = false;
  std::string method;
  walk(root, "",
       {{"case", into(c.case_source)},
        {"scenarios", into(scenarios)},
        {"out", into(out)},
        {"checkpoints", into(checkpoints)},
        {"methods", [&](const json& j, const std::string& k) { take(j, methods, k); have_methods = true; }},
        {"seed", into(c.seed)},
        {"train_count", into(c.train_count)},
        {"test_count", into(c.test_count)},
        {"train_enabled", into(c.train_enabled)},
        {"evaluate", into(c.evaluate)},
        {"knobs",
         [&](const json& j, const std::string& k) {
           walk(j, k,
                {{"horizon", into(c.knobs.horizon)},
                 {"steps_per_period", into(c.knobs.steps_per_period)},
                 {"load_scale", into(c.knobs.load_scale)},
                 {"day_sigma", into(c.knobs.day_sigma)},
                 {"bus_sigma", into(c.knobs.bus_sigma)},
                 {"step_sigma", into(c.knobs.step_sigma)},
                 {"wind_scale", into(c.knobs.wind_scale)},
                 {"wind_alpha", into(c.knobs.wind_alpha)},
                 {"wind_beta", into(c.knobs.wind_beta)},
                 {"wind_phi", into(c.knobs.wind_phi)},
                 {"wind_common", into(c.knobs.wind_common)},
                 {"reserve_fraction", into(c.knobs.reserve_fraction)},
                 {"screen_infeasible", into(c.knobs.screen_infeasible)}});
         }},
        {"train",
         [&](const json& j, const std::string& k) {
           walk(j, k,
                {{"learning_rate", into(c.train.learning_rate)},
                 {"inner_steps", into(c.train.inner_steps)},
                 {"outer_iterations", into(c.train.outer_iterations)},
                 {"rho", into(c.train.rho)},
                 {"rho_growth", into(c.train.rho_growth)},
                 {"log_eps", into(c.train.log_eps)},
                 {"shots", into(c.train.shots)},
                 {"batch_size", into(c.train.batch_size)},
                 {"monitor_size", into(c.train.monitor_size)},
                 {"grad_clip", into(c.train.grad_clip)},
                 {"power_base_mw", into(c.train.scales.power_base_mw)},
                 {"cost_base", into(c.train.scales.cost_base)},
                 {"method", into(method)}});
         }},
        {"network",
         [&](const json& j, const std::string& k) {
           walk(j, k,
                {{"layers", into(c.network.layers)},
                 {"cheb_order", into(c.network.cheb_order)},
                 {"kernel_width", into(c.network.kernel_width)},
                 {"channels", into(c.network.channels)},
                 {"seed", into(c.network.seed)},
                 {"input_base_mw", into(c.network.input_base_mw)},
                 {"angle_scale", into(c.network.angle_scale)}});
         }},
        {"milp", [&](const json& j, const std::string& k) {
           walk(j, k,
                {{"node_cap", into(c.milp.node_cap)},
                 {"rel_gap", into(c.milp.rel_gap)},
                 {"abs_gap", into(c.milp.abs_gap)},
                 {"dive_every", into(c.milp.dive_every)}});
         }}});
  c.scenarios = scenarios;
  if (!out.empty()) c.out = out;
  c.checkpoints = checkpoints;
  try {
    if (have_methods) {
      c.methods.clear();
      for (const auto& m : methods) c.methods.push_back(train::method_from_name(m));
    }
    if (!method.empty()) c.train.method = train::method_from_name(method);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return parse_run_config(read_file(path));
}

std::string run_config_to_json(const RunConfig& c) {
  json j;
  j["case"] = c.case_source;
  j["scenarios"] = c.scenarios.string();
  j["out"] = c.out.string();
  j["checkpoints"] = c.checkpoints.string();
  std::vector<std::string> methods;
  for (Method m : c.methods) methods.emplace_back(train::method_name(m));
  j["methods"] = methods;
  j["seed"] = c.seed;
  j["train_count"] = c.train_count;
  j["test_count"] = c.test_count;
  j["train_enabled"] = c.train_enabled;
  j["evaluate"] = c.evaluate;
  const auto& k = c.knobs;
  j["knobs"] = {{"horizon", k.horizon},         {"steps_per_period", k.steps_per_period},
                {"load_scale", k.load_scale},   {"day_sigma", k.day_sigma},
                {"bus_sigma", k.bus_sigma},     {"step_sigma", k.step_sigma},
                {"wind_scale", k.wind_scale},   {"wind_alpha", k.wind_alpha},
                {"wind_beta", k.wind_beta},     {"wind_phi", k.wind_phi},
                {"wind_common", k.wind_common}, {"reserve_fraction", k.reserve_fraction},
                {"screen_infeasible", k.screen_infeasible}};
  const auto& t = c.train;
  j["train"] = {{"learning_rate", t.learning_rate},
                {"inner_steps", t.inner_steps},
                {"outer_iterations", t.outer_iterations},
                {"rho", t.rho},
                {"rho_growth", t.rho_growth},
                {"log_eps", t.log_eps},
                {"shots", t.shots},
                {"batch_size", t.batch_size},
                {"monitor_size", t.monitor_size},
                {"grad_clip", t.grad_clip},
                {"power_base_mw", t.scales.power_base_mw},
                {"cost_base", t.scales.cost_base}};
  const auto& n = c.network;
  j["network"] = {{"layers", n.layers},           {"cheb_order", n.cheb_order},
                  {"kernel_width", n.kernel_width}, {"channels", n.channels},
                  {"seed", n.seed},               {"input_base_mw", n.input_base_mw},
                  {"angle_scale", n.angle_scale}};
  j["milp"] = {{"node_cap", c.milp.node_cap},
               {"rel_gap", c.milp.rel_gap},
               {"abs_gap", c.milp.abs_gap},
               {"dive_every", c.milp.dive_every}};
  return j.dump(2) + "\n";
}

std::uint64_t method_seed(std::uint64_t seed, Method method) {
  return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(method) + 1));
}

grid::GridCase resolve_case(const std::string& source) {
  if (source == "toy3" || source == "ieee30") return builtin_case(source);
  try {
    return grid::load_case(source);
  } catch (const grid::CaseError& e) {
    throw ConfigError(std::string("case: ") + e.what());
  }
}

namespace {

struct Split {
  ScenarioSet train, test;
};

Split split_scenarios(const RunConfig& c, const grid::GridCase& g) {
  const std::size_t need = c.train_count + (c.evaluate ? c.test_count : 0);
  ScenarioSet all;
  if (c.scenarios.empty()) {
    all = generate_scenarios(g, need, c.seed, c.knobs);
  } else {
    try {
      all = load_scenario_set(g, c.scenarios);
    } catch (const grid::CaseError& e) {
      throw ConfigError(std::string("scenarios: ") + e.what());
    }
    if (all.size() < need) {
      throw ConfigError("scenarios: " + std::to_string(all.size()) + " found, " +
                        std::to_string(need) + " needed");
    }
  }
  std::vector<std::size_t> order(all.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(splitmix64(c.seed));
  std::shuffle(order.begin(), order.end(), rng);
  Split s;
  for (std::size_t i = 0; i < c.train_count; ++i) s.train.push_back(all[order[i]]);
  if (c.evaluate)
    for (std::size_t i = 0; i < c.test_count; ++i) s.test.push_back(all[order[c.train_count + i]]);
  return s;
}

std::string history_csv(const std::vector<train::EpochRecord>& h) {
  std::ostringstream os;
  train::write_history_csv(os, h);
  return os.str();
}

}  // namespace

ExperimentReport run_experiment(const RunConfig& config) {
  config.validate();
  const grid::GridCase g = resolve_case(config.case_source);
  const grid::GraphMatrices graph = grid::build_graph(g);
  const net::NetContext context(g, graph);
  const uc::UcParams params = uc::UcParams::defaults(g);
  std::filesystem::create_directories(config.out);

  ExperimentReport report;
  const Split split = split_scenarios(config, g);
  write_file(config.out / "config.json", run_config_to_json(config), report.written);

  std::vector<Method> learned;
  for (Method m : config.methods)
    if (m != Method::M0) learned.push_back(m);
  const bool need_labels = config.train_enabled &&
                           std::any_of(learned.begin(), learned.end(), [](Method m) {
                             return m == Method::M1 || m == Method::Ours;
                           });

  if (need_labels) {
    const auto picks = train::select_shots(split.train, config.train.shots, config.seed);
    try {
      report.shots = train::label_shots(g, split.train, picks, params, config.milp);
    } catch (const train::LabelError& e) {
      throw InfeasibleError(e.what());
    }
    std::ostringstream os;
    for (const auto& line : report.shots.provenance) os << line << '\n';
    write_file(config.out / "labels.txt", os.str(), report.written);
  }

  std::map<Method, net::ModelParams> models;
  std::string divergence;
  for (Method m : learned) {
    const std::string name = train::method_name(m);
    if (!config.train_enabled) {
      const auto path = config.checkpoints / ("model_" + name + ".ckpt");
      if (!std::filesystem::exists(path)) throw ConfigError("missing checkpoint " + path.string());
      models.emplace(m, net::load_model(path));
      continue;
    }
    train::TrainConfig tc = config.train;
    tc.method = m;
    tc.seed = method_seed(config.seed, m);
    net::NetworkConfig nc = config.network;
    nc.seed = method_seed(config.network.seed, m);
    const train::FewShotSet none;
    const auto result = train::train(context, split.train, m == Method::M2 ? none : report.shots,
                                     params, tc, net::init_params(nc, context.layout(), nc.seed));
    report.histories[m] = result.history;
    report.dual_traces[m] = result.dual_trace;
    write_file(config.out / ("history_" + name + ".csv"), history_csv(result.history), report.written);
    const auto ckpt = config.out / ("model_" + name + ".ckpt");
    net::save_model(ckpt, result.params);
    report.written.push_back(ckpt.string());
    const std::vector<std::string> card{"method " + name, "case " + g.name,
                                        "training scenarios " + std::to_string(split.train.size()),
                                        "shots " + std::to_string(report.shots.size())};
    net::write_model_card(config.out / ("model_" + name + ".md"), result.params, card);
    if (result.diverged && divergence.empty()) divergence = name + ": " + result.divergence;
    models.emplace(m, result.params);
  }

  if (!report.histories.empty()) {
    ViolationTable& t = report.violations;
    std::size_t epochs = 0;
    for (const auto& [m, h] : report.histories) {
      t.methods.emplace_back(train::method_name(m));
      epochs = std::max(epochs, h.size());
    }
    for (std::size_t e = 0; e < epochs; ++e) {
      t.epochs.push_back(e + 1);
      std::vector<double> row;
      for (const auto& [m, h] : report.histories)
        row.push_back(e < h.size() ? h[e].violation_total() : std::numeric_limits<double>::quiet_NaN());
      t.values.push_back(row);
    }
    std::ostringstream csv, svg;
    write_violation_csv(csv, t);
    write_violation_svg(svg, t);
    write_file(config.out / "violation.csv", csv.str(), report.written);
    write_file(config.out / "violation.svg", svg.str(), report.written);
  }
  if (!divergence.empty()) throw DivergenceError("training diverged (" + divergence + ")");
  if (!config.evaluate) return report;

  const std::size_t n = split.test.size();
  std::vector<uc::UcDecision> baseline(n);
  std::vector<double> baseline_time(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto t0 = Clock::now();
    const auto r = lp::solve_uc(g, split.test[i], params, config.milp);
    baseline_time[i] = seconds_since(t0);
    if (r.solution.x.empty()) {
      throw InfeasibleError("M0 found no solution for test scenario " + std::to_string(i) + " (" +
                            lp::status_name(r.solution.status) + ")");
    }
    baseline[i] = r.decision;
  }
  auto abs_cost = [&](const std::vector<uc::UcDecision>& decisions) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      acc += std::abs(scenario_metrics(decisions[i], baseline[i], g, split.test[i], params).e_cost);
    return acc / static_cast<double>(n);
  };
  for (Method m : config.methods) {
    if (m == Method::M0) {
      report.metrics.push_back(
          compute_metrics("m0", baseline, baseline_time, g, split.test, baseline, params));
      report.abs_cost["m0"] = abs_cost(baseline);
      continue;
    }
    std::vector<uc::UcDecision> decisions(n);
    std::vector<double> time(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto t0 = Clock::now();
      decisions[i] = net::infer(models.at(m), context, split.test[i]);
      time[i] = seconds_since(t0);
    }
    report.metrics.push_back(
        compute_metrics(train::method_name(m), decisions, time, g, split.test, baseline, params));
    report.abs_cost[train::method_name(m)] = abs_cost(decisions);
  }
  std::ostringstream metrics, timing, md;
  write_metrics_csv(metrics, report.metrics);
  write_timing_csv(timing, report.metrics);
  write_metrics_markdown(md, report.metrics);
  write_file(config.out / "metrics.csv", metrics.str(), report.written);
  write_file(config.out / "timing.csv", timing.str(), report.written);
  write_file(config.out / "metrics.md", md.str(), report.written);
  return report;
}

}  // namespace fpg::harness
