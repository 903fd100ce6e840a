// fpguc: scenario synthesis, MILP labels, training, evaluation and reports.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "fpg/grid/graph.hpp"
#include "fpg/grid/io.hpp"
#include "fpg/harness/experiment.hpp"
#include "fpg/lp/uc_milp.hpp"
#include "fpg/uc/report.hpp"

namespace fs = std::filesystem;
using namespace fpg;

namespace {

constexpr int kOk = 0;
constexpr int kInfeasible = 2;
constexpr int kConfig = 3;
constexpr int kDiverged = 4;

struct Flags {
  std::string case_source = "toy3";
  std::string scenarios;
  std::string out = "out";
  std::string config;
  std::string method = "ours";
  std::string shots;
  std::string checkpoint;
  std::string baseline;
  std::vector<std::string> inputs;
  std::uint64_t seed = 1;
  bool seed_set = false;
  std::size_t count = 1;
  std::size_t k = 10;
};

std::string indexed(const char* stem, std::size_t i, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%04zu%s", stem, i, ext);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw harness::ConfigError("cannot write " + path.string());
  out << text;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw harness::ConfigError("cannot read " + path.string());
  return in;
}

harness::RunConfig run_config(const Flags& f) {
  harness::RunConfig c = f.config.empty() ? harness::RunConfig{} : harness::load_run_config(f.config);
  c.case_source = f.case_source;
  if (f.seed_set) c.seed = f.seed;
  return c;
}

harness::ScenarioSet scenarios_from(const grid::GridCase& g, const std::string& path) {
  if (path.empty()) throw harness::ConfigError("--scenarios is required");
  try {
    if (fs::is_directory(path)) return harness::load_scenario_set(g, path);
    return {grid::load_scenario(g, fs::path(path).replace_extension())};
  } catch (const grid::CaseError& e) {
    throw harness::ConfigError(e.what());
  }
}

train::FewShotSet label(const grid::GridCase& g, const harness::ScenarioSet& set, std::size_t k,
                        std::uint64_t seed, const lp::MilpOptions& milp) {
  const auto picks = train::select_shots(set, k, seed);
  try {
    return train::label_shots(g, set, picks, uc::UcParams::defaults(g), milp);
  } catch (const train::LabelError& e) {
    throw harness::InfeasibleError(e.what());
  }
}

void save_shots(const grid::GridCase& g, const train::FewShotSet& shots, const fs::path& dir) {
  harness::save_scenario_set(g, shots.scenarios, dir);
  std::ostringstream prov;
  for (std::size_t i = 0; i < shots.size(); ++i) {
    std::ostringstream os;
    lp::write_solution_csv(shots.labels[i], g, os);
    write_text(dir / indexed("label", i, ".csv"), os.str());
    prov << shots.provenance[i] << '\n';
  }
  write_text(dir / "labels.txt", prov.str());
}

train::FewShotSet load_shots(const grid::GridCase& g, const fs::path& dir) {
  train::FewShotSet shots;
  shots.scenarios = harness::load_scenario_set(g, dir);
  for (std::size_t i = 0; i < shots.scenarios.size(); ++i) {
    auto in = open_in(dir / indexed("label", i, ".csv"));
    shots.labels.push_back(harness::read_solution_csv(in, g, shots.scenarios[i].horizon()));
    shots.indices.push_back(i);
    shots.provenance.push_back("loaded from " + (dir / indexed("label", i, ".csv")).string());
  }
  return shots;
}

int gen_case(const Flags& f) {
  const auto g = harness::resolve_case(f.case_source);
  grid::save_case(g, f.out);
  std::cout << "wrote " << f.out << " (" << g.bus_count() << " buses)\n";
  return kOk;
}

int gen_scenarios(const Flags& f) {
  const auto c = run_config(f);
  const auto g = harness::resolve_case(c.case_source);
  if (f.count < 1) throw harness::ConfigError("--count must be >= 1");
  const auto set = harness::generate_scenarios(g, f.count, c.seed, c.knobs);
  harness::save_scenario_set(g, set, f.out);
  std::cout << "wrote " << set.size() << " scenarios to " << f.out << '\n';
  return kOk;
}

int solve_milp(const Flags& f) {
  const auto c = run_config(f);
  const auto g = harness::resolve_case(c.case_source);
  const auto set = scenarios_from(g, f.scenarios);
  const auto params = uc::UcParams::defaults(g);
  fs::create_directories(f.out);
  int code = kOk;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto r = lp::solve_uc(g, set[i], params, c.milp);
    std::ostringstream log;
    lp::write_solver_log(r.solution, log);
    write_text(fs::path(f.out) / indexed("solver", i, ".log"), log.str());
    std::cout << "scenario " << i << ": " << lp::status_name(r.solution.status);
    if (r.solution.x.empty()) {
      std::cout << '\n';
      code = kInfeasible;
      continue;
    }
    std::ostringstream sol;
    lp::write_solution_csv(r.decision, g, sol);
    write_text(fs::path(f.out) / indexed("solution", i, ".csv"), sol.str());
    std::cout << " objective " << grid::format_double(r.solution.objective) << " nodes "
              << r.solution.nodes << '\n';
  }
  return code;
}

int label_shots(const Flags& f) {
  const auto c = run_config(f);
  const auto g = harness::resolve_case(c.case_source);
  const auto set = scenarios_from(g, f.scenarios);
  if (f.k < 1 || f.k > set.size()) throw harness::ConfigError("--k must be in [1, scenario count]");
  const auto shots = label(g, set, f.k, c.seed, c.milp);
  save_shots(g, shots, f.out);
  for (const auto& line : shots.provenance) std::cout << line << '\n';
  return kOk;
}

int train_cmd(const Flags& f) {
  auto c = run_config(f);
  const auto g = harness::resolve_case(c.case_source);
  const auto set = scenarios_from(g, f.scenarios);
  const train::Method m = train::method_from_name(f.method);
  if (m == train::Method::M0) throw harness::ConfigError("m0 is not trained");
  train::FewShotSet shots;
  if (m != train::Method::M2) {
    shots = f.shots.empty() ? label(g, set, c.train.shots, c.seed, c.milp) : load_shots(g, f.shots);
  }
  const auto graph = grid::build_graph(g);
  const net::NetContext ctx(g, graph);
  c.train.method = m;
  c.train.seed = harness::method_seed(c.seed, m);
  auto nc = c.network;
  nc.seed = harness::method_seed(c.network.seed, m);
  const auto result = train::train(
      ctx, set, shots, uc::UcParams::defaults(g), c.train, net::init_params(nc, ctx.layout(), nc.seed),
      [](const train::EpochRecord& r, const net::ModelParams&) {
        std::cout << "epoch " << r.epoch << " loss " << r.loss_total << " violation "
                  << r.violation_total() << '\n';
      });
  fs::create_directories(f.out);
  const std::string name = train::method_name(m);
  std::ostringstream hist;
  train::write_history_csv(hist, result.history);
  write_text(fs::path(f.out) / ("history_" + name + ".csv"), hist.str());
  net::save_model(fs::path(f.out) / ("model_" + name + ".ckpt"), result.params);
  net::write_model_card(fs::path(f.out) / ("model_" + name + ".md"), result.params,
                        {"method " + name, "training scenarios " + std::to_string(set.size())});
  if (result.diverged) {
    std::cerr << "diverged: " << result.divergence << '\n';
    return kDiverged;
  }
  return kOk;
}

int evaluate(const Flags& f) {
  const auto c = run_config(f);
  const auto g = harness::resolve_case(c.case_source);
  const auto set = scenarios_from(g, f.scenarios);
  const auto params = uc::UcParams::defaults(g);
  const train::Method m = train::method_from_name(f.method);
  std::vector<uc::UcDecision> decisions(set.size());
  std::vector<double> seconds(set.size());
  using Clock = std::chrono::steady_clock;
  if (m == train::Method::M0) {
    for (std::size_t i = 0; i < set.size(); ++i) {
      const auto t0 = Clock::now();
      const auto r = lp::solve_uc(g, set[i], params, c.milp);
      seconds[i] = std::chrono::duration<double>(Clock::now() - t0).count();
      if (r.solution.x.empty()) throw harness::InfeasibleError("no M0 solution for scenario " + std::to_string(i));
      decisions[i] = r.decision;
    }
  } else {
    if (f.checkpoint.empty()) throw harness::ConfigError("--checkpoint is required for learned methods");
    if (!fs::exists(f.checkpoint)) throw harness::ConfigError("missing checkpoint " + f.checkpoint);
    const auto model = net::load_model(f.checkpoint);
    const auto graph = grid::build_graph(g);
    const net::NetContext ctx(g, graph);
    for (std::size_t i = 0; i < set.size(); ++i) {
      const auto t0 = Clock::now();
      decisions[i] = net::infer(model, ctx, set[i]);
      seconds[i] = std::chrono::duration<double>(Clock::now() - t0).count();
    }
  }
  const fs::path dir = fs::path(f.out) / f.method;
  fs::create_directories(dir);
  for (std::size_t i = 0; i < set.size(); ++i) {
    std::ostringstream os;
    lp::write_solution_csv(decisions[i], g, os);
    write_text(dir / indexed("solution", i, ".csv"), os.str());
  }
  std::vector<uc::UcDecision> baseline = decisions;
  if (m != train::Method::M0) {
    if (f.baseline.empty()) {
      std::cout << "wrote " << set.size() << " decisions; no --baseline, metrics skipped\n";
      return kOk;
    }
    for (std::size_t i = 0; i < set.size(); ++i) {
      auto in = open_in(fs::path(f.baseline) / indexed("solution", i, ".csv"));
      baseline[i] = harness::read_solution_csv(in, g, set[i].horizon());
    }
  }
  const auto row = harness::compute_metrics(f.method, decisions, seconds, g, set, baseline, params);
  std::ostringstream metrics, timing;
  harness::write_metrics_csv(metrics, {row});
  harness::write_timing_csv(timing, {row});
  write_text(dir / "metrics.csv", metrics.str());
  write_text(dir / "timing.csv", timing.str());
  harness::write_metrics_markdown(std::cout, {row});
  return kOk;
}

int report(const Flags& f) {
  if (f.inputs.empty()) throw harness::ConfigError("--in is required");
  std::vector<harness::MetricsRow> rows;
  harness::ViolationTable table;
  std::vector<std::vector<train::EpochRecord>> histories;
  for (const auto& dir : f.inputs) {
    const fs::path d(dir);
    if (fs::exists(d / "metrics.csv")) {
      auto in = open_in(d / "metrics.csv");
      auto part = harness::read_metrics_csv(in);
      if (fs::exists(d / "timing.csv")) {
        auto tin = open_in(d / "timing.csv");
        harness::read_timing_csv(tin, part);
      }
      rows.insert(rows.end(), part.begin(), part.end());
    }
    for (const char* m : {"m1", "m2", "ours"}) {
      const fs::path h = d / (std::string("history_") + m + ".csv");
      if (!fs::exists(h)) continue;
      auto in = open_in(h);
      std::string line;
      std::getline(in, line);
      std::vector<double> totals;
      while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string cell;
        double total = 0.0;
        for (int col = 0; std::getline(ss, cell, ','); ++col)
          if (col >= 5) total += std::stod(cell);
        totals.push_back(total);
      }
      table.methods.emplace_back(m);
      if (table.epochs.size() < totals.size()) {
        for (std::size_t e = table.epochs.size(); e < totals.size(); ++e) {
          table.epochs.push_back(e + 1);
          table.values.emplace_back(table.methods.size() - 1, std::nan(""));
        }
      }
      for (std::size_t e = 0; e < table.epochs.size(); ++e)
        table.values[e].push_back(e < totals.size() ? totals[e] : std::nan(""));
    }
  }
  fs::create_directories(f.out);
  if (!rows.empty()) {
    std::ostringstream metrics, timing, md;
    harness::write_metrics_csv(metrics, rows);
    harness::write_timing_csv(timing, rows);
    harness::write_metrics_markdown(md, rows);
    write_text(fs::path(f.out) / "metrics.csv", metrics.str());
    write_text(fs::path(f.out) / "timing.csv", timing.str());
    write_text(fs::path(f.out) / "metrics.md", md.str());
    std::cout << md.str();
  }
  if (!table.methods.empty()) {
    std::ostringstream csv, svg;
    harness::write_violation_csv(csv, table);
    harness::write_violation_svg(svg, table);
    write_text(fs::path(f.out) / "violation.csv", csv.str());
    write_text(fs::path(f.out) / "violation.svg", svg.str());
  }
  return kOk;
}

int experiment(const Flags& f) {
  auto c = run_config(f);
  c.out = f.out;
  const auto r = harness::run_experiment(c);
  if (!r.metrics.empty()) harness::write_metrics_markdown(std::cout, r.metrics);
  for (const auto& path : r.written) std::cout << "wrote " << path << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Few-shot physics-guided unit commitment"};
  app.require_subcommand(1);
  Flags f;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--case", f.case_source, "built-in case name or case JSON path");
    sub->add_option("--config", f.config, "JSON run configuration");
    sub->add_option("--seed", f.seed, "random seed")->each([&](const std::string&) { f.seed_set = true; });
    sub->add_option("--out", f.out, "output path");
  };
  auto* gen_case_cmd = app.add_subcommand("gen-case", "write a built-in case as JSON");
  common(gen_case_cmd);
  auto* gen_scen_cmd = app.add_subcommand("gen-scenarios", "synthesize load and wind scenarios");
  common(gen_scen_cmd);
  gen_scen_cmd->add_option("--count", f.count, "number of scenarios");
  auto* milp_cmd = app.add_subcommand("solve-milp", "solve scenarios with branch and bound");
  common(milp_cmd);
  milp_cmd->add_option("--scenarios", f.scenarios, "scenario directory or file");
  auto* label_cmd = app.add_subcommand("label-shots", "cluster scenarios and label the centroids");
  common(label_cmd);
  label_cmd->add_option("--scenarios", f.scenarios, "scenario directory");
  label_cmd->add_option("--k", f.k, "number of shots");
  auto* train_sub = app.add_subcommand("train", "train one learned method");
  common(train_sub);
  train_sub->add_option("--scenarios", f.scenarios, "unlabeled training scenarios");
  train_sub->add_option("--shots", f.shots, "directory written by label-shots");
  train_sub->add_option("--method", f.method, "m1, m2 or ours");
  auto* eval_cmd = app.add_subcommand("evaluate", "decide held-out scenarios and score them");
  common(eval_cmd);
  eval_cmd->add_option("--scenarios", f.scenarios, "held-out scenarios");
  eval_cmd->add_option("--method", f.method, "m0, m1, m2 or ours");
  eval_cmd->add_option("--checkpoint", f.checkpoint, "model checkpoint");
  eval_cmd->add_option("--baseline", f.baseline, "directory of m0 decisions");
  auto* report_cmd = app.add_subcommand("report", "merge metrics and histories, draw the chart");
  common(report_cmd);
  report_cmd->add_option("--in", f.inputs, "directories with metrics/history CSVs");
  auto* exp_cmd = app.add_subcommand("experiment", "full M0/M1/M2/ours comparison");
  common(exp_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (*gen_case_cmd) return gen_case(f);
    if (*gen_scen_cmd) return gen_scenarios(f);
    if (*milp_cmd) return solve_milp(f);
    if (*label_cmd) return label_shots(f);
    if (*train_sub) return train_cmd(f);
    if (*eval_cmd) return evaluate(f);
    if (*report_cmd) return report(f);
    if (*exp_cmd) return experiment(f);
  } catch (const harness::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const harness::DivergenceError& e) {
    std::cerr << "diverged: " << e.what() << '\n';
    return kDiverged;
  } catch (const harness::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const grid::CaseError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  }
  return kOk;
}
