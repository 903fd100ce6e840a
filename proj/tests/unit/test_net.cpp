#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

#include "doctest.h"
#include "fpg/harness/case_library.hpp"
#include "fpg/harness/scenario_gen.hpp"
#include "fpg/net/stgcn.hpp"
#include "fpg/uc/residuals.hpp"

using namespace fpg;
using ad::Tensor;

namespace {

net::NetworkConfig small_config() {
  net::NetworkConfig c;
  c.channels = {2, 4, 6};
  c.cheb_order = 3;
  c.kernel_width = 2;
  return c;
}

Tensor random_tensor(std::mt19937_64& rng, ad::Shape shape) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = u(rng);
  return t;
}

// Ring plus random chords on n buses.
grid::GridCase random_connected_case(std::mt19937_64& rng, std::size_t n) {
  grid::GridCase g;
  g.name = "random";
  for (std::size_t i = 0; i < n; ++i) g.buses.push_back(static_cast<int>(i + 1));
  for (std::size_t i = 0; i < n; ++i)
    g.lines.push_back({static_cast<int>(i + 1), static_cast<int>((i + 1) % n + 1), 10.0, 50.0});
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (int k = 0; k < 3; ++k) {
    const std::size_t a = pick(rng), b = pick(rng);
    if (a != b) g.lines.push_back({static_cast<int>(a + 1), static_cast<int>(b + 1), 5.0, 30.0});
  }
  g.slack_bus = 1;
  return g;
}

Tensor permute_nodes(const Tensor& x, const std::vector<std::size_t>& perm) {
  // x is [a x b x node]; result[.][.][perm[i]] = x[.][.][i]
  Tensor y(x.shape());
  const std::size_t rows = x.dim(0) * x.dim(1), n = x.dim(2);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t i = 0; i < n; ++i) y[r * n + perm[i]] = x[r * n + i];
  return y;
}

Tensor permute_matrix(const Tensor& m, const std::vector<std::size_t>& perm) {
  Tensor y(m.shape());
  for (std::size_t i = 0; i < m.dim(0); ++i)
    for (std::size_t j = 0; j < m.dim(1); ++j) y.at(perm[i], perm[j]) = m.at(i, j);
  return y;
}

Tensor permute_columns(const Tensor& m, const std::vector<std::size_t>& perm) {
  Tensor y(m.shape());
  for (std::size_t i = 0; i < m.dim(0); ++i)
    for (std::size_t j = 0; j < m.dim(1); ++j) y.at(i, perm[j]) = m.at(i, j);
  return y;
}

}  // namespace

TEST_CASE("init_params is deterministic in the seed") {
  const auto g = harness::toy3_case();
  const net::UnitLayout layout(g);
  const auto a = net::init_params(net::NetworkConfig{}, layout, 42);
  const auto b = net::init_params(net::NetworkConfig{}, layout, 42);
  const auto c = net::init_params(net::NetworkConfig{}, layout, 43);
  CHECK(a.tensors == b.tensors);
  CHECK_FALSE(a.tensors == c.tensors);
}

TEST_CASE("parameter shapes follow the config") {
  const auto g = harness::toy3_case();
  const net::UnitLayout layout(g);
  net::NetworkConfig cfg;
  const auto p = net::init_params(cfg, layout);
  CHECK(p.tensors.size() == cfg.layers * 6 + 8);
  CHECK(p.get("block0.gamma0").shape() == ad::Shape{3, 64, 2});
  CHECK(p.get("block0.theta").shape() == ad::Shape{3, 32, 32});
  CHECK(p.get("block1.gamma0").shape() == ad::Shape{3, 128, 32});
  CHECK(p.get("block1.gamma1").shape() == ad::Shape{3, 128, 64});
  CHECK(p.get("head.dispatch").shape() == ad::Shape{1, 1, 64});
  CHECK(p.get("head.angle_bias").shape() == ad::Shape{1});
  // Glorot bound for the first temporal kernel.
  const double bound = std::sqrt(6.0 / (3.0 * 2.0 + 3.0 * 64.0));
  for (double v : p.get("block0.gamma0").values()) CHECK(std::abs(v) <= bound);
  for (double v : p.get("block0.gamma0_bias").values()) CHECK(v == 0.0);
}

TEST_CASE("config validation") {
  net::NetworkConfig c;
  c.layers = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.channels = {2, 32};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.channels = {2, 0, 4};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.cheb_order = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("unit layout assigns slots per bus") {
  grid::GridCase g = harness::toy3_case();
  g.generators.push_back(g.generators.front());  // second unit at the same bus
  const net::UnitLayout layout(g);
  CHECK(layout.generator_slots() == 2);
  CHECK(layout.generator_slot(0) == 0);
  CHECK(layout.generator_slot(2) == 1);
  CHECK(layout.generator_node(2) == layout.generator_node(0));
  const Tensor sel = layout.generator_selection();
  CHECK(sel.shape() == ad::Shape{2 * 3, 3});
  double total = 0.0;
  for (double v : sel.values()) total += v;
  CHECK(total == 3.0);
  const Tensor am = layout.angle_mask();
  CHECK(am.at(0, layout.slack()) == 0.0);
}

TEST_CASE("zero input and zero parameters give zero outputs") {
  const auto g = harness::toy3_case();
  const auto graph = grid::build_graph(g);
  const net::NetContext ctx(g, graph);
  auto p = net::init_params(small_config(), ctx.layout());
  for (auto& t : p.tensors) t.value.fill(0.0);
  ad::Tape tape;
  const auto bound = net::bind(tape, p, false);
  const Tensor x({6, 2, 3}, 0.0);
  const auto out = net::forward_nodes(tape, bound, p, x, ctx.scaled_laplacian(), ctx.generator_mask(),
                                      ctx.renewable_mask(), ctx.angle_mask());
  for (const auto* v : {&out.dispatch_logit, &out.status, &out.angle, &out.renewable_logit}) {
    CHECK(v->value().shape()[0] == 6);
    for (double e : v->value().values()) CHECK(e == 0.0);
  }
}

TEST_CASE("outputs keep the input horizon") {
  const auto g = harness::ieee30_case();
  const auto graph = grid::build_graph(g);
  const net::NetContext ctx(g, graph);
  const auto p = net::init_params(small_config(), ctx.layout());
  harness::ScenarioKnobs knobs;
  knobs.horizon = 7;
  const auto s = harness::generate_scenarios(g, 1, 3, knobs).front();
  ad::Tape tape;
  const auto bound = net::bind(tape, p, false);
  const auto raw = net::forward(tape, bound, p, ctx, s);
  CHECK(raw.dispatch.shape() == ad::Shape{6, 7});
  CHECK(raw.status.shape() == ad::Shape{6, 7});
  CHECK(raw.angle.shape() == ad::Shape{30, 7});
  CHECK(raw.renewable.shape() == ad::Shape{5, 7});
}

TEST_CASE("kernel wider than the horizon is rejected") {
  const auto g = harness::toy3_case();
  const auto graph = grid::build_graph(g);
  const net::NetContext ctx(g, graph);
  const auto p = net::init_params(net::NetworkConfig{}, ctx.layout());
  harness::ScenarioKnobs knobs;
  knobs.horizon = 2;
  const auto s = harness::generate_scenarios(g, 1, 3, knobs).front();
  ad::Tape tape;
  const auto bound = net::bind(tape, p, false);
  CHECK_THROWS_AS(net::forward(tape, bound, p, ctx, s), ad::ShapeError);
}

TEST_CASE("node relabeling permutes the outputs") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 3; ++trial) {
    const auto g = random_connected_case(rng, 6);
    const auto graph = grid::build_graph(g);
    const Tensor lap = graph.scaled_laplacian_tensor();
    std::vector<std::size_t> perm(6);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);

    net::ModelParams p;
    {
      grid::GridCase with_units = g;
      with_units.generators.push_back({2, 0, 10, 5, 5, 1, 1, 1, 0, 0});
      with_units.renewables.push_back({4, 10});
      p = net::init_params(small_config(), net::UnitLayout(with_units), 100 + trial);
    }
    for (auto& t : p.tensors)
      if (t.name.find("bias") != std::string::npos) t.value = random_tensor(rng, t.value.shape());
    const Tensor x = random_tensor(rng, {5, 2, 6});
    Tensor gmask({1, 6}, 0.0), rmask({1, 6}, 0.0), amask({1, 6}, 1.0);
    gmask.at(0, 1) = gmask.at(0, 4) = 1.0;
    rmask.at(0, 3) = 1.0;
    amask.at(0, 0) = 0.0;

    ad::Tape tape;
    const auto bound = net::bind(tape, p, false);
    const auto a = net::forward_nodes(tape, bound, p, x, lap, gmask, rmask, amask);
    const auto b = net::forward_nodes(tape, bound, p, permute_nodes(x, perm), permute_matrix(lap, perm),
                                      permute_columns(gmask, perm), permute_columns(rmask, perm),
                                      permute_columns(amask, perm));
    CHECK(ad::max_abs_diff(permute_nodes(a.dispatch_logit.value(), perm), b.dispatch_logit.value()) < 1e-10);
    CHECK(ad::max_abs_diff(permute_nodes(a.status.value(), perm), b.status.value()) < 1e-10);
    CHECK(ad::max_abs_diff(permute_nodes(a.angle.value(), perm), b.angle.value()) < 1e-10);
    CHECK(ad::max_abs_diff(permute_nodes(a.renewable_logit.value(), perm), b.renewable_logit.value()) < 1e-10);
  }
}

TEST_CASE("masks are idempotent and zero the unit-free nodes") {
  const auto g = harness::ieee30_case();
  const auto graph = grid::build_graph(g);
  const net::NetContext ctx(g, graph);
  const auto p = net::init_params(small_config(), ctx.layout());
  const auto s = harness::generate_scenarios(g, 1, 9).front();
  ad::Tape tape;
  const auto bound = net::bind(tape, p, false);
  const Tensor x = grid::assemble_input(g, s);
  const auto out = net::forward_nodes(tape, bound, p, x, ctx.scaled_laplacian(), ctx.generator_mask(),
                                      ctx.renewable_mask(), ctx.angle_mask());
  const Tensor& d = out.dispatch_logit.value();
  const Tensor& m = ctx.generator_mask();
  Tensor twice = d;
  for (std::size_t t = 0; t < d.dim(0); ++t)
    for (std::size_t n = 0; n < d.dim(2); ++n) {
      twice.at(t, 0, n) *= m.at(0, n);
      if (m.at(0, n) == 0.0) CHECK(d.at(t, 0, n) == 0.0);
    }
  CHECK(twice == d);
  for (std::size_t t = 0; t < d.dim(0); ++t) CHECK(out.angle.value().at(t, 0, g.slack_index()) == 0.0);
}

TEST_CASE("decide binarizes through tanh") {
  const auto g = harness::toy3_case();
  const auto graph = grid::build_graph(g);
  const net::NetContext ctx(g, graph);
  const auto s = harness::generate_scenarios(g, 1, 2).front();
  auto p = net::init_params(small_config(), ctx.layout());
  p.get("head.status").fill(0.0);
  {
    ad::Tape tape;
    const auto d = net::decide(tape, net::bind(tape, p, false), p, ctx, s);
    for (double v : d.raw.status.value().values()) CHECK(v == 0.0);
    for (double v : d.commitment.value().values()) CHECK(v == 0.0);
  }
  p.get("head.status_bias").fill(25.0);
  {
    ad::Tape tape;
    const auto d = net::decide(tape, net::bind(tape, p, false), p, ctx, s);
    for (double v : d.commitment.value().values()) CHECK(v == 1.0);
  }
}

TEST_CASE("decisions feed the residuals on the 30-bus case") {
  const auto g = harness::ieee30_case();
  const auto graph = grid::build_graph(g);
  const net::NetContext ctx(g, graph);
  const auto p = net::init_params(net::NetworkConfig{}, ctx.layout());
  const auto s = harness::generate_scenarios(g, 1, 4).front();
  ad::Tape tape;
  const auto d = net::decide(tape, net::bind(tape, p, false), p, ctx, s);
  const Tensor& pg = d.raw.dispatch.value();
  for (std::size_t k = 0; k < g.generators.size(); ++k)
    for (std::size_t t = 0; t < s.horizon(); ++t) {
      CHECK(pg.at(k, t) >= g.generators[k].p_min);
      CHECK(pg.at(k, t) <= g.generators[k].p_max);
    }
  const auto farm = s.farm_forecast(g);
  for (std::size_t k = 0; k < g.renewables.size(); ++k)
    for (std::size_t t = 0; t < s.horizon(); ++t) {
      const double r = d.raw.renewable.value().at(k, t);
      CHECK(r >= 0.0);
      CHECK(r <= farm(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(t)));
    }
  const uc::UcDecision rep = net::to_uc_decision(d);
  CHECK_NOTHROW(rep.validate(g, s.horizon()));
  for (Eigen::Index k = 0; k < rep.commitment.rows(); ++k)
    for (Eigen::Index t = 0; t < rep.commitment.cols(); ++t)
      if (rep.commitment(k, t) == 0.0) CHECK(rep.dispatch(k, t) == 0.0);
  const auto res = uc::all_residuals(rep, g, s, uc::UcParams::defaults(g));
  CHECK(res.line_upper.rows() == 41);
  CHECK(res.balance.rows() == 30);
}

TEST_CASE("inference is bit-identical across runs") {
  const auto g = harness::ieee30_case();
  const auto graph = grid::build_graph(g);
  const net::NetContext ctx(g, graph);
  const auto p = net::init_params(net::NetworkConfig{}, ctx.layout());
  const auto s = harness::generate_scenarios(g, 1, 6).front();
  const auto a = net::infer(p, ctx, s);
  const auto b = net::infer(p, ctx, s);
  CHECK(a.dispatch == b.dispatch);
  CHECK(a.angle == b.angle);
  CHECK(a.commitment == b.commitment);
}

TEST_CASE("model checkpoint round trip and card") {
  const auto g = harness::toy3_case();
  const net::UnitLayout layout(g);
  net::NetworkConfig cfg = small_config();
  cfg.angle_scale = 0.25;
  const auto p = net::init_params(cfg, layout, 77);
  const auto dir = std::filesystem::temp_directory_path() / "fpg_test_net";
  std::filesystem::create_directories(dir);
  net::save_model(dir / "model.ckpt", p);
  const auto q = net::load_model(dir / "model.ckpt");
  CHECK(q.tensors == p.tensors);
  CHECK(q.config.channels == cfg.channels);
  CHECK(q.config.seed == 77);
  CHECK(q.config.angle_scale == 0.25);
  net::write_model_card(dir / "model.txt", p, {"trained on toy3"});
  std::ifstream in(dir / "model.txt");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(text.find("seed 77") != std::string::npos);
  CHECK(text.find("provenance trained on toy3") != std::string::npos);
  std::filesystem::remove_all(dir);
}
