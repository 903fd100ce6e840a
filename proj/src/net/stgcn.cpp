#include "fpg/net/stgcn.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include "fpg/grid/io.hpp"

namespace fpg::net {

using ad::Shape;
using ad::Tensor;
using ad::Var;

void NetworkConfig::validate() const {
  if (layers < 1) throw std::invalid_argument("network: layers must be >= 1");
  if (cheb_order < 1) throw std::invalid_argument("network: Chebyshev order must be >= 1");
  if (kernel_width < 1) throw std::invalid_argument("network: kernel width must be >= 1");
  if (channels.size() != layers + 1) {
    throw std::invalid_argument("network: expected " + std::to_string(layers + 1) +
                                " channel widths, got " + std::to_string(channels.size()));
  }
  for (std::size_t c : channels)
    if (c == 0) throw std::invalid_argument("network: channel widths must be > 0");
  if (channels.front() != 2) throw std::invalid_argument("network: input width must be 2");
  if (!(input_base_mw > 0.0)) throw std::invalid_argument("network: input base must be > 0");
  if (!(angle_scale > 0.0)) throw std::invalid_argument("network: angle scale must be > 0");
}

UnitLayout::UnitLayout(const grid::GridCase& grid) : nodes_(grid.bus_count()) {
  grid.validate();
  slack_ = grid.slack_index();
  std::vector<std::size_t> gen_count(nodes_, 0), ren_count(nodes_, 0);
  for (const auto& g : grid.generators) {
    const std::size_t node = grid.bus_index(g.bus);
    gen_node_.push_back(node);
    gen_slot_.push_back(gen_count[node]++);
  }
  for (const auto& r : grid.renewables) {
    const std::size_t node = grid.bus_index(r.bus);
    ren_node_.push_back(node);
    ren_slot_.push_back(ren_count[node]++);
  }
  gen_slots_ = 1;
  ren_slots_ = 1;
  for (std::size_t n = 0; n < nodes_; ++n) {
    gen_slots_ = std::max(gen_slots_, gen_count[n]);
    ren_slots_ = std::max(ren_slots_, ren_count[n]);
  }
}

Tensor UnitLayout::generator_mask() const {
  Tensor m({gen_slots_, nodes_}, 0.0);
  for (std::size_t g = 0; g < gen_node_.size(); ++g) m.at(gen_slot_[g], gen_node_[g]) = 1.0;
  return m;
}

Tensor UnitLayout::renewable_mask() const {
  Tensor m({ren_slots_, nodes_}, 0.0);
  for (std::size_t r = 0; r < ren_node_.size(); ++r) m.at(ren_slot_[r], ren_node_[r]) = 1.0;
  return m;
}

Tensor UnitLayout::angle_mask() const {
  Tensor m({1, nodes_}, 1.0);
  m.at(0, slack_) = 0.0;
  return m;
}

Tensor UnitLayout::generator_selection() const {
  Tensor s({gen_slots_ * nodes_, gen_node_.size()}, 0.0);
  for (std::size_t g = 0; g < gen_node_.size(); ++g) s.at(gen_slot_[g] * nodes_ + gen_node_[g], g) = 1.0;
  return s;
}

Tensor UnitLayout::renewable_selection() const {
  Tensor s({ren_slots_ * nodes_, ren_node_.size()}, 0.0);
  for (std::size_t r = 0; r < ren_node_.size(); ++r) s.at(ren_slot_[r] * nodes_ + ren_node_[r], r) = 1.0;
  return s;
}

const Tensor& ModelParams::get(const std::string& name) const {
  for (const auto& t : tensors)
    if (t.name == name) return t.value;
  throw std::out_of_range("model has no parameter " + name);
}

Tensor& ModelParams::get(const std::string& name) {
  for (auto& t : tensors)
    if (t.name == name) return t.value;
  throw std::out_of_range("model has no parameter " + name);
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors) n += t.value.size();
  return n;
}

namespace {

std::string layer_name(std::size_t l, const char* part) {
  return "block" + std::to_string(l) + "." + part;
}

// Parameter order is fixed: per block gamma0, gamma0_bias, theta, theta_bias,
// gamma1, gamma1_bias; then the four heads with their biases.
struct Index {
  static std::size_t block(std::size_t l, std::size_t part) { return l * 6 + part; }
  static std::size_t head(std::size_t layers, std::size_t h) { return layers * 6 + h; }
};

Tensor broadcast_periods(const Tensor& mask, std::size_t periods) {
  const std::size_t rows = mask.dim(0), cols = mask.dim(1);
  Tensor out({periods, rows, cols});
  for (std::size_t t = 0; t < periods; ++t)
    for (std::size_t i = 0; i < rows * cols; ++i) out[t * rows * cols + i] = mask[i];
  return out;
}

Var gated(Var x, Var kernel, Var bias, std::size_t width) {
  Var h = ad::causal_conv1d(x, kernel, bias);
  return ad::glu(ad::slice(h, 1, 0, width), ad::slice(h, 1, width, 2 * width));
}

// [period x slots x node] -> [units x period]
Var gather_units(Var heads, const Tensor& selection) {
  const Shape& s = heads.shape();
  Var flat = ad::reshape(heads, {s[0], s[1] * s[2]});
  Var picked = ad::matmul(flat, heads.tape->constant(selection));
  return ad::transpose(picked);
}

}  // namespace

ModelParams init_params(const NetworkConfig& config, const UnitLayout& layout,
                        std::uint64_t seed) {
  config.validate();
  ModelParams p;
  p.config = config;
  p.config.seed = seed;
  p.generator_slots = layout.generator_slots();
  p.renewable_slots = layout.renewable_slots();
  std::mt19937_64 rng(seed);
  auto glorot = [&](Shape shape, double fan_in, double fan_out) {
    Tensor t(std::move(shape));
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = u(rng);
    return t;
  };
  const std::size_t kt = config.kernel_width, k = config.cheb_order;
  for (std::size_t l = 0; l < config.layers; ++l) {
    const auto cin = static_cast<double>(config.channels[l]);
    const std::size_t c = config.channels[l + 1];
    const auto cd = static_cast<double>(c);
    const auto ktd = static_cast<double>(kt);
    p.tensors.push_back({layer_name(l, "gamma0"), glorot({kt, 2 * c, config.channels[l]}, ktd * cin, ktd * 2 * cd)});
    p.tensors.push_back({layer_name(l, "gamma0_bias"), Tensor({2 * c}, 0.0)});
    p.tensors.push_back({layer_name(l, "theta"), glorot({k, c, c}, static_cast<double>(k) * cd, cd)});
    p.tensors.push_back({layer_name(l, "theta_bias"), Tensor({c}, 0.0)});
    p.tensors.push_back({layer_name(l, "gamma1"), glorot({kt, 2 * c, c}, ktd * cd, ktd * 2 * cd)});
    p.tensors.push_back({layer_name(l, "gamma1_bias"), Tensor({2 * c}, 0.0)});
  }
  const std::size_t last = config.channels.back();
  const auto ld = static_cast<double>(last);
  auto head = [&](const char* name, std::size_t slots) {
    p.tensors.push_back({std::string("head.") + name, glorot({1, slots, last}, ld, static_cast<double>(slots))});
    p.tensors.push_back({std::string("head.") + name + "_bias", Tensor({slots}, 0.0)});
  };
  head("dispatch", p.generator_slots);
  head("status", p.generator_slots);
  head("angle", 1);
  head("renewable", p.renewable_slots);
  return p;
}

BoundParams bind(ad::Tape& tape, const ModelParams& params, bool trainable) {
  BoundParams b;
  b.vars.reserve(params.tensors.size());
  for (const auto& t : params.tensors)
    b.vars.push_back(trainable ? tape.variable(t.value) : tape.constant(t.value));
  return b;
}

NetContext::NetContext(const grid::GridCase& grid, const grid::GraphMatrices& graph)
    : grid_(&grid),
      layout_(grid),
      laplacian_(graph.scaled_laplacian_tensor()),
      gen_mask_(layout_.generator_mask()),
      ren_mask_(layout_.renewable_mask()),
      angle_mask_(layout_.angle_mask()),
      gen_select_(layout_.generator_selection()),
      ren_select_(layout_.renewable_selection()) {}

NodeOutputs forward_nodes(ad::Tape& tape, const BoundParams& bound, const ModelParams& params,
                          const Tensor& input, const Tensor& scaled_laplacian,
                          const Tensor& generator_mask, const Tensor& renewable_mask,
                          const Tensor& angle_mask) {
  const NetworkConfig& cfg = params.config;
  if (bound.vars.size() != params.tensors.size()) {
    throw std::invalid_argument("forward: bound parameters do not match the model");
  }
  if (input.rank() != 3 || input.dim(1) != cfg.channels.front() ||
      input.dim(2) != scaled_laplacian.dim(0)) {
    throw ad::ShapeError("forward: input " + ad::shape_string(input.shape()) + " vs laplacian " +
                         ad::shape_string(scaled_laplacian.shape()));
  }
  const std::size_t periods = input.dim(0);
  Var h = ad::scale(tape.constant(input), 1.0 / cfg.input_base_mw);
  const auto& v = bound.vars;
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    const std::size_t c = cfg.channels[l + 1];
    h = gated(h, v[Index::block(l, 0)], v[Index::block(l, 1)], c);
    h = ad::relu(ad::cheb_graph_conv(h, v[Index::block(l, 2)], v[Index::block(l, 3)], scaled_laplacian));
    h = gated(h, v[Index::block(l, 4)], v[Index::block(l, 5)], c);
  }
  auto head = [&](std::size_t k, const Tensor& mask) {
    Var out = ad::causal_conv1d(h, v[Index::head(cfg.layers, 2 * k)], v[Index::head(cfg.layers, 2 * k + 1)]);
    return ad::mul(out, tape.constant(broadcast_periods(mask, periods)));
  };
  NodeOutputs o;
  o.dispatch_logit = head(0, generator_mask);
  o.status = head(1, generator_mask);
  o.angle = ad::scale(head(2, angle_mask), cfg.angle_scale);
  o.renewable_logit = head(3, renewable_mask);
  return o;
}

RawOutputs forward(ad::Tape& tape, const BoundParams& bound, const ModelParams& params,
                   const NetContext& context, const grid::Scenario& scenario) {
  const grid::GridCase& grid = context.grid();
  const Tensor x = grid::assemble_input(grid, scenario);
  const NodeOutputs nodes =
      forward_nodes(tape, bound, params, x, context.scaled_laplacian(), context.generator_mask(),
                    context.renewable_mask(), context.angle_mask());
  const std::size_t periods = scenario.horizon();
  const std::size_t gens = grid.generators.size(), farms = grid.renewables.size();

  RawOutputs r;
  r.dispatch_logit = gather_units(nodes.dispatch_logit, context.generator_selection());
  r.status = gather_units(nodes.status, context.generator_selection());
  Tensor lo({gens, periods}), range({gens, periods});
  for (std::size_t g = 0; g < gens; ++g)
    for (std::size_t t = 0; t < periods; ++t) {
      lo.at(g, t) = grid.generators[g].p_min;
      range.at(g, t) = grid.generators[g].p_max - grid.generators[g].p_min;
    }
  r.dispatch = ad::add(ad::mul(ad::sigmoid(r.dispatch_logit), tape.constant(range)), tape.constant(lo));
  const Shape& as = nodes.angle.shape();
  r.angle = ad::transpose(ad::reshape(nodes.angle, {as[0], as[2]}));
  const Var ren_logit = gather_units(nodes.renewable_logit, context.renewable_selection());
  const Eigen::MatrixXd farm = scenario.farm_forecast(grid);
  Tensor forecast({farms, periods});
  for (std::size_t f = 0; f < farms; ++f)
    for (std::size_t t = 0; t < periods; ++t)
      forecast.at(f, t) = farm(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(t));
  r.renewable = ad::mul(ad::sigmoid(ren_logit), tape.constant(forecast));
  return r;
}

Decision decide(ad::Tape& tape, const BoundParams& bound, const ModelParams& params,
                const NetContext& context, const grid::Scenario& scenario) {
  Decision d;
  d.raw = forward(tape, bound, params, context, scenario);
  d.status_tanh = ad::tanh(d.raw.status);
  d.commitment = ad::sign_ste(d.status_tanh);
  return d;
}

namespace {

Eigen::MatrixXd to_matrix(const Tensor& t) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(t.dim(0)), static_cast<Eigen::Index>(t.dim(1)));
  for (std::size_t i = 0; i < t.dim(0); ++i)
    for (std::size_t j = 0; j < t.dim(1); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = t.at(i, j);
  return m;
}

}  // namespace

uc::UcDecision to_uc_decision(const Decision& decision) {
  uc::UcDecision d;
  d.commitment = to_matrix(decision.commitment.value());
  d.dispatch = to_matrix(decision.raw.dispatch.value()).cwiseProduct(d.commitment);
  d.renewable = to_matrix(decision.raw.renewable.value());
  d.angle = to_matrix(decision.raw.angle.value());
  return d;
}

uc::UcDecision infer(const ModelParams& params, const NetContext& context,
                     const grid::Scenario& scenario) {
  ad::Tape tape;
  const BoundParams bound = bind(tape, params, false);
  return to_uc_decision(decide(tape, bound, params, context, scenario));
}

namespace {

constexpr const char* kConfigRecord = "config";

}  // namespace

void save_model(const std::filesystem::path& path, const ModelParams& params) {
  const NetworkConfig& c = params.config;
  std::vector<double> cfg{static_cast<double>(c.layers), static_cast<double>(c.cheb_order),
                          static_cast<double>(c.kernel_width), static_cast<double>(c.seed),
                          c.input_base_mw, c.angle_scale};
  for (std::size_t w : c.channels) cfg.push_back(static_cast<double>(w));
  ad::ParameterSet all;
  all.push_back({kConfigRecord, Tensor({cfg.size()}, cfg)});
  for (const auto& t : params.tensors) all.push_back(t);
  ad::save_checkpoint(path, all);
}

ModelParams load_model(const std::filesystem::path& path) {
  ad::ParameterSet all = ad::load_checkpoint(path);
  if (all.empty() || all.front().name != kConfigRecord || all.front().value.size() < 7) {
    throw std::runtime_error("checkpoint " + path.string() + " has no network config record");
  }
  const Tensor& cfg = all.front().value;
  ModelParams p;
  p.config.layers = static_cast<std::size_t>(cfg[0]);
  p.config.cheb_order = static_cast<std::size_t>(cfg[1]);
  p.config.kernel_width = static_cast<std::size_t>(cfg[2]);
  p.config.seed = static_cast<std::uint64_t>(cfg[3]);
  p.config.input_base_mw = cfg[4];
  p.config.angle_scale = cfg[5];
  p.config.channels.clear();
  for (std::size_t i = 6; i < cfg.size(); ++i) p.config.channels.push_back(static_cast<std::size_t>(cfg[i]));
  p.config.validate();
  p.tensors.assign(all.begin() + 1, all.end());
  if (p.tensors.size() != p.config.layers * 6 + 8) {
    throw std::runtime_error("checkpoint " + path.string() + " has " +
                             std::to_string(p.tensors.size()) + " tensors, config implies " +
                             std::to_string(p.config.layers * 6 + 8));
  }
  p.generator_slots = p.get("head.dispatch").dim(1);
  p.renewable_slots = p.get("head.renewable").dim(1);
  return p;
}

void write_model_card(const std::filesystem::path& path, const ModelParams& params,
                      const std::vector<std::string>& provenance) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  const NetworkConfig& c = params.config;
  out << "STGCN unit commitment model\n";
  out << "blocks " << c.layers << "\n";
  out << "chebyshev_order " << c.cheb_order << "\n";
  out << "temporal_kernel " << c.kernel_width << "\n";
  out << "channels";
  for (std::size_t w : c.channels) out << ' ' << w;
  out << "\n";
  out << "input_base_mw " << grid::format_double(c.input_base_mw) << "\n";
  out << "angle_scale " << grid::format_double(c.angle_scale) << "\n";
  out << "seed " << c.seed << "\n";
  out << "generator_slots " << params.generator_slots << "\n";
  out << "renewable_slots " << params.renewable_slots << "\n";
  out << "parameters " << params.parameter_count() << "\n";
  for (const auto& line : provenance) out << "provenance " << line << "\n";
}

}  // namespace fpg::net
