#include "fpg/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>

#include "fpg/grid/io.hpp"

namespace fpg::train {

using ad::Tensor;
using ad::Var;

const char* method_name(Method m) {
  switch (m) {
    case Method::M0: return "m0";
    case Method::M1: return "m1";
    case Method::M2: return "m2";
    case Method::Ours: return "ours";
  }
  return "unknown";
}

Method method_from_name(const std::string& name) {
  for (Method m : {Method::M0, Method::M1, Method::M2, Method::Ours})
    if (name == method_name(m)) return m;
  throw std::invalid_argument("unknown method '" + name + "' (expected m0, m1, m2 or ours)");
}

void TrainConfig::validate() const {
  if (method == Method::M0) throw std::invalid_argument("train: m0 is not a learned method");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("train: learning rate must be > 0");
  if (inner_steps < 1) throw std::invalid_argument("train: inner steps must be >= 1");
  if (!(rho > 0.0)) throw std::invalid_argument("train: rho must be > 0");
  if (!(rho_growth >= 1.0)) throw std::invalid_argument("train: rho growth must be >= 1");
  if (!(log_eps > 0.0 && log_eps < 0.5)) throw std::invalid_argument("train: log eps must be in (0, 0.5)");
  if (shots < 1) throw std::invalid_argument("train: shots must be >= 1");
  if (!(grad_clip >= 0.0)) throw std::invalid_argument("train: gradient clip must be >= 0");
  if (!(scales.power_base_mw > 0.0 && scales.cost_base > 0.0)) {
    throw std::invalid_argument("train: loss scales must be > 0");
  }
}

double EpochRecord::violation_total() const {
  return std::accumulate(violation.begin(), violation.end(), 0.0);
}

namespace {

bool uses_labels(Method m) { return m == Method::M1 || m == Method::Ours; }
bool uses_lagrangian(Method m) { return m == Method::M2 || m == Method::Ours; }

struct StepGraph {
  Var total, sup, obj, lin, quad;
};

StepGraph build_step(ad::Tape& tape, const net::BoundParams& bound, const net::ModelParams& model,
                     const net::NetContext& context, const std::vector<const grid::Scenario*>& batch,
                     const FewShotSet& shots, const uc::UcParams& params, const TrainConfig& config,
                     const DualState& duals) {
  StepGraph s;
  const Var zero = tape.constant(Tensor::scalar(0.0));
  s.sup = s.obj = s.lin = s.quad = zero;
  Var total = zero;
  if (uses_labels(config.method) && shots.size() > 0) {
    Var acc = zero;
    for (std::size_t i = 0; i < shots.size(); ++i) {
      const net::Decision d = net::decide(tape, bound, model, context, shots.scenarios[i]);
      acc = ad::add(acc, supervised_loss(tape, d, shots.labels[i], config.log_eps, config.scales));
    }
    s.sup = ad::scale(acc, 1.0 / static_cast<double>(shots.size()));
    total = ad::add(total, s.sup);
  }
  if (uses_lagrangian(config.method) && !batch.empty()) {
    Var obj = zero, lin = zero, quad = zero;
    for (const grid::Scenario* sc : batch) {
      const net::Decision d = net::decide(tape, bound, model, context, *sc);
      const ResidualGraph rg =
          residual_graph(tape, decision_vars(d), context.grid(), *sc, params, config.scales);
      const AlmTerms t = alm_loss(rg.residuals, rg.objective, duals);
      obj = ad::add(obj, rg.objective);
      lin = ad::add(lin, t.linear);
      quad = ad::add(quad, t.quadratic);
    }
    const double inv = 1.0 / static_cast<double>(batch.size());
    s.obj = ad::scale(obj, inv);
    s.lin = ad::scale(lin, inv);
    s.quad = ad::scale(quad, inv);
    total = ad::add(total, ad::add(s.obj, ad::add(s.lin, s.quad)));
  }
  s.total = total;
  return s;
}

StepLoss values_of(const StepGraph& g) {
  return {g.total.value()[0], g.sup.value()[0], g.obj.value()[0], g.lin.value()[0],
          g.quad.value()[0]};
}

std::vector<const grid::Scenario*> pointers(const std::vector<grid::Scenario>& v) {
  std::vector<const grid::Scenario*> out;
  for (const auto& s : v) out.push_back(&s);
  return out;
}

}  // namespace

StepLoss evaluate_loss(const net::NetContext& context, const std::vector<grid::Scenario>& batch,
                       const FewShotSet& shots, const uc::UcParams& params,
                       const TrainConfig& config, const DualState& duals,
                       const net::ModelParams& model) {
  ad::Tape tape;
  const net::BoundParams bound = net::bind(tape, model, false);
  return values_of(build_step(tape, bound, model, context, pointers(batch), shots, params, config, duals));
}

uc::ConstraintResiduals reported_residuals(const net::ModelParams& model,
                                           const net::NetContext& context,
                                           const grid::Scenario& scenario,
                                           const uc::UcParams& params) {
  const uc::UcDecision d = net::infer(model, context, scenario);
  return uc::all_residuals(d, context.grid(), scenario, params);
}

TrainResult train(const net::NetContext& context, const std::vector<grid::Scenario>& unlabeled,
                  const FewShotSet& shots, const uc::UcParams& params, const TrainConfig& config,
                  net::ModelParams initial, const EpochCallback& on_epoch) {
  config.validate();
  if (uses_labels(config.method) && shots.size() == 0) {
    throw std::invalid_argument("train: method " + std::string(method_name(config.method)) +
                                " needs labeled shots");
  }
  if (uses_lagrangian(config.method) && unlabeled.empty()) {
    throw std::invalid_argument("train: no unlabeled scenarios");
  }
  const std::size_t periods = unlabeled.empty() ? shots.scenarios.front().horizon()
                                                : unlabeled.front().horizon();
  TrainResult result;
  result.params = std::move(initial);
  // M1 keeps the multipliers and penalty at zero.
  result.duals = DualState::zeros(context.grid(), periods,
                                  uses_lagrangian(config.method) ? config.rho : 0.0);
  result.dual_trace.push_back(result.duals);

  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(unlabeled.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::size_t cursor = 0;
  const std::size_t batch_size =
      config.batch_size == 0 ? unlabeled.size() : std::min(config.batch_size, unlabeled.size());
  const std::size_t monitor_size =
      config.monitor_size == 0 ? unlabeled.size() : std::min(config.monitor_size, unlabeled.size());
  std::vector<const grid::Scenario*> monitor;
  for (std::size_t i = 0; i < monitor_size; ++i) monitor.push_back(&unlabeled[i]);
  if (monitor.empty()) {
    for (const auto& s : shots.scenarios) monitor.push_back(&s);
  }

  net::ModelParams last_good = result.params;
  for (std::size_t epoch = 1; epoch <= config.outer_iterations; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    for (std::size_t step = 0; step < config.inner_steps; ++step) {
      std::vector<const grid::Scenario*> batch;
      if (uses_lagrangian(config.method)) {
        for (std::size_t b = 0; b < batch_size; ++b) {
          if (cursor == order.size()) {
            std::shuffle(order.begin(), order.end(), rng);
            cursor = 0;
          }
          batch.push_back(&unlabeled[order[cursor++]]);
        }
      }
      ad::Tape tape;
      const net::BoundParams bound = net::bind(tape, result.params, true);
      const StepGraph g = build_step(tape, bound, result.params, context, batch, shots, params,
                                     config, result.duals);
      const StepLoss v = values_of(g);
      if (!std::isfinite(v.total) || std::abs(v.total) > kDivergenceLimit) {
        result.diverged = true;
        result.divergence = "epoch " + std::to_string(epoch) + " step " + std::to_string(step) +
                            ": loss " + grid::format_double(v.total);
        result.params = last_good;
        return result;
      }
      last_good = result.params;
      tape.backward(g.total);
      std::vector<Tensor> grads;
      double norm2 = 0.0;
      for (const Var& var : bound.vars) {
        grads.push_back(tape.grad(var));
        for (double x : grads.back().values()) norm2 += x * x;
      }
      if (!std::isfinite(norm2)) {
        result.diverged = true;
        result.divergence = "epoch " + std::to_string(epoch) + " step " + std::to_string(step) +
                            ": non-finite gradient";
        return result;
      }
      double factor = config.learning_rate;
      const double norm = std::sqrt(norm2);
      if (config.grad_clip > 0.0 && norm > config.grad_clip) factor *= config.grad_clip / norm;
      for (std::size_t p = 0; p < grads.size(); ++p) {
        Tensor& w = result.params.tensors[p].value;
        for (std::size_t i = 0; i < w.size(); ++i) w[i] -= factor * grads[p][i];
      }
      const double inv = 1.0 / static_cast<double>(config.inner_steps);
      rec.loss_total += v.total * inv;
      rec.loss_sup += v.sup * inv;
      rec.loss_obj += v.obj * inv;
      rec.loss_lin += v.lin * inv;
      rec.loss_quad += v.quad * inv;
    }

    // Dual step on the mean |f| of the training-form residuals, and the
    // reported-decision violations for the history.
    std::array<Tensor, kGroupCount> mean_abs;
    for (std::size_t g = 0; g < kGroupCount; ++g) mean_abs[g] = Tensor(result.duals.lambda[g].shape(), 0.0);
    const double inv = 1.0 / static_cast<double>(monitor.size());
    for (const grid::Scenario* sc : monitor) {
      ad::Tape tape;
      const net::BoundParams bound = net::bind(tape, result.params, false);
      const net::Decision d = net::decide(tape, bound, result.params, context, *sc);
      if (uses_lagrangian(config.method)) {
        const ResidualGraph rg =
            residual_graph(tape, decision_vars(d), context.grid(), *sc, params, config.scales);
        for (std::size_t g = 0; g < kGroupCount; ++g) {
          const Tensor& f = rg.residuals[g].value();
          for (std::size_t i = 0; i < f.size(); ++i) mean_abs[g][i] += std::abs(f[i]) * inv;
        }
      }
      const uc::ConstraintResiduals rep =
          uc::all_residuals(net::to_uc_decision(d), context.grid(), *sc, params);
      const auto fam = family_l1(rep);
      for (std::size_t f = 0; f < kFamilyCount; ++f) rec.violation[f] += fam[f] * inv;
    }
    if (uses_lagrangian(config.method)) dual_update(result.duals, mean_abs, config.rho_growth);
    result.dual_trace.push_back(result.duals);
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec, result.params);
  }
  return result;
}

void write_history_csv(std::ostream& out, const std::vector<EpochRecord>& history) {
  out << "epoch,loss_total,loss_sup,loss_lin,loss_quad,viol_balance,viol_reserve,viol_line,"
         "viol_bounds,viol_ramp,viol_updown\n";
  for (const auto& r : history) {
    out << r.epoch << ',' << grid::format_double(r.loss_total) << ','
        << grid::format_double(r.loss_sup) << ',' << grid::format_double(r.loss_lin) << ','
        << grid::format_double(r.loss_quad);
    for (double v : r.violation) out << ',' << grid::format_double(v);
    out << '\n';
  }
}

}  // namespace fpg::train
