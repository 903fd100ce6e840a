#pragma once

// Central finite-difference oracle for the autodiff tests. Independent of the
// backward closures: it only ever evaluates forward values.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "fpg/ad/tape.hpp"

namespace fpg::testing {

using Builder = std::function<ad::Var(ad::Tape&, const std::vector<ad::Var>&)>;

struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
};

inline double relative_error(double a, double b, double floor = 1e-2) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

inline double evaluate(const Builder& build, const std::vector<ad::Tensor>& inputs) {
  ad::Tape tape;
  std::vector<ad::Var> vars;
  for (const auto& t : inputs) vars.push_back(tape.constant(t));
  return build(tape, vars).value()[0];
}

/// Compares reverse-mode gradients of every input element against central
/// differences with step h.
inline GradCheck check_gradients(const Builder& build, std::vector<ad::Tensor> inputs,
                                 double h = 1e-6) {
  ad::Tape tape;
  std::vector<ad::Var> vars;
  for (const auto& t : inputs) vars.push_back(tape.variable(t));
  ad::Var out = build(tape, vars);
  tape.backward(out);
  GradCheck result;
  for (std::size_t v = 0; v < inputs.size(); ++v) {
    const ad::Tensor analytic = tape.grad(vars[v]);
    for (std::size_t i = 0; i < inputs[v].size(); ++i) {
      const double x0 = inputs[v][i];
      inputs[v][i] = x0 + h;
      const double fp = evaluate(build, inputs);
      inputs[v][i] = x0 - h;
      const double fm = evaluate(build, inputs);
      inputs[v][i] = x0;
      const double numeric = (fp - fm) / (2.0 * h);
      result.max_rel_error =
          std::max(result.max_rel_error, relative_error(analytic[i], numeric));
      ++result.checked;
    }
  }
  return result;
}

}  // namespace fpg::testing
