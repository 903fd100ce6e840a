#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <string_view>
#include <vector>

#include "fpg/ad/tensor.hpp"

namespace fpg::ad {

class Tape;

/// Handle to a node recorded on a tape.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
};

/// Append-only record of a computation for reverse-mode differentiation.
///
/// Every op appends one node holding its forward value and, when any input
/// requires a gradient, a closure that pushes the output gradient back into
/// the inputs. Nodes are stored in a deque so references to values stay valid
/// while the tape grows. One tape belongs to one thread.
class Tape {
 public:
  using Backward = std::function<void(Tape&, const Tensor& out_grad)>;

  Var constant(Tensor value);
  Var variable(Tensor value);

  /// Appends an op node. `backward` is dropped when no input needs a gradient.
  Var record(std::string_view op, Tensor value, std::vector<std::size_t> inputs,
             Backward backward);

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  const Tensor& value(Var v) const { return nodes_[v.id].value; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }

  /// Gradient of the last backward() target with respect to `v`. Zero if `v`
  /// did not contribute.
  Tensor grad(Var v) const;

  /// Accumulation buffer used by backward closures.
  Tensor& grad_buffer(std::size_t id);

  /// Seeds d(output)/d(output) = 1 and visits the recorded nodes in reverse.
  /// `output` must hold a single element.
  void backward(Var output);

  std::size_t size() const noexcept { return nodes_.size(); }
  std::string_view op_name(std::size_t id) const { return nodes_[id].op; }
  const std::vector<std::size_t>& inputs(std::size_t id) const {
    return nodes_[id].inputs;
  }
  /// Number of closures run by the last backward() call.
  std::size_t backward_visits() const noexcept { return visits_; }

 private:
  struct Node {
    std::string_view op;
    Tensor value;
    Tensor grad;
    std::vector<std::size_t> inputs;
    Backward backward;
    bool requires_grad = false;
  };
  std::deque<Node> nodes_;
  std::size_t visits_ = 0;
};

}  // namespace fpg::ad
