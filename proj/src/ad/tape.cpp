#include "fpg/ad/tape.hpp"

#include <stdexcept>
#include <string>

namespace fpg::ad {

const Tensor& Var::value() const { return tape->value(id); }

Var Tape::constant(Tensor value) {
  nodes_.push_back(Node{"constant", std::move(value), {}, {}, {}, false});
  return Var{this, nodes_.size() - 1};
}

Var Tape::variable(Tensor value) {
  nodes_.push_back(Node{"variable", std::move(value), {}, {}, {}, true});
  return Var{this, nodes_.size() - 1};
}

Var Tape::record(std::string_view op, Tensor value,
                 std::vector<std::size_t> inputs, Backward backward) {
#ifndef NDEBUG
  if (!value.all_finite()) {
    throw std::domain_error("non-finite value produced by op " +
                            std::string(op));
  }
#endif
  bool needs = false;
  for (std::size_t in : inputs) needs = needs || nodes_[in].requires_grad;
  if (!needs) backward = nullptr;
  nodes_.push_back(Node{op, std::move(value), {}, std::move(inputs),
                        std::move(backward), needs});
  return Var{this, nodes_.size() - 1};
}

Tensor Tape::grad(Var v) const {
  const Node& node = nodes_[v.id];
  if (node.grad.empty()) return Tensor(node.value.shape(), 0.0);
  return node.grad;
}

Tensor& Tape::grad_buffer(std::size_t id) {
  Node& node = nodes_[id];
  if (node.grad.empty()) node.grad = Tensor(node.value.shape(), 0.0);
  return node.grad;
}

void Tape::backward(Var output) {
  if (output.tape != this) throw std::invalid_argument("backward: foreign var");
  if (nodes_[output.id].value.size() != 1) {
    throw ShapeError("backward target must be a scalar, got " +
                     shape_string(nodes_[output.id].value.shape()));
  }
  for (auto& node : nodes_) node.grad = Tensor();
  grad_buffer(output.id)[0] = 1.0;
  visits_ = 0;
  for (std::size_t i = output.id + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (!node.backward || node.grad.empty()) continue;
    ++visits_;
    // The closure may grow other grad buffers but never this node's.
    node.backward(*this, node.grad);
  }
}

}  // namespace fpg::ad
