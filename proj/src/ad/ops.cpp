#include "fpg/ad/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fpg::ad {
namespace {

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " +
                     shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  }
}

void require_same_tape(const char* op, Var a, Var b) {
  if (a.tape != b.tape) {
    throw std::invalid_argument(std::string(op) + ": operands on different tapes");
  }
}

// Elementwise unary op with derivative expressed through input x and output y.
template <typename F, typename DF>
Var unary(Var a, const char* name, F f, DF df) {
  Tape& tape = *a.tape;
  const Tensor& x = a.value();
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = f(x[i]);
  const std::size_t ia = a.id;
  return tape.record(name, std::move(y), {ia},
                     [ia, df](Tape& t, const Tensor& g) {
                       const Tensor& xv = t.value(ia);
                       Tensor& ga = t.grad_buffer(ia);
                       for (std::size_t i = 0; i < g.size(); ++i) {
                         ga[i] += g[i] * df(xv[i]);
                       }
                     });
}

struct AxisSplit {
  std::size_t outer = 1;
  std::size_t extent = 1;
  std::size_t inner = 1;
};

AxisSplit split_at(const Shape& shape, std::size_t axis) {
  AxisSplit s;
  for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
  s.extent = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

}  // namespace

Var add(Var a, Var b) {
  require_same_tape("add", a, b);
  require_same_shape("add", a.value(), b.value());
  Tensor y = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += bv[i];
  const std::size_t ia = a.id, ib = b.id;
  return a.tape->record("add", std::move(y), {ia, ib},
                        [ia, ib](Tape& t, const Tensor& g) {
                          if (t.requires_grad(ia)) {
                            Tensor& ga = t.grad_buffer(ia);
                            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                          }
                          if (t.requires_grad(ib)) {
                            Tensor& gb = t.grad_buffer(ib);
                            for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
                          }
                        });
}

Var sub(Var a, Var b) {
  require_same_tape("sub", a, b);
  require_same_shape("sub", a.value(), b.value());
  Tensor y = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] -= bv[i];
  const std::size_t ia = a.id, ib = b.id;
  return a.tape->record("sub", std::move(y), {ia, ib},
                        [ia, ib](Tape& t, const Tensor& g) {
                          if (t.requires_grad(ia)) {
                            Tensor& ga = t.grad_buffer(ia);
                            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                          }
                          if (t.requires_grad(ib)) {
                            Tensor& gb = t.grad_buffer(ib);
                            for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
                          }
                        });
}

Var mul(Var a, Var b) {
  require_same_tape("mul", a, b);
  require_same_shape("mul", a.value(), b.value());
  Tensor y = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= bv[i];
  const std::size_t ia = a.id, ib = b.id;
  return a.tape->record("mul", std::move(y), {ia, ib},
                        [ia, ib](Tape& t, const Tensor& g) {
                          const Tensor& av = t.value(ia);
                          const Tensor& bv2 = t.value(ib);
                          if (t.requires_grad(ia)) {
                            Tensor& ga = t.grad_buffer(ia);
                            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv2[i];
                          }
                          if (t.requires_grad(ib)) {
                            Tensor& gb = t.grad_buffer(ib);
                            for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
                          }
                        });
}

Var scale(Var a, double factor) {
  Tensor y = a.value();
  for (double& v : y.data()) v *= factor;
  const std::size_t ia = a.id;
  return a.tape->record("scale", std::move(y), {ia},
                        [ia, factor](Tape& t, const Tensor& g) {
                          Tensor& ga = t.grad_buffer(ia);
                          for (std::size_t i = 0; i < g.size(); ++i) ga[i] += factor * g[i];
                        });
}

Var add_scalar(Var a, double offset) {
  Tensor y = a.value();
  for (double& v : y.data()) v += offset;
  const std::size_t ia = a.id;
  return a.tape->record("add_scalar", std::move(y), {ia},
                        [ia](Tape& t, const Tensor& g) {
                          Tensor& ga = t.grad_buffer(ia);
                          for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                        });
}

Var neg(Var a) { return scale(a, -1.0); }

Var matmul(Var a, Var b) {
  require_same_tape("matmul", a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.rank() != 2 || bv.rank() != 2 || av.dim(1) != bv.dim(0)) {
    throw ShapeError("matmul: incompatible shapes " + shape_string(av.shape()) +
                     " and " + shape_string(bv.shape()));
  }
  const std::size_t m = av.dim(0), k = av.dim(1), n = bv.dim(1);
  Tensor y({m, n}, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = av[i * k + p];
      if (aip == 0.0) continue;
      const double* brow = &bv.data()[p * n];
      double* yrow = &y.data()[i * n];
      for (std::size_t j = 0; j < n; ++j) yrow[j] += aip * brow[j];
    }
  }
  const std::size_t ia = a.id, ib = b.id;
  return a.tape->record(
      "matmul", std::move(y), {ia, ib}, [ia, ib, m, k, n](Tape& t, const Tensor& g) {
        const Tensor& av2 = t.value(ia);
        const Tensor& bv2 = t.value(ib);
        if (t.requires_grad(ia)) {
          // dA = G * B^T
          Tensor& ga = t.grad_buffer(ia);
          for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t p = 0; p < k; ++p) {
              double acc = 0.0;
              for (std::size_t j = 0; j < n; ++j) acc += g[i * n + j] * bv2[p * n + j];
              ga[i * k + p] += acc;
            }
          }
        }
        if (t.requires_grad(ib)) {
          // dB = A^T * G
          Tensor& gb = t.grad_buffer(ib);
          for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t p = 0; p < k; ++p) {
              const double aip = av2[i * k + p];
              if (aip == 0.0) continue;
              for (std::size_t j = 0; j < n; ++j) gb[p * n + j] += aip * g[i * n + j];
            }
          }
        }
      });
}

Var transpose(Var a) {
  const Tensor& av = a.value();
  if (av.rank() != 2) {
    throw ShapeError("transpose: expected rank 2, got " + shape_string(av.shape()));
  }
  const std::size_t r = av.dim(0), c = av.dim(1);
  Tensor y({c, r});
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) y[j * r + i] = av[i * c + j];
  const std::size_t ia = a.id;
  return a.tape->record("transpose", std::move(y), {ia},
                        [ia, r, c](Tape& t, const Tensor& g) {
                          Tensor& ga = t.grad_buffer(ia);
                          for (std::size_t i = 0; i < r; ++i)
                            for (std::size_t j = 0; j < c; ++j) ga[i * c + j] += g[j * r + i];
                        });
}

Var reshape(Var a, Shape shape) {
  Tensor y = a.value().reshaped(std::move(shape));
  const std::size_t ia = a.id;
  return a.tape->record("reshape", std::move(y), {ia},
                        [ia](Tape& t, const Tensor& g) {
                          Tensor& ga = t.grad_buffer(ia);
                          for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                        });
}

Var sum(Var a) {
  double total = 0.0;
  for (double v : a.value().data()) total += v;
  const std::size_t ia = a.id;
  return a.tape->record("sum", Tensor::scalar(total), {ia},
                        [ia](Tape& t, const Tensor& g) {
                          Tensor& ga = t.grad_buffer(ia);
                          for (double& v : ga.data()) v += g[0];
                        });
}

Var mean(Var a) {
  const double n = static_cast<double>(a.value().size());
  return scale(sum(a), 1.0 / n);
}

Var square(Var a) {
  return unary(a, "square", [](double x) { return x * x; },
               [](double x) { return 2.0 * x; });
}

Var abs(Var a) {
  return unary(a, "abs", [](double x) { return std::abs(x); },
               [](double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

Var max0(Var a) {
  return unary(a, "max0", [](double x) { return x > 0.0 ? x : 0.0; },
               [](double x) { return x > 0.0 ? 1.0 : 0.0; });
}

Var relu(Var a) {
  return unary(a, "relu", [](double x) { return x > 0.0 ? x : 0.0; },
               [](double x) { return x > 0.0 ? 1.0 : 0.0; });
}

Var log(Var a) {
  return unary(a, "log", [](double x) { return std::log(std::max(x, kLogFloor)); },
               [](double x) { return 1.0 / std::max(x, kLogFloor); });
}

Var tanh(Var a) {
  return unary(a, "tanh", [](double x) { return std::tanh(x); },
               [](double x) {
                 const double th = std::tanh(x);
                 return 1.0 - th * th;
               });
}

Var sigmoid(Var a) {
  return unary(a, "sigmoid", [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
               [](double x) {
                 const double s = 1.0 / (1.0 + std::exp(-x));
                 return s * (1.0 - s);
               });
}

Var clamp(Var a, double lo, double hi) {
  return unary(a, "clamp", [lo, hi](double x) { return std::clamp(x, lo, hi); },
               [lo, hi](double x) { return (x > lo && x < hi) ? 1.0 : 0.0; });
}

Var concat(const std::vector<Var>& parts, std::size_t axis) {
  if (parts.empty()) throw ShapeError("concat: no operands");
  const Shape& first = parts.front().shape();
  if (axis >= first.size()) throw ShapeError("concat: axis out of range");
  Shape out_shape = first;
  out_shape[axis] = 0;
  std::vector<std::size_t> ids;
  std::vector<std::size_t> extents;
  for (const Var& p : parts) {
    require_same_tape("concat", parts.front(), p);
    Shape s = p.shape();
    if (s.size() != first.size()) {
      throw ShapeError("concat: rank mismatch " + shape_string(first) + " vs " +
                       shape_string(s));
    }
    for (std::size_t d = 0; d < s.size(); ++d) {
      if (d != axis && s[d] != first[d]) {
        throw ShapeError("concat: shape mismatch " + shape_string(first) + " vs " +
                         shape_string(s));
      }
    }
    out_shape[axis] += s[axis];
    ids.push_back(p.id);
    extents.push_back(s[axis]);
  }
  const AxisSplit outs = split_at(out_shape, axis);
  Tensor y(out_shape);
  std::size_t offset = 0;
  for (std::size_t pi = 0; pi < parts.size(); ++pi) {
    const Tensor& pv = parts[pi].value();
    const std::size_t ext = extents[pi];
    for (std::size_t o = 0; o < outs.outer; ++o)
      for (std::size_t e = 0; e < ext; ++e)
        for (std::size_t in = 0; in < outs.inner; ++in)
          y[(o * outs.extent + offset + e) * outs.inner + in] =
              pv[(o * ext + e) * outs.inner + in];
    offset += ext;
  }
  return parts.front().tape->record(
      "concat", std::move(y), ids, [ids, extents, outs](Tape& t, const Tensor& g) {
        std::size_t offset2 = 0;
        for (std::size_t pi = 0; pi < ids.size(); ++pi) {
          const std::size_t ext = extents[pi];
          if (t.requires_grad(ids[pi])) {
            Tensor& gp = t.grad_buffer(ids[pi]);
            for (std::size_t o = 0; o < outs.outer; ++o)
              for (std::size_t e = 0; e < ext; ++e)
                for (std::size_t in = 0; in < outs.inner; ++in)
                  gp[(o * ext + e) * outs.inner + in] +=
                      g[(o * outs.extent + offset2 + e) * outs.inner + in];
          }
          offset2 += ext;
        }
      });
}

Var slice(Var a, std::size_t axis, std::size_t begin, std::size_t end) {
  const Shape& in_shape = a.shape();
  if (axis >= in_shape.size() || begin >= end || end > in_shape[axis]) {
    throw ShapeError("slice: range [" + std::to_string(begin) + ", " +
                     std::to_string(end) + ") on axis " + std::to_string(axis) +
                     " invalid for " + shape_string(in_shape));
  }
  const AxisSplit ins = split_at(in_shape, axis);
  Shape out_shape = in_shape;
  out_shape[axis] = end - begin;
  const std::size_t ext = end - begin;
  const Tensor& av = a.value();
  Tensor y(out_shape);
  for (std::size_t o = 0; o < ins.outer; ++o)
    for (std::size_t e = 0; e < ext; ++e)
      for (std::size_t in = 0; in < ins.inner; ++in)
        y[(o * ext + e) * ins.inner + in] =
            av[(o * ins.extent + begin + e) * ins.inner + in];
  const std::size_t ia = a.id;
  return a.tape->record("slice", std::move(y), {ia},
                        [ia, ins, ext, begin](Tape& t, const Tensor& g) {
                          Tensor& ga = t.grad_buffer(ia);
                          for (std::size_t o = 0; o < ins.outer; ++o)
                            for (std::size_t e = 0; e < ext; ++e)
                              for (std::size_t in = 0; in < ins.inner; ++in)
                                ga[(o * ins.extent + begin + e) * ins.inner + in] +=
                                    g[(o * ext + e) * ins.inner + in];
                        });
}

Var squared_norm(Var a) {
  double total = 0.0;
  for (double v : a.value().data()) total += v * v;
  const std::size_t ia = a.id;
  return a.tape->record("squared_norm", Tensor::scalar(total), {ia},
                        [ia](Tape& t, const Tensor& g) {
                          const Tensor& av = t.value(ia);
                          Tensor& ga = t.grad_buffer(ia);
                          for (std::size_t i = 0; i < av.size(); ++i)
                            ga[i] += 2.0 * av[i] * g[0];
                        });
}

}  // namespace fpg::ad
