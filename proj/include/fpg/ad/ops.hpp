#pragma once

#include <cstddef>
#include <vector>

#include "fpg/ad/tape.hpp"

namespace fpg::ad {

// Elementwise binary ops require identical shapes.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);

Var scale(Var a, double factor);
Var add_scalar(Var a, double offset);
Var neg(Var a);

/// [m x k] * [k x n]
Var matmul(Var a, Var b);
/// 2-D transpose.
Var transpose(Var a);
Var reshape(Var a, Shape shape);

Var sum(Var a);
Var mean(Var a);
Var square(Var a);
Var abs(Var a);
/// Hinge max(0, x). The derivative at 0 is taken as 0.
Var max0(Var a);
Var relu(Var a);
/// Natural log; arguments below kLogFloor are evaluated at kLogFloor.
Var log(Var a);
Var tanh(Var a);
Var sigmoid(Var a);
/// Clamp into [lo, hi]; gradient passes only strictly inside.
Var clamp(Var a, double lo, double hi);

/// Concatenate along `axis`; all other extents must agree.
Var concat(const std::vector<Var>& parts, std::size_t axis);
/// Half-open range [begin, end) along `axis`.
Var slice(Var a, std::size_t axis, std::size_t begin, std::size_t end);

/// Sum of squares.
Var squared_norm(Var a);

inline constexpr double kLogFloor = 1e-300;

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }

// ---------------------------------------------------------------------------
// Spatio-temporal ops. Feature tensors are laid out [period x channel x node].

/// Causal convolution along the period axis.
///
///   out[t][o][n] = bias[o] + sum_k sum_c kernel[k][o][c] * in[t-k][c][n]
///
/// with in[t-k] = 0 for t-k < 0, so the output keeps the input horizon.
/// `kernel` is [width x out x in], `bias` is [out].
Var causal_conv1d(Var input, Var kernel, Var bias);

/// Gated linear unit a * sigmoid(b).
Var glu(Var a, Var b);

/// Chebyshev basis T_0..T_{order-1} of a scaled Laplacian via the
/// three-term recurrence.
std::vector<Tensor> chebyshev_basis(const Tensor& scaled_laplacian,
                                    std::size_t order);

/// Spectral graph convolution
///
///   out[t][o][:] = bias[o] + sum_k sum_c theta[k][c][o] * T_k(L) in[t][c][:]
///
/// `theta` is [order x in x out], `bias` is [out], `scaled_laplacian` is a
/// constant [node x node] matrix with spectrum in [-1, 1].
Var cheb_graph_conv(Var input, Var theta, Var bias,
                    const Tensor& scaled_laplacian);

/// Binarizer applied to tanh outputs: 1 where x > 0, else 0. The backward
/// pass uses the straight-through window: gradient 1 for x in [-0.5, 0.5],
/// 0 outside.
Var sign_ste(Var squashed);

/// sign_ste(tanh(s)); records the tanh node separately so the total
/// derivative is window(tanh(s)) * (1 - tanh(s)^2).
Var ste_sign(Var logits);

}  // namespace fpg::ad
