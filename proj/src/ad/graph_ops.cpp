#include <cmath>
#include <memory>
#include <string>

#include <Eigen/Dense>

#include "fpg/ad/ops.hpp"

namespace fpg::ad {

namespace {

using MatMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using ConstMatMap =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using VecMap = Eigen::Map<Eigen::VectorXd>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

Eigen::Index to_index(std::size_t n) { return static_cast<Eigen::Index>(n); }

}  // namespace

Var causal_conv1d(Var input, Var kernel, Var bias) {
  const Tensor& x = input.value();
  const Tensor& w = kernel.value();
  const Tensor& b = bias.value();
  if (x.rank() != 3 || w.rank() != 3 || b.rank() != 1 || w.dim(2) != x.dim(1) ||
      b.dim(0) != w.dim(1)) {
    throw ShapeError("causal_conv1d: input " + shape_string(x.shape()) + ", kernel " +
                     shape_string(w.shape()) + ", bias " + shape_string(b.shape()));
  }
  const std::size_t periods = x.dim(0), cin = x.dim(1), nodes = x.dim(2);
  const std::size_t width = w.dim(0), cout = w.dim(1);
  if (width > periods) {
    throw ShapeError("causal_conv1d: kernel width " + std::to_string(width) +
                     " exceeds horizon " + std::to_string(periods));
  }
  Tensor y({periods, cout, nodes});
  for (std::size_t t = 0; t < periods; ++t) {
    MatMap yt(&y.data()[t * cout * nodes], to_index(cout), to_index(nodes));
    yt.colwise() = ConstVecMap(b.data().data(), to_index(cout));
    for (std::size_t k = 0; k < width && k <= t; ++k) {
      yt.noalias() += ConstMatMap(&w.data()[k * cout * cin], to_index(cout), to_index(cin)) *
                      ConstMatMap(&x.data()[(t - k) * cin * nodes], to_index(cin), to_index(nodes));
    }
  }
  const std::size_t ix = input.id, iw = kernel.id, ib = bias.id;
  return input.tape->record(
      "causal_conv1d", std::move(y), {ix, iw, ib},
      [=](Tape& tape, const Tensor& g) {
        const Tensor& xv = tape.value(ix);
        const Tensor& wv = tape.value(iw);
        const bool need_x = tape.requires_grad(ix);
        const bool need_w = tape.requires_grad(iw);
        Tensor* gx = need_x ? &tape.grad_buffer(ix) : nullptr;
        Tensor* gw = need_w ? &tape.grad_buffer(iw) : nullptr;
        if (tape.requires_grad(ib)) {
          VecMap gb(tape.grad_buffer(ib).data().data(), to_index(cout));
          for (std::size_t t = 0; t < periods; ++t)
            gb += ConstMatMap(&g.data()[t * cout * nodes], to_index(cout), to_index(nodes)).rowwise().sum();
        }
        for (std::size_t t = 0; t < periods; ++t) {
          const ConstMatMap gt(&g.data()[t * cout * nodes], to_index(cout), to_index(nodes));
          for (std::size_t k = 0; k < width && k <= t; ++k) {
            if (gw) {
              MatMap(&gw->data()[k * cout * cin], to_index(cout), to_index(cin)).noalias() +=
                  gt * ConstMatMap(&xv.data()[(t - k) * cin * nodes], to_index(cin), to_index(nodes)).transpose();
            }
            if (gx) {
              MatMap(&gx->data()[(t - k) * cin * nodes], to_index(cin), to_index(nodes)).noalias() +=
                  ConstMatMap(&wv.data()[k * cout * cin], to_index(cout), to_index(cin)).transpose() * gt;
            }
          }
        }
      });
}

Var glu(Var a, Var b) { return mul(a, sigmoid(b)); }

std::vector<Tensor> chebyshev_basis(const Tensor& scaled_laplacian, std::size_t order) {
  if (order < 1) throw std::invalid_argument("chebyshev_basis: order must be >= 1");
  if (scaled_laplacian.rank() != 2 || scaled_laplacian.dim(0) != scaled_laplacian.dim(1)) {
    throw ShapeError("chebyshev_basis: expected square matrix, got " +
                     shape_string(scaled_laplacian.shape()));
  }
  const std::size_t n = scaled_laplacian.dim(0);
  std::vector<Tensor> basis;
  basis.reserve(order);
  Tensor identity({n, n}, 0.0);
  for (std::size_t i = 0; i < n; ++i) identity.at(i, i) = 1.0;
  basis.push_back(identity);
  if (order > 1) basis.push_back(scaled_laplacian);
  for (std::size_t k = 2; k < order; ++k) {
    const Tensor& prev = basis[k - 1];
    const Tensor& prev2 = basis[k - 2];
    Tensor next({n, n}, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t m = 0; m < n; ++m) {
        const double l = scaled_laplacian.at(i, m);
        if (l == 0.0) continue;
        for (std::size_t j = 0; j < n; ++j) next.at(i, j) += 2.0 * l * prev.at(m, j);
      }
    for (std::size_t i = 0; i < next.size(); ++i) next[i] -= prev2[i];
    basis.push_back(std::move(next));
  }
  return basis;
}

Var cheb_graph_conv(Var input, Var theta, Var bias, const Tensor& scaled_laplacian) {
  const Tensor& x = input.value();
  const Tensor& th = theta.value();
  const Tensor& b = bias.value();
  if (th.rank() != 3 || th.dim(0) < 1) {
    throw std::invalid_argument("cheb_graph_conv: order K must be >= 1, theta " +
                                shape_string(th.shape()));
  }
  if (x.rank() != 3 || th.dim(1) != x.dim(1) || b.rank() != 1 || b.dim(0) != th.dim(2) ||
      scaled_laplacian.rank() != 2 || scaled_laplacian.dim(0) != x.dim(2) ||
      scaled_laplacian.dim(1) != x.dim(2)) {
    throw ShapeError("cheb_graph_conv: input " + shape_string(x.shape()) + ", theta " +
                     shape_string(th.shape()) + ", bias " + shape_string(b.shape()) +
                     ", laplacian " + shape_string(scaled_laplacian.shape()));
  }
  const std::size_t periods = x.dim(0), cin = x.dim(1), nodes = x.dim(2);
  const std::size_t order = th.dim(0), cout = th.dim(2);

  auto basis = std::make_shared<std::vector<Tensor>>(chebyshev_basis(scaled_laplacian, order));
  const auto rows = to_index(periods * cin), n = to_index(nodes);
  // filtered[k] holds T_k applied to every (period, channel) row of x.
  auto filtered = std::make_shared<std::vector<Tensor>>();
  filtered->reserve(order);
  const ConstMatMap xm(x.data().data(), rows, n);
  for (std::size_t k = 0; k < order; ++k) {
    Tensor z({periods, cin, nodes});
    MatMap(z.data().data(), rows, n).noalias() =
        xm * ConstMatMap((*basis)[k].data().data(), n, n).transpose();
    filtered->push_back(std::move(z));
  }

  Tensor y({periods, cout, nodes});
  for (std::size_t t = 0; t < periods; ++t) {
    MatMap yt(&y.data()[t * cout * nodes], to_index(cout), n);
    yt.colwise() = ConstVecMap(b.data().data(), to_index(cout));
    for (std::size_t k = 0; k < order; ++k) {
      yt.noalias() += ConstMatMap(&th.data()[k * cin * cout], to_index(cin), to_index(cout)).transpose() *
                      ConstMatMap(&(*filtered)[k].data()[t * cin * nodes], to_index(cin), n);
    }
  }

  const std::size_t ix = input.id, ith = theta.id, ib = bias.id;
  return input.tape->record(
      "cheb_graph_conv", std::move(y), {ix, ith, ib},
      [=](Tape& tape, const Tensor& g) {
        const Tensor& thv = tape.value(ith);
        if (tape.requires_grad(ib)) {
          VecMap gb(tape.grad_buffer(ib).data().data(), to_index(cout));
          for (std::size_t t = 0; t < periods; ++t)
            gb += ConstMatMap(&g.data()[t * cout * nodes], to_index(cout), n).rowwise().sum();
        }
        const bool need_th = tape.requires_grad(ith), need_x = tape.requires_grad(ix);
        Tensor gz({periods, cin, nodes});
        for (std::size_t k = 0; k < order; ++k) {
          const Tensor& z = (*filtered)[k];
          const ConstMatMap thk(&thv.data()[k * cin * cout], to_index(cin), to_index(cout));
          for (std::size_t t = 0; t < periods; ++t) {
            const ConstMatMap gt(&g.data()[t * cout * nodes], to_index(cout), n);
            if (need_th) {
              MatMap(&tape.grad_buffer(ith).data()[k * cin * cout], to_index(cin), to_index(cout)).noalias() +=
                  ConstMatMap(&z.data()[t * cin * nodes], to_index(cin), n) * gt.transpose();
            }
            if (need_x) MatMap(&gz.data()[t * cin * nodes], to_index(cin), n).noalias() = thk * gt;
          }
          if (need_x) {
            MatMap(tape.grad_buffer(ix).data().data(), rows, n).noalias() +=
                ConstMatMap(gz.data().data(), rows, n) * ConstMatMap((*basis)[k].data().data(), n, n);
          }
        }
      });
}

Var sign_ste(Var squashed) {
  const Tensor& x = squashed.value();
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0.0 ? 1.0 : 0.0;
  const std::size_t ix = squashed.id;
  return squashed.tape->record("sign_ste", std::move(y), {ix},
                               [ix](Tape& tape, const Tensor& g) {
                                 const Tensor& xv = tape.value(ix);
                                 Tensor& gx = tape.grad_buffer(ix);
                                 for (std::size_t i = 0; i < g.size(); ++i) {
                                   if (xv[i] >= -0.5 && xv[i] <= 0.5) gx[i] += g[i];
                                 }
                               });
}

Var ste_sign(Var logits) { return sign_ste(tanh(logits)); }

}  // namespace fpg::ad
