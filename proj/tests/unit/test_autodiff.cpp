#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "fpg/ad/checkpoint.hpp"
#include "fpg/ad/ops.hpp"
#include "support/finite_diff.hpp"

using namespace fpg::ad;
using fpg::testing::check_gradients;

namespace {

// Uniform values in [-span, span], pushed at least `gap` away from zero so
// hinge/abs/sign kinks are never straddled by the finite-difference stencil.
Tensor random_tensor(std::mt19937_64& rng, Shape shape, double span = 1.0, double gap = 1e-3) {
  std::uniform_real_distribution<double> dist(-span, span);
  Tensor t(std::move(shape));
  for (double& v : t.data()) {
    double x = dist(rng);
    if (std::abs(x) < gap) x = x < 0 ? -gap - 0.01 : gap + 0.01;
    v = x;
  }
  return t;
}

Tensor positive_tensor(std::mt19937_64& rng, Shape shape) {
  std::uniform_real_distribution<double> dist(0.2, 2.0);
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = dist(rng);
  return t;
}

constexpr double kTol = 1e-4;

}  // namespace

TEST_CASE("square derivative at 3 is 6") {
  Tape tape;
  Var x = tape.variable(Tensor::scalar(3.0));
  tape.backward(sum(square(x)));
  CHECK(tape.grad(x)[0] == doctest::Approx(6.0));
}

TEST_CASE("hinge derivative on both sides") {
  for (auto [at, expected] : {std::pair{-1.0, 0.0}, std::pair{2.0, 1.0}}) {
    Tape tape;
    Var x = tape.variable(Tensor::scalar(at));
    tape.backward(sum(max0(x)));
    CHECK(tape.grad(x)[0] == expected);
  }
}

TEST_CASE("sum distributes unit gradient to every element") {
  Tape tape;
  Var x = tape.variable(Tensor({2, 3, 4}, 0.7));
  tape.backward(sum(x));
  const Tensor grad = tape.grad(x);
  for (double g : grad.data()) CHECK(g == 1.0);
}

TEST_CASE("every elementwise op matches central differences") {
  std::mt19937_64 rng(7);
  const Shape s{3, 4};
  struct Case {
    const char* name;
    fpg::testing::Builder build;
    bool positive;
  };
  const std::vector<Case> cases = {
      {"add", [](Tape&, const std::vector<Var>& v) { return sum(square(v[0] + v[1])); }, false},
      {"sub", [](Tape&, const std::vector<Var>& v) { return sum(square(v[0] - v[1])); }, false},
      {"mul", [](Tape&, const std::vector<Var>& v) { return sum(v[0] * v[1]); }, false},
      {"scale", [](Tape&, const std::vector<Var>& v) { return sum(square(scale(v[0], -2.5))); }, false},
      {"add_scalar", [](Tape&, const std::vector<Var>& v) { return sum(square(add_scalar(v[0], 0.3))); }, false},
      {"mean", [](Tape&, const std::vector<Var>& v) { return mean(square(v[1])); }, false},
      {"abs", [](Tape&, const std::vector<Var>& v) { return sum(abs(v[0]) * v[1]); }, false},
      {"max0", [](Tape&, const std::vector<Var>& v) { return sum(max0(v[0]) * v[1]); }, false},
      {"relu", [](Tape&, const std::vector<Var>& v) { return sum(relu(v[0]) * v[1]); }, false},
      {"log", [](Tape&, const std::vector<Var>& v) { return sum(log(v[0]) * v[1]); }, true},
      {"tanh", [](Tape&, const std::vector<Var>& v) { return sum(tanh(v[0]) * v[1]); }, false},
      {"sigmoid", [](Tape&, const std::vector<Var>& v) { return sum(sigmoid(v[0]) * v[1]); }, false},
      {"clamp", [](Tape&, const std::vector<Var>& v) { return sum(clamp(v[0], -0.5, 0.5) * v[1]); }, false},
      {"squared_norm", [](Tape&, const std::vector<Var>& v) { return squared_norm(v[0] * v[1]); }, false},
      {"transpose", [](Tape&, const std::vector<Var>& v) { return sum(square(transpose(v[0]))); }, false},
      {"reshape", [](Tape&, const std::vector<Var>& v) { return sum(reshape(v[0], {12}) * reshape(v[1], {12})); }, false},
      {"slice", [](Tape&, const std::vector<Var>& v) { return sum(square(slice(v[0], 1, 1, 3))); }, false},
      {"concat", [](Tape&, const std::vector<Var>& v) {
         return sum(square(concat({v[0], slice(v[1], 1, 0, 2)}, 1)));
       }, false},
      {"matmul", [](Tape&, const std::vector<Var>& v) {
         return sum(square(matmul(v[0], transpose(v[1]))));
       }, false},
  };
  for (const auto& c : cases) {
    CAPTURE(c.name);
    std::vector<Tensor> inputs = {c.positive ? positive_tensor(rng, s) : random_tensor(rng, s),
                                  random_tensor(rng, s)};
    if (std::string(c.name) == "clamp") {
      // keep away from the clamp corners as well
      for (double& v : inputs[0].data())
        if (std::abs(std::abs(v) - 0.5) < 1e-2) v *= 1.2;
    }
    const auto check = check_gradients(c.build, inputs);
    CHECK(check.max_rel_error < kTol);
  }
}

TEST_CASE("random composite graphs match central differences") {
  std::mt19937_64 rng(2024);
  const fpg::testing::Builder graphs[] = {
      [](Tape&, const std::vector<Var>& v) {
        Var h = tanh(matmul(v[0], v[1]));
        return add(sum(square(h * sigmoid(v[2]))), mean(log(add_scalar(square(v[2]), 1.0))));
      },
      [](Tape&, const std::vector<Var>& v) {
        Var z = concat({v[2], matmul(v[0], v[1])}, 0);
        return sum(max0(add_scalar(z, 0.1)) * abs(add_scalar(z, -0.2)));
      },
      [](Tape&, const std::vector<Var>& v) {
        Var x = reshape(matmul(v[0], v[1]), {3, 1, 3});
        Var k = reshape(slice(v[2], 0, 0, 2), {2, 1, 3});
        Var w = slice(k, 2, 0, 1);
        Var b = reshape(slice(slice(v[2], 0, 2, 3), 1, 0, 1), {1});
        return squared_norm(glu(causal_conv1d(x, w, b), x));
      },
  };
  for (const auto& g : graphs) {
    std::vector<Tensor> inputs = {random_tensor(rng, {3, 2}), random_tensor(rng, {2, 3}),
                                  random_tensor(rng, {3, 3})};
    const auto check = check_gradients(g, inputs);
    CHECK(check.max_rel_error < kTol);
  }
}

TEST_CASE("shape mismatch names the op and both shapes") {
  Tape tape;
  Var a = tape.constant(Tensor({2, 3}));
  Var b = tape.constant(Tensor({3, 2}));
  try {
    add(a, b);
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("add") != std::string::npos);
    CHECK(msg.find("[2x3]") != std::string::npos);
    CHECK(msg.find("[3x2]") != std::string::npos);
  }
  CHECK_THROWS_AS(matmul(a, a), ShapeError);
}

TEST_CASE("backward visits exactly the recorded differentiable nodes") {
  Tape tape;
  Var x = tape.variable(Tensor({2}, 1.5));
  Var c = tape.constant(Tensor({2}, 2.0));
  Var y = sum(square(x * c));  // mul, square, sum
  Var unrelated = sum(square(c));
  (void)unrelated;
  tape.backward(y);
  CHECK(tape.backward_visits() == 3);
  CHECK(tape.grad(x)[0] == doctest::Approx(2.0 * 3.0 * 2.0));
}

TEST_CASE("causal convolution") {
  Tape tape;
  Var seq = tape.constant(Tensor({3, 1, 1}, {1.0, 2.0, 3.0}));
  Var zero_bias = tape.constant(Tensor({1}, 0.0));

  SUBCASE("width-one unit kernel is the identity") {
    Var out = causal_conv1d(seq, tape.constant(Tensor({1, 1, 1}, 1.0)), zero_bias);
    CHECK(out.value() == seq.value());
  }
  SUBCASE("kernel [0, 1] delays by one period") {
    Var out = causal_conv1d(seq, tape.constant(Tensor({2, 1, 1}, {0.0, 1.0})), zero_bias);
    CHECK(out.value().values() == std::vector<double>{0.0, 1.0, 2.0});
  }
  SUBCASE("horizon is preserved") {
    Var x = tape.constant(Tensor({5, 2, 4}, 1.0));
    Var out = causal_conv1d(x, tape.constant(Tensor({3, 6, 2}, 0.1)), tape.constant(Tensor({6})));
    CHECK(out.shape() == Shape{5, 6, 4});
  }
  SUBCASE("width beyond horizon is rejected") {
    CHECK_THROWS_AS(causal_conv1d(seq, tape.constant(Tensor({4, 1, 1}, 1.0)), zero_bias),
                    ShapeError);
  }
}

TEST_CASE("causal convolution gradients") {
  std::mt19937_64 rng(11);
  const auto check = check_gradients(
      [](Tape&, const std::vector<Var>& v) {
        return squared_norm(tanh(causal_conv1d(v[0], v[1], v[2])));
      },
      {random_tensor(rng, {4, 2, 3}), random_tensor(rng, {3, 2, 2}), random_tensor(rng, {2})});
  CHECK(check.max_rel_error < kTol);
}

TEST_CASE("glu with zero gate halves the linear path") {
  Tape tape;
  Var a = tape.constant(Tensor({2, 2}, {1.0, -2.0, 3.0, 4.0}));
  Var gate = tape.constant(Tensor({2, 2}, 0.0));
  const Tensor out = glu(a, gate).value();
  for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == 0.5 * a.value()[i]);
}

TEST_CASE("Chebyshev graph convolution") {
  Tape tape;
  const Tensor h({1, 2, 3}, {1.0, 2.0, 3.0, -1.0, 0.5, 2.0});
  Var x = tape.constant(h);

  SUBCASE("order 1 reduces to channel mixing by theta_0") {
    const Tensor theta({1, 2, 1}, {2.0, -1.0});
    Var out = cheb_graph_conv(x, tape.constant(theta), tape.constant(Tensor({1})),
                              Tensor({3, 3}, 0.25));
    for (std::size_t n = 0; n < 3; ++n) {
      CHECK(out.value().at(0, 0, n) == doctest::Approx(2.0 * h.at(0, 0, n) - h.at(0, 1, n)));
    }
  }
  SUBCASE("order 2 with L = -I gives H theta_0 - H theta_1") {
    Tensor minus_identity({3, 3}, 0.0);
    for (std::size_t i = 0; i < 3; ++i) minus_identity.at(i, i) = -1.0;
    const Tensor theta({2, 2, 1}, {1.0, 0.5, 0.25, 2.0});
    Var out = cheb_graph_conv(x, tape.constant(theta), tape.constant(Tensor({1})), minus_identity);
    for (std::size_t n = 0; n < 3; ++n) {
      const double t0 = 1.0 * h.at(0, 0, n) + 0.5 * h.at(0, 1, n);
      const double t1 = 0.25 * h.at(0, 0, n) + 2.0 * h.at(0, 1, n);
      CHECK(out.value().at(0, 0, n) == doctest::Approx(t0 - t1));
    }
  }
  SUBCASE("order below one is rejected") {
    CHECK_THROWS_AS(cheb_graph_conv(x, tape.constant(Tensor({0, 2, 1}, std::vector<double>{})),
                                    tape.constant(Tensor({1})), Tensor({3, 3})),
                    std::exception);
    CHECK_THROWS_AS(chebyshev_basis(Tensor({3, 3}), 0), std::invalid_argument);
  }
}

TEST_CASE("Chebyshev recurrence equals the cosine form on a 4-node graph") {
  // Path 0-1-2-3 plus chord 0-2.
  Eigen::Matrix4d adj = Eigen::Matrix4d::Zero();
  for (auto [i, j] : {std::pair{0, 1}, {1, 2}, {2, 3}, {0, 2}}) adj(i, j) = adj(j, i) = 1.0;
  Eigen::Matrix4d lap = Eigen::Matrix4d(adj.rowwise().sum().asDiagonal()) - adj;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(lap);
  const double lmax = eig.eigenvalues().maxCoeff();
  const Eigen::Matrix4d scaled = 2.0 * lap / lmax - Eigen::Matrix4d::Identity();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig_s(scaled);

  Tensor lt({4, 4});
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) lt.at(i, j) = scaled(i, j);
  const auto basis = chebyshev_basis(lt, 4);
  for (int k = 0; k < 4; ++k) {
    Eigen::Vector4d mapped;
    for (int i = 0; i < 4; ++i) {
      const double lam = std::clamp(eig_s.eigenvalues()(i), -1.0, 1.0);
      mapped(i) = std::cos(k * std::acos(lam));
    }
    const Eigen::Matrix4d expected =
        eig_s.eigenvectors() * mapped.asDiagonal() * eig_s.eigenvectors().transpose();
    double err = 0.0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) err = std::max(err, std::abs(basis[k].at(i, j) - expected(i, j)));
    CHECK(err < 1e-8);
  }
}

TEST_CASE("Chebyshev graph convolution gradients") {
  std::mt19937_64 rng(5);
  Tensor lt({3, 3}, {0.0, -0.5, 0.1, -0.5, 0.2, -0.3, 0.1, -0.3, -0.4});
  const auto check = check_gradients(
      [lt](Tape&, const std::vector<Var>& v) {
        return squared_norm(sigmoid(cheb_graph_conv(v[0], v[1], v[2], lt)));
      },
      {random_tensor(rng, {2, 2, 3}), random_tensor(rng, {3, 2, 2}), random_tensor(rng, {2})});
  CHECK(check.max_rel_error < kTol);
}

TEST_CASE("straight-through sign") {
  auto run = [](double s) {
    Tape tape;
    Var x = tape.variable(Tensor::scalar(s));
    Var out = ste_sign(x);
    tape.backward(sum(out));
    return std::pair{out.value()[0], tape.grad(x)[0]};
  };
  SUBCASE("s = 0 binarizes to 0 with full gradient") {
    auto [value, grad] = run(0.0);
    CHECK(value == 0.0);
    CHECK(grad == 1.0);
  }
  SUBCASE("s = 1 is outside the window") {
    auto [value, grad] = run(1.0);
    CHECK(std::tanh(1.0) > 0.5);
    CHECK(value == 1.0);
    CHECK(grad == 0.0);
  }
  SUBCASE("s = -0.2 is inside the window") {
    auto [value, grad] = run(-0.2);
    CHECK(value == 0.0);
    CHECK(grad == doctest::Approx(1.0 - std::tanh(0.2) * std::tanh(0.2)));
    CHECK(grad == doctest::Approx(0.961).epsilon(1e-3));
  }
  SUBCASE("forward is binary and backward lies in {0} or (0, 1]") {
    for (int i = 0; i <= 200; ++i) {
      auto [value, grad] = run(-5.0 + 0.05 * i);
      CHECK((value == 0.0 || value == 1.0));
      CHECK((grad == 0.0 || (grad > 0.0 && grad <= 1.0)));
    }
  }
}

TEST_CASE("checkpoint round trip is exact") {
  std::mt19937_64 rng(3);
  ParameterSet params = {{"block0.kernel", random_tensor(rng, {3, 4, 2}, 1e3)},
                         {"head.bias", random_tensor(rng, {4}, 1e-7)}};
  params[0].value[0] = 0.1 + 0.2;
  std::stringstream buffer;
  write_checkpoint(buffer, params);
  CHECK(buffer.str().rfind(kCheckpointMagic, 0) == 0);
  CHECK(read_checkpoint(buffer) == params);

  std::stringstream bad("NOT-A-CKPT\ncount 0\n");
  CHECK_THROWS(read_checkpoint(bad));
}
