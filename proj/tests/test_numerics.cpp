#include <gtest/gtest.h>

#include <cmath>

#include "hiercls/errors.hpp"
#include "hiercls/numerics.hpp"

using namespace hiercls;

TEST(Numerics, Relu) {
  EXPECT_EQ(relu(Vector{-1, 0, 2}), (Vector{0, 0, 2}));
  EXPECT_EQ(relu(Vector{-1, -3}), (Vector{0, 0}));
  EXPECT_EQ(relu(Vector{0.5, 4}), (Vector{0.5, 4}));
  EXPECT_EQ(relu_backward(Vector{-1, 0, 2}, Vector{5, 5, 5}), (Vector{0, 0, 5}));
}

TEST(Numerics, Softmax) {
  const auto u = softmax(Vector{0, 0, 0});
  for (double v : u) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
  const auto p = softmax(Vector{std::log(2.0), 0});
  EXPECT_NEAR(p[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(p[1], 1.0 / 3.0, 1e-15);
  const auto big = softmax(Vector{1000, 1000});
  EXPECT_EQ(big[0], 0.5);
  EXPECT_EQ(big[1], 0.5);
  EXPECT_THROW(softmax(Vector{}), std::invalid_argument);
}

TEST(Numerics, SoftmaxBackwardMatchesFiniteDifference) {
  const Vector z{0.3, -1.2, 2.0, 0.1};
  const Vector w{1.0, -2.0, 0.5, 3.0};
  auto f = [&](std::span<const double> x) {
    const auto p = softmax(x);
    double s = 0;
    for (std::size_t i = 0; i < p.size(); ++i) s += w[i] * p[i];
    return s;
  };
  const auto g = softmax_backward(softmax(z), w);
  EXPECT_LT(grad_check(f, z, g), 1e-9);
}

TEST(Numerics, Matvec) {
  Matrix m(2, 2);
  m(0, 0) = 1;
  m(0, 1) = 2;
  m(1, 0) = 3;
  m(1, 1) = 4;
  EXPECT_EQ(matvec(m, Vector{1, 1}), (Vector{3, 7}));
  EXPECT_EQ(matvec(Matrix::identity(3), Vector{1, 2, 3}), (Vector{1, 2, 3}));
  EXPECT_EQ(matvec(Matrix(2, 3), Vector{1, 2, 3}), (Vector{0, 0}));
  Vector acc{1, 1};
  matvec_transposed_add(m, Vector{1, 0}, acc);
  EXPECT_EQ(acc, (Vector{2, 3}));
}

TEST(Numerics, SgdPlainDescent) {
  Matrix p(1, 2, 1.0), g(1, 2);
  g(0, 0) = 0.25;
  g(0, 1) = -0.5;
  OptimizerState st;
  st.learning_rate = 1.0;
  st.momentum = 0.0;
  st.weight_decay = 0.0;
  Matrix* ps[] = {&p};
  const Matrix* gs[] = {&g};
  sgd_step(ps, gs, st, 0);
  EXPECT_EQ(p(0, 0), 0.75);
  EXPECT_EQ(p(0, 1), 1.5);
}

TEST(Numerics, SgdZeroGradient) {
  Matrix p(2, 2, 0.7), g(2, 2);
  OptimizerState st;
  st.weight_decay = 0.0;
  Matrix* ps[] = {&p};
  const Matrix* gs[] = {&g};
  for (int i = 0; i < 3; ++i) sgd_step(ps, gs, st, i);
  EXPECT_EQ(p, Matrix(2, 2, 0.7));
}

TEST(Numerics, SgdMomentumAndDecay) {
  Matrix p(1, 1, 2.0), g(1, 1, 1.0);
  OptimizerState st;
  st.learning_rate = 0.1;
  st.momentum = 0.5;
  st.weight_decay = 0.5;
  Matrix* ps[] = {&p};
  const Matrix* gs[] = {&g};
  sgd_step(ps, gs, st, 0);  // v = -0.1 * (1 + 1) = -0.2
  EXPECT_DOUBLE_EQ(p(0, 0), 1.8);
  sgd_step(ps, gs, st, 0);  // v = -0.1 - 0.1 * (1 + 0.9) = -0.29
  EXPECT_DOUBLE_EQ(p(0, 0), 1.51);
}

TEST(Numerics, SgdDivergenceThrows) {
  Matrix p(1, 1, 1.0), g(1, 1, INFINITY);
  OptimizerState st;
  Matrix* ps[] = {&p};
  const Matrix* gs[] = {&g};
  EXPECT_THROW(sgd_step(ps, gs, st, 0), NumericalError);
}

TEST(Numerics, StepSchedule) {
  StepSchedule s{{{0, 0.001}, {4, 0.0001}}};
  EXPECT_EQ(s.rate_at(0), 0.001);
  EXPECT_EQ(s.rate_at(3), 0.001);
  EXPECT_EQ(s.rate_at(4), 0.0001);
  EXPECT_EQ(s.rate_at(5), 0.0001);
}

TEST(Numerics, GradCheck) {
  auto f = [](std::span<const double> x) { return x[0] * x[0]; };
  const Vector x{3.0};
  EXPECT_LT(grad_check(f, x, Vector{6.0}), 1e-8);
  // Doubled analytic gradient: |12 - 6| / 12.
  EXPECT_NEAR(grad_check(f, x, Vector{12.0}), 0.5, 1e-8);
}

TEST(Numerics, FlattenRoundTrip) {
  Matrix a(2, 1), b(1, 3);
  a(1, 0) = 4;
  b(0, 2) = -1;
  const Matrix* cs[] = {&a, &b};
  const auto flat = flatten(cs);
  EXPECT_EQ(flat, (Vector{0, 4, 0, 0, -1}));
  Matrix a2(2, 1), b2(1, 3);
  Matrix* ms[] = {&a2, &b2};
  unflatten(flat, ms);
  EXPECT_EQ(a2, a);
  EXPECT_EQ(b2, b);
}
