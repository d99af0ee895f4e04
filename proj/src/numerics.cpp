#include "hiercls/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "hiercls/errors.hpp"

namespace hiercls {

bool Matrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

void Matrix::set_zero() noexcept { std::fill(data_.begin(), data_.end(), 0.0); }

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Vector relu(std::span<const double> v) {
  Vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] > 0.0 ? v[i] : 0.0;
  return out;
}

Vector relu_backward(std::span<const double> x, std::span<const double> g) {
  if (x.size() != g.size()) throw std::invalid_argument("relu_backward: size mismatch");
  Vector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] > 0.0 ? g[i] : 0.0;
  return out;
}

Vector softmax(std::span<const double> z) {
  if (z.empty()) throw std::invalid_argument("softmax of an empty vector");
  const double mx = *std::max_element(z.begin(), z.end());
  Vector out(z.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    out[i] = std::exp(z[i] - mx);
    sum += out[i];
  }
  for (double& x : out) x /= sum;
  return out;
}

Vector softmax_backward(std::span<const double> p, std::span<const double> dp) {
  if (p.size() != dp.size()) throw std::invalid_argument("softmax_backward: size mismatch");
  double dot = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) dot += p[i] * dp[i];
  Vector out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = p[i] * (dp[i] - dot);
  return out;
}

Vector matvec(const Matrix& m, std::span<const double> v) {
  Vector out(m.rows(), 0.0);
  matvec_add(m, v, out);
  return out;
}

void matvec_add(const Matrix& m, std::span<const double> v, std::span<double> out) {
  if (m.cols() != v.size() || m.rows() != out.size())
    throw std::invalid_argument("matvec: " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                                " matrix with vector of length " + std::to_string(v.size()));
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    double acc = 0.0;
    for (std::size_t c = 0; c < row.size(); ++c) acc += row[c] * v[c];
    out[r] += acc;
  }
}

void matvec_transposed_add(const Matrix& m, std::span<const double> v, std::span<double> out) {
  if (m.rows() != v.size() || m.cols() != out.size()) throw std::invalid_argument("matvec_transposed: shape mismatch");
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double vr = v[r];
    if (vr == 0.0) continue;
    const auto row = m.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) out[c] += row[c] * vr;
  }
}

void add_outer(Matrix& m, std::span<const double> u, std::span<const double> v, double scale) {
  if (m.rows() != u.size() || m.cols() != v.size()) throw std::invalid_argument("add_outer: shape mismatch");
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double ur = scale * u[r];
    if (ur == 0.0) continue;
    for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) += ur * v[c];
  }
}

double StepSchedule::rate_at(int epoch) const {
  if (steps.empty()) throw std::invalid_argument("empty learning-rate schedule");
  double rate = steps.front().second;
  for (const auto& [start, lr] : steps)
    if (start <= epoch) rate = lr;
  return rate;
}

void sgd_step(std::span<Matrix* const> params, std::span<const Matrix* const> grads, OptimizerState& state, int epoch) {
  if (params.size() != grads.size()) throw std::invalid_argument("sgd_step: parameter/gradient count mismatch");
  if (state.velocity.empty()) {
    state.velocity.reserve(params.size());
    for (const Matrix* p : params) state.velocity.emplace_back(p->rows(), p->cols());
  }
  if (state.velocity.size() != params.size()) throw std::invalid_argument("sgd_step: velocity count mismatch");
  const double lr = state.schedule.steps.empty() ? state.learning_rate : state.schedule.rate_at(epoch);
  for (std::size_t k = 0; k < params.size(); ++k) {
    Matrix& p = *params[k];
    const Matrix& g = *grads[k];
    Matrix& v = state.velocity[k];
    if (!p.same_shape(g) || !p.same_shape(v)) throw std::invalid_argument("sgd_step: shape mismatch");
    auto pd = p.data();
    const auto gd = g.data();
    auto vd = v.data();
    for (std::size_t i = 0; i < pd.size(); ++i) {
      vd[i] = state.momentum * vd[i] - lr * (gd[i] + state.weight_decay * pd[i]);
      pd[i] += vd[i];
    }
    if (!p.all_finite()) throw NumericalError("sgd_step: non-finite parameter after update");
  }
}

double grad_check(const ScalarFunction& f, std::span<const double> params, std::span<const double> analytic,
                  double h) {
  if (params.size() != analytic.size()) throw std::invalid_argument("grad_check: size mismatch");
  Vector x(params.begin(), params.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x[i];
    x[i] = orig + h;
    const double fp = f(x);
    x[i] = orig - h;
    const double fm = f(x);
    x[i] = orig;
    if (!std::isfinite(fp) || !std::isfinite(fm)) throw NumericalError("grad_check: non-finite function value");
    const double numeric = (fp - fm) / (2.0 * h);
    const double denom = std::max({1.0, std::abs(analytic[i]), std::abs(numeric)});
    worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
  }
  return worst;
}

Vector flatten(std::span<const Matrix* const> ms) {
  Vector out;
  for (const Matrix* m : ms) out.insert(out.end(), m->data().begin(), m->data().end());
  return out;
}

void unflatten(std::span<const double> flat, std::span<Matrix* const> ms) {
  std::size_t off = 0;
  for (Matrix* m : ms) {
    auto d = m->data();
    if (off + d.size() > flat.size()) throw std::invalid_argument("unflatten: too few values");
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(off), d.size(), d.begin());
    off += d.size();
  }
  if (off != flat.size()) throw std::invalid_argument("unflatten: too many values");
}

}  // namespace hiercls
