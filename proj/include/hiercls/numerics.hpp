#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace hiercls {

using Vector = std::vector<double>;

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  std::span<const double> row(std::size_t r) const { return std::span<const double>(data_).subspan(r * cols_, cols_); }

  bool same_shape(const Matrix& o) const noexcept { return rows_ == o.rows_ && cols_ == o.cols_; }
  bool all_finite() const noexcept;
  void set_zero() noexcept;

  static Matrix identity(std::size_t n);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Vector relu(std::span<const double> v);
// g * 1[x > 0]; the subgradient at 0 is 0.
Vector relu_backward(std::span<const double> x, std::span<const double> g);

// Max-subtracted softmax; throws std::invalid_argument on empty input.
Vector softmax(std::span<const double> z);
// Given p = softmax(z) and dL/dp, returns dL/dz.
Vector softmax_backward(std::span<const double> p, std::span<const double> dp);

Vector matvec(const Matrix& m, std::span<const double> v);
// out += m * v
void matvec_add(const Matrix& m, std::span<const double> v, std::span<double> out);
// out += m^T * v
void matvec_transposed_add(const Matrix& m, std::span<const double> v, std::span<double> out);
// m += scale * u * v^T
void add_outer(Matrix& m, std::span<const double> u, std::span<const double> v, double scale = 1.0);

// Piecewise-constant learning rate: the entry with the largest epoch <= the
// current epoch applies.
struct StepSchedule {
  std::vector<std::pair<int, double>> steps;
  double rate_at(int epoch) const;
};

struct OptimizerState {
  double learning_rate = 0.001;
  double momentum = 0.999;
  double weight_decay = 0.0005;
  StepSchedule schedule;
  std::vector<Matrix> velocity;  // lazily shaped on the first step
};

// velocity <- momentum * velocity - lr * (grad + weight_decay * param)
// param    <- param + velocity
// lr comes from state.schedule when it is non-empty, else state.learning_rate.
// Throws NumericalError if a parameter becomes non-finite.
void sgd_step(std::span<Matrix* const> params, std::span<const Matrix* const> grads, OptimizerState& state, int epoch);

using ScalarFunction = std::function<double(std::span<const double>)>;

// Max over entries of |analytic - numeric| / max(1, |analytic|, |numeric|) with
// central differences of step h. Throws NumericalError if f is non-finite.
double grad_check(const ScalarFunction& f, std::span<const double> params, std::span<const double> analytic,
                  double h = 1e-5);

// Concatenate / scatter the entries of a matrix list in order.
Vector flatten(std::span<const Matrix* const> ms);
void unflatten(std::span<const double> flat, std::span<Matrix* const> ms);

}  // namespace hiercls
