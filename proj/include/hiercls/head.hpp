#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hiercls/numerics.hpp"
#include "hiercls/taxonomy.hpp"

namespace hiercls {

// One score vector per semantic level, coarsest first.
using LevelScores = std::vector<Vector>;

std::vector<std::size_t> level_sizes(const Taxonomy& t);
void check_level_shapes(const LevelScores& s, const std::vector<std::size_t>& sizes, const char* what);

// Weights of the two interacting fully connected layers of the multi-level
// head. Levels are 0-based:
//   mid[l] = W_self[l] relu(z[l]) + sum_{i<l} W_cross[l][i] relu(z[i])   (l > 0)
//   out[l] = V_self[l] relu(mid[l]) + sum_{j>l} V_cross[l][j] relu(mid[j]) (l < B-1)
// with mid[0] = z[0] and out[B-1] = mid[B-1]. No biases.
class HeadParams {
 public:
  HeadParams() = default;
  explicit HeadParams(std::vector<std::size_t> sizes);  // zero-filled

  std::size_t level_count() const noexcept { return sizes_.size(); }
  const std::vector<std::size_t>& sizes() const noexcept { return sizes_; }

  Matrix& w_self(std::size_t l) { return w_self_.at(l - 1); }
  const Matrix& w_self(std::size_t l) const { return w_self_.at(l - 1); }
  Matrix& w_cross(std::size_t l, std::size_t i) { return w_cross_.at(l - 1).at(i); }
  const Matrix& w_cross(std::size_t l, std::size_t i) const { return w_cross_.at(l - 1).at(i); }
  Matrix& v_self(std::size_t l) { return v_self_.at(l); }
  const Matrix& v_self(std::size_t l) const { return v_self_.at(l); }
  Matrix& v_cross(std::size_t l, std::size_t j) { return v_cross_.at(l).at(j - l - 1); }
  const Matrix& v_cross(std::size_t l, std::size_t j) const { return v_cross_.at(l).at(j - l - 1); }

  std::size_t w_self_count() const noexcept { return w_self_.size(); }
  std::size_t w_cross_count() const noexcept;
  std::size_t v_self_count() const noexcept { return v_self_.size(); }
  std::size_t v_cross_count() const noexcept;

  // All matrices in a fixed order, with stable names for checkpoints.
  std::vector<Matrix*> tensors();
  std::vector<const Matrix*> tensors() const;
  std::vector<std::string> tensor_names() const;

  void set_zero();
  friend bool operator==(const HeadParams&, const HeadParams&) = default;

 private:
  std::vector<std::size_t> sizes_;
  std::vector<Matrix> w_self_;                // levels 1..B-1
  std::vector<std::vector<Matrix>> w_cross_;  // [l-1][i], i < l
  std::vector<Matrix> v_self_;                // levels 0..B-2
  std::vector<std::vector<Matrix>> v_cross_;  // [l][j-l-1], j > l
};

// Uniform in [-a, a] with a = sqrt(6 / (fan_in + fan_out)).
HeadParams init_head_params(const Taxonomy& t, std::uint64_t seed);

struct HeadForward {
  LevelScores input;
  LevelScores relu_input;
  LevelScores mid;
  LevelScores relu_mid;
  LevelScores out;
  LevelScores probs;
};

HeadForward head_forward(const HeadParams& p, const LevelScores& z);

struct HeadGradients {
  LevelScores d_input;
  HeadParams d_params;
};

// Exact backward pass from dL/d out. The accumulate form adds the parameter
// gradients into `acc` and returns dL/dz.
HeadGradients head_backward(const HeadParams& p, const HeadForward& fwd, const LevelScores& d_out);
LevelScores head_backward_accumulate(const HeadParams& p, const HeadForward& fwd, const LevelScores& d_out,
                                     HeadParams& acc);

// dL/d probs -> dL/d out through the per-level softmax Jacobian.
LevelScores probs_to_out_gradient(const HeadForward& fwd, const LevelScores& d_probs);

// Number of coordinates zeroed by the two ReLU stages (dead-path diagnostic).
std::size_t count_relu_zeroed(const HeadForward& fwd);

}  // namespace hiercls
