#pragma once

#include <cstddef>
#include <vector>

#include "hiercls/head.hpp"
#include "hiercls/numerics.hpp"
#include "hiercls/taxonomy.hpp"

namespace hiercls {

struct FocalConfig {
  double exponent = 1.0;
  double probability_floor = 1e-12;
  void validate() const;
};

// Each log() argument is clamped to [floor, 1] on its singular side only, so
// that exact identities (zero loss at P = 1, or at P = 0 inside log(1 - P))
// survive. Gradients are exact wherever the clamp is inactive and zero where
// it is active.

struct FocalResult {
  double loss = 0.0;
  std::vector<LevelScores> d_scores;  // dL/d un-normalized scores, per sample
};

// Per-level object loss: -1/N * sum_{k,l} (1 - P)^e log P at the true class.
FocalResult focal_loss(const std::vector<LevelScores>& probs, const std::vector<LabelTuple>& labels,
                       const FocalConfig& cfg);

// Per-pixel grid of class distributions (W x H x M), row-major by pixel.
struct PixelScoreGrid {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t classes = 0;
  std::vector<double> values;
  std::span<const double> pixel(std::size_t i) const {
    return std::span<const double>(values).subspan(i * classes, classes);
  }
};

struct PixelFocalResult {
  double loss = 0.0;
  std::vector<PixelScoreGrid> d_scores;
};

// Pixelwise loss normalized by W * H * N. labels[k][i] is the class of pixel i.
PixelFocalResult focal_loss_pixels(const std::vector<PixelScoreGrid>& probs,
                                   const std::vector<std::vector<int>>& labels, const FocalConfig& cfg);

// Joint score of every consistent tuple: prod_l P_l[T_i[l]].
Vector joint_scores(const LevelScores& probs, const Taxonomy& t);
// dL/dP_l[c] = sum over tuples i with T_i[l] = c of dL/djoint_i * prod_{m != l} P_m[T_i[m]].
LevelScores joint_scores_backward(const LevelScores& probs, const Taxonomy& t, std::span<const double> d_joint);

struct JoLossOptions {
  // Divide the summed loss additionally by M_B (experimental, off by default).
  bool average_over_tuples = false;
};

struct JoResult {
  double loss = 0.0;
  double correct_term = 0.0;    // first component, raising the correct tuple
  double incorrect_term = 0.0;  // second component, suppressing the others
  std::vector<Vector> d_joint;
};

// correct_leaf[k] identifies the ground-truth tuple of sample k.
JoResult jo_loss(const std::vector<Vector>& joint, const std::vector<int>& correct_leaf, const FocalConfig& cfg,
                 const JoLossOptions& opts = {});

// Joint-optimization objective evaluated on per-level softmax outputs, with the
// gradient carried back to the un-normalized scores.
FocalResult jo_objective(const std::vector<LevelScores>& probs, const std::vector<int>& correct_leaf,
                         const Taxonomy& t, const FocalConfig& cfg, const JoLossOptions& opts = {});

}  // namespace hiercls
