#include "hiercls/losses.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "hiercls/errors.hpp"

namespace hiercls {

namespace {

// -(1 - p)^e log p and its derivative in p.
struct Term {
  double value;
  double d_value;
};

Term focal_term(double p, const FocalConfig& cfg) {
  const double e = cfg.exponent;
  const double floor = cfg.probability_floor;
  if (p < floor) {
    // log clamp active: value fixed, derivative of the clamp is zero
    return {-std::pow(1.0 - p, e) * std::log(floor), 0.0};
  }
  const double q = 1.0 - p;
  const double lp = std::log(p);
  const double value = -std::pow(q, e) * lp;
  double d = -std::pow(q, e) / p;
  if (e != 0.0) d += q > floor ? e * std::pow(q, e - 1.0) * lp : 0.0;
  return {value, d};
}

// -p^e log(1 - p) and its derivative in p.
Term suppression_term(double p, const FocalConfig& cfg) {
  const double e = cfg.exponent;
  const double floor = cfg.probability_floor;
  const double q = 1.0 - p;
  if (q < floor) return {-std::pow(p, e) * std::log(floor), 0.0};
  const double lq = std::log(q);
  const double value = -std::pow(p, e) * lq;
  double d = std::pow(p, e) / q;
  if (e != 0.0) d += p > floor ? -e * std::pow(p, e - 1.0) * lq : 0.0;
  return {value, d};
}

// Adds scale * term(P[label]) to the loss and scale * dterm/dz into grad.
double accumulate_focal(std::span<const double> probs, int label, double scale, std::span<double> grad,
                        const FocalConfig& cfg) {
  if (label < 0 || static_cast<std::size_t>(label) >= probs.size())
    throw std::invalid_argument("focal_loss: label " + std::to_string(label) + " out of range");
  const double p = probs[static_cast<std::size_t>(label)];
  const Term t = focal_term(p, cfg);
  // d p_y / d z_c = p_y (delta_yc - p_c)
  const double g = scale * t.d_value * p;
  for (std::size_t c = 0; c < probs.size(); ++c) grad[c] -= g * probs[c];
  grad[static_cast<std::size_t>(label)] += g;
  return scale * t.value;
}

}  // namespace

void FocalConfig::validate() const {
  if (!std::isfinite(exponent) || exponent < 0.0) throw std::invalid_argument("focal exponent must be finite and >= 0");
  if (!(probability_floor > 0.0 && probability_floor <= 1e-6))
    throw std::invalid_argument("probability floor must lie in (0, 1e-6]");
}

FocalResult focal_loss(const std::vector<LevelScores>& probs, const std::vector<LabelTuple>& labels,
                       const FocalConfig& cfg) {
  cfg.validate();
  if (probs.size() != labels.size()) throw std::invalid_argument("focal_loss: sample/label count mismatch");
  if (probs.empty()) throw std::invalid_argument("focal_loss: empty batch");
  const double scale = 1.0 / static_cast<double>(probs.size());
  FocalResult r;
  r.d_scores.resize(probs.size());
  for (std::size_t k = 0; k < probs.size(); ++k) {
    if (labels[k].size() != probs[k].size()) throw std::invalid_argument("focal_loss: level count mismatch");
    r.d_scores[k].resize(probs[k].size());
    for (std::size_t l = 0; l < probs[k].size(); ++l) {
      r.d_scores[k][l].assign(probs[k][l].size(), 0.0);
      r.loss += accumulate_focal(probs[k][l], labels[k][l], scale, r.d_scores[k][l], cfg);
    }
  }
  return r;
}

PixelFocalResult focal_loss_pixels(const std::vector<PixelScoreGrid>& probs,
                                   const std::vector<std::vector<int>>& labels, const FocalConfig& cfg) {
  cfg.validate();
  if (probs.size() != labels.size()) throw std::invalid_argument("focal_loss_pixels: image/label count mismatch");
  if (probs.empty()) throw std::invalid_argument("focal_loss_pixels: empty batch");
  const std::size_t w = probs.front().width;
  const std::size_t h = probs.front().height;
  const double scale = 1.0 / static_cast<double>(w * h * probs.size());
  PixelFocalResult r;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    const auto& grid = probs[k];
    if (grid.width != w || grid.height != h || grid.values.size() != w * h * grid.classes)
      throw std::invalid_argument("focal_loss_pixels: grid shape mismatch");
    if (labels[k].size() != w * h) throw std::invalid_argument("focal_loss_pixels: label grid shape mismatch");
    PixelScoreGrid g = grid;
    std::fill(g.values.begin(), g.values.end(), 0.0);
    for (std::size_t i = 0; i < w * h; ++i) {
      auto gi = std::span<double>(g.values).subspan(i * grid.classes, grid.classes);
      r.loss += accumulate_focal(grid.pixel(i), labels[k][i], scale, gi, cfg);
    }
    r.d_scores.push_back(std::move(g));
  }
  return r;
}

Vector joint_scores(const LevelScores& probs, const Taxonomy& t) {
  check_level_shapes(probs, level_sizes(t), "joint_scores");
  const auto& tuples = t.tuples();
  Vector out(tuples.size(), 1.0);
  for (std::size_t i = 0; i < tuples.size(); ++i)
    for (std::size_t l = 0; l < probs.size(); ++l) out[i] *= probs[l][static_cast<std::size_t>(tuples[i][l])];
  return out;
}

LevelScores joint_scores_backward(const LevelScores& probs, const Taxonomy& t, std::span<const double> d_joint) {
  check_level_shapes(probs, level_sizes(t), "joint_scores_backward");
  const auto& tuples = t.tuples();
  if (d_joint.size() != tuples.size()) throw std::invalid_argument("joint_scores_backward: gradient size mismatch");
  LevelScores d(probs.size());
  for (std::size_t l = 0; l < probs.size(); ++l) d[l].assign(probs[l].size(), 0.0);
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    if (d_joint[i] == 0.0) continue;
    for (std::size_t l = 0; l < probs.size(); ++l) {
      double others = 1.0;
      for (std::size_t m = 0; m < probs.size(); ++m)
        if (m != l) others *= probs[m][static_cast<std::size_t>(tuples[i][m])];
      d[l][static_cast<std::size_t>(tuples[i][l])] += d_joint[i] * others;
    }
  }
  return d;
}

JoResult jo_loss(const std::vector<Vector>& joint, const std::vector<int>& correct_leaf, const FocalConfig& cfg,
                 const JoLossOptions& opts) {
  cfg.validate();
  if (joint.size() != correct_leaf.size()) throw std::invalid_argument("jo_loss: sample/label count mismatch");
  if (joint.empty()) throw std::invalid_argument("jo_loss: empty batch");
  double scale = 1.0 / static_cast<double>(joint.size());
  if (opts.average_over_tuples) scale /= static_cast<double>(joint.front().size());
  JoResult r;
  r.d_joint.resize(joint.size());
  for (std::size_t k = 0; k < joint.size(); ++k) {
    const auto& s = joint[k];
    const int y = correct_leaf[k];
    if (y < 0 || static_cast<std::size_t>(y) >= s.size())
      throw ValidationError("jo_loss: no tuple matches leaf " + std::to_string(y));
    r.d_joint[k].assign(s.size(), 0.0);
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (!(s[i] >= 0.0 && s[i] <= 1.0)) throw std::invalid_argument("jo_loss: joint score outside [0, 1]");
      if (static_cast<int>(i) == y) {
        const Term t = focal_term(s[i], cfg);
        r.correct_term += scale * t.value;
        r.d_joint[k][i] = scale * t.d_value;
      } else {
        const Term t = suppression_term(s[i], cfg);
        r.incorrect_term += scale * t.value;
        r.d_joint[k][i] = scale * t.d_value;
      }
    }
  }
  r.loss = r.correct_term + r.incorrect_term;
  return r;
}

FocalResult jo_objective(const std::vector<LevelScores>& probs, const std::vector<int>& correct_leaf,
                         const Taxonomy& t, const FocalConfig& cfg, const JoLossOptions& opts) {
  std::vector<Vector> joint;
  joint.reserve(probs.size());
  for (const auto& p : probs) joint.push_back(joint_scores(p, t));
  const JoResult jr = jo_loss(joint, correct_leaf, cfg, opts);
  FocalResult r;
  r.loss = jr.loss;
  r.d_scores.resize(probs.size());
  for (std::size_t k = 0; k < probs.size(); ++k) {
    const auto d_probs = joint_scores_backward(probs[k], t, jr.d_joint[k]);
    r.d_scores[k].resize(probs[k].size());
    for (std::size_t l = 0; l < probs[k].size(); ++l) r.d_scores[k][l] = softmax_backward(probs[k][l], d_probs[l]);
  }
  return r;
}

}  // namespace hiercls
