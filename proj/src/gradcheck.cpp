#include "hiercls/gradcheck.hpp"

#include <algorithm>
#include <utility>

#include "hiercls/backbone.hpp"
#include "hiercls/head.hpp"
#include "hiercls/losses.hpp"
#include "hiercls/random.hpp"

namespace hiercls {

namespace {

Vector concat(const LevelScores& s) {
  Vector out;
  for (const auto& v : s) out.insert(out.end(), v.begin(), v.end());
  return out;
}

LevelScores split_like(std::span<const double> x, const LevelScores& shape) {
  LevelScores out = shape;
  std::size_t k = 0;
  for (auto& v : out)
    for (auto& e : v) e = x[k++];
  return out;
}

LevelScores random_scores(Rng& rng, const Taxonomy& t, double scale) {
  LevelScores s;
  for (std::size_t l = 0; l < t.level_count(); ++l) {
    Vector v(t.class_count(l));
    for (auto& x : v) x = scale * normal(rng);
    s.push_back(std::move(v));
  }
  return s;
}

LevelScores softmax_levels(const LevelScores& s) {
  LevelScores p;
  for (const auto& v : s) p.push_back(softmax(v));
  return p;
}

}  // namespace

double GradientReport::max() const { return std::max({head, focal, jo, composite}); }

GradientReport check_gradients(const Taxonomy& t, std::uint64_t seed, std::size_t instances, double h) {
  Rng rng(seed);
  GradientReport r;
  r.instances = instances;
  for (std::size_t i = 0; i < instances; ++i) {
    FocalConfig cfg;
    cfg.exponent = static_cast<double>(i % 3);
    const int leaf = static_cast<int>(uniform_index(rng, t.leaf_count()));
    const LabelTuple& y = t.tuples()[leaf];

    // Head against a random linear functional of its output.
    HeadParams p = init_head_params(t, rng());
    const auto z = random_scores(rng, t, 1.5);
    const auto c = random_scores(rng, t, 1.0);
    auto head_loss = [&](const LevelScores& zz) {
      const auto out = head_forward(p, zz).out;
      double s = 0.0;
      for (std::size_t l = 0; l < out.size(); ++l)
        for (std::size_t k = 0; k < out[l].size(); ++k) s += c[l][k] * out[l][k];
      return s;
    };
    const auto hg = head_backward(p, head_forward(p, z), c);
    r.head = std::max(
        r.head, grad_check([&](std::span<const double> x) { return head_loss(split_like(x, z)); }, concat(z),
                           concat(hg.d_input), h));
    auto head_tensors = p.tensors();
    if (!head_tensors.empty()) {
      const Vector p0 = flatten(head_tensors);
      r.head = std::max(r.head, grad_check(
                                    [&](std::span<const double> x) {
                                      unflatten(x, head_tensors);
                                      return head_loss(z);
                                    },
                                    p0, flatten(std::as_const(hg.d_params).tensors()), h));
      unflatten(p0, head_tensors);
    }

    // Focal loss through the per-level softmax.
    const auto s = random_scores(rng, t, 2.0);
    const auto fr = focal_loss({softmax_levels(s)}, {y}, cfg);
    r.focal = std::max(r.focal, grad_check(
                                    [&](std::span<const double> x) {
                                      return focal_loss({softmax_levels(split_like(x, s))}, {y}, cfg).loss;
                                    },
                                    concat(s), concat(fr.d_scores[0]), h));

    // JO loss on joint scores drawn away from the clamps.
    Vector joint(t.leaf_count());
    for (auto& v : joint) v = uniform(rng, 0.02, 0.95);
    const auto jr = jo_loss({joint}, {leaf}, cfg);
    r.jo = std::max(r.jo, grad_check([&](std::span<const double> x) { return jo_loss({Vector(x.begin(), x.end())}, {leaf}, cfg).loss; },
                                     joint, jr.d_joint[0], h));

    // Composite over a small perturbed model, so that no head input sits
    // exactly on a ReLU kink.
    Model m = init_model(t, 6, 8, rng());
    for (Matrix* w : m.tensors())
      for (double& v : w->data()) v += 0.3 * normal(rng);
    Vector x(6);
    for (auto& v : x) v = normal(rng);
    for (bool use_jo : {false, true}) {
      auto objective = [&](const LevelScores& probs) {
        return use_jo ? jo_objective({probs}, {leaf}, t, cfg) : focal_loss({probs}, {y}, cfg);
      };
      const auto fwd = model_forward(m, x);
      Model acc = zeros_like(m);
      model_backward_accumulate(m, fwd, objective(fwd.head.probs).d_scores[0], acc);
      auto params = m.tensors();
      const Vector p0 = flatten(params);
      r.composite = std::max(r.composite, grad_check(
                                              [&](std::span<const double> q) {
                                                unflatten(q, params);
                                                return objective(model_forward(m, x).head.probs).loss;
                                              },
                                              p0, flatten(std::as_const(acc).tensors()), h));
      unflatten(p0, params);
    }
  }
  return r;
}

}  // namespace hiercls
