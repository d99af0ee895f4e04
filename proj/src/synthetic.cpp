#include "hiercls/synthetic.hpp"

#include <cmath>
#include <stdexcept>

#include "hiercls/random.hpp"

namespace hiercls {

namespace {

Vector random_unit(Rng& rng, std::size_t dim) {
  Vector v(dim);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (double& x : v) {
      x = normal(rng);
      norm += x * x;
    }
  } while (norm < 1e-12);
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

}  // namespace

void SyntheticSpec::validate() const {
  if (feature_dim == 0) throw std::invalid_argument("feature_dim must be positive");
  if (samples_per_leaf == 0) throw std::invalid_argument("samples_per_leaf must be positive");
  if (tiles_per_object == 0) throw std::invalid_argument("tiles_per_object must be positive");
  if (!(label_noise_rate >= 0.0 && label_noise_rate < 1.0)) throw std::invalid_argument("label noise must be in [0, 1)");
  if (!(confusion_rate >= 0.0 && confusion_rate <= 1.0)) throw std::invalid_argument("confusion rate must be in [0, 1]");
  if (!(confusion_strength >= 0.0 && confusion_strength <= 1.0))
    throw std::invalid_argument("confusion strength must be in [0, 1]");
  if (!(spread >= 0.0)) throw std::invalid_argument("spread must be >= 0");
}

Dataset gen_synthetic(const SyntheticSpec& spec, const Taxonomy& t) {
  spec.validate();
  const std::size_t b = t.level_count();
  std::vector<double> scale = spec.level_scale;
  if (scale.empty())
    for (std::size_t l = 0; l < b; ++l) scale.push_back(3.0 / std::pow(1.5, static_cast<double>(l)));
  if (scale.size() != b) throw std::invalid_argument("level_scale must have one entry per level");

  Rng rng(spec.seed);
  // One direction per class per level.
  std::vector<std::vector<Vector>> dirs(b);
  for (std::size_t l = 0; l < b; ++l)
    for (std::size_t c = 0; c < t.class_count(l); ++c) dirs[l].push_back(random_unit(rng, spec.feature_dim));

  const std::size_t leaves = t.leaf_count();
  std::vector<Vector> coarse_part(leaves, Vector(spec.feature_dim, 0.0));
  std::vector<Vector> fine_part(leaves);
  for (std::size_t leaf = 0; leaf < leaves; ++leaf) {
    const auto& tuple = t.tuples()[leaf];
    for (std::size_t l = 0; l + 1 < b; ++l)
      for (std::size_t k = 0; k < spec.feature_dim; ++k)
        coarse_part[leaf][k] += scale[l] * dirs[l][static_cast<std::size_t>(tuple[l])][k];
    fine_part[leaf] = dirs[b - 1][leaf];
    for (double& x : fine_part[leaf]) x *= scale[b - 1];
  }

  Dataset d;
  d.feature_dim = spec.feature_dim;
  d.taxonomy_digest = t.digest();
  std::size_t object = 0;
  for (std::size_t leaf = 0; leaf < leaves; ++leaf) {
    for (std::size_t n = 0; n < spec.samples_per_leaf; ++n) {
      const std::string id = "obj" + std::to_string(object);
      // Label noise applies per object so that all tiles keep one label.
      int label = static_cast<int>(leaf);
      if (spec.label_noise_rate > 0.0 && leaves > 1 && uniform01(rng) < spec.label_noise_rate) {
        const auto other = static_cast<int>(uniform_index(rng, leaves - 1));
        label = other >= static_cast<int>(leaf) ? other + 1 : other;
      }
      for (std::size_t tile = 0; tile < spec.tiles_per_object; ++tile) {
        Sample s;
        s.object_id = id;
        s.leaf = label;
        s.labels = lift_to_tuple(t, label);
        s.source_leaf = static_cast<int>(leaf);
        Vector fine = fine_part[leaf];
        if (spec.confusion_rate > 0.0 && leaves > 1 && uniform01(rng) < spec.confusion_rate) {
          auto other = static_cast<std::size_t>(uniform_index(rng, leaves - 1));
          if (other >= leaf) ++other;
          for (std::size_t k = 0; k < fine.size(); ++k)
            fine[k] += spec.confusion_strength * (fine_part[other][k] - fine[k]);
        }
        s.features.resize(spec.feature_dim);
        for (std::size_t k = 0; k < spec.feature_dim; ++k)
          s.features[k] = coarse_part[leaf][k] + fine[k] + spec.spread * normal(rng) + spec.domain_offset;
        d.samples.push_back(std::move(s));
      }
      ++object;
    }
  }
  return d;
}

SyntheticSpec separable_spec(std::uint64_t seed) {
  SyntheticSpec s;
  s.feature_dim = 16;
  s.samples_per_leaf = 95;
  s.level_scale = {6.0, 4.0, 8.0 / 3.0};
  s.spread = 0.15;
  s.seed = seed;
  return s;
}

SyntheticSpec correlated_noise_spec(std::uint64_t seed) {
  SyntheticSpec s;
  s.feature_dim = 16;
  s.samples_per_leaf = 80;
  s.level_scale = {6.0, 4.0, 8.0 / 3.0};
  s.spread = 0.35;
  s.confusion_rate = 0.5;
  s.confusion_strength = 0.7;
  s.seed = seed;
  return s;
}

}  // namespace hiercls
