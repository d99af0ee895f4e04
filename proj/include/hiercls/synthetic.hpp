#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "hiercls/dataset.hpp"
#include "hiercls/taxonomy.hpp"

namespace hiercls {

// Leaf cluster means are sums of one random unit direction per ancestor,
// scaled per level: mean(leaf) = sum_l level_scale[l] * u_l(ancestor_l), so
// siblings share every coarse term and differ only in finer ones.
struct SyntheticSpec {
  std::size_t feature_dim = 16;
  std::size_t samples_per_leaf = 100;
  std::vector<double> level_scale;  // empty: 3.0 / 1.5^l
  double spread = 0.25;             // isotropic noise std-dev
  double label_noise_rate = 0.0;    // label replaced by a uniform other leaf
  // Probability that a sample's finest-level component is pulled towards a
  // uniformly chosen other leaf, leaving the coarser components intact.
  double confusion_rate = 0.0;
  double confusion_strength = 0.0;  // fraction of the pull, in [0, 1]
  std::size_t tiles_per_object = 1;
  double domain_offset = 0.0;  // added to every feature (second-domain studies)
  std::uint64_t seed = 0;
  void validate() const;
};

Dataset gen_synthetic(const SyntheticSpec& spec, const Taxonomy& t);

// Presets used by the tests and the CLI.
SyntheticSpec separable_spec(std::uint64_t seed);
SyntheticSpec correlated_noise_spec(std::uint64_t seed);

}  // namespace hiercls
