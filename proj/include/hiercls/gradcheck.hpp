#pragma once

#include <cstddef>
#include <cstdint>

#include "hiercls/taxonomy.hpp"

namespace hiercls {

// Largest relative error between analytic and central-difference gradients
// over a batch of random instances on one taxonomy.
struct GradientReport {
  double head = 0.0;       // head_backward, inputs and parameters
  double focal = 0.0;      // focal_loss w.r.t. un-normalized scores
  double jo = 0.0;         // jo_loss w.r.t. joint scores
  double composite = 0.0;  // backbone + head + loss, both objectives
  std::size_t instances = 0;
  double max() const;
};

GradientReport check_gradients(const Taxonomy& t, std::uint64_t seed, std::size_t instances, double h = 1e-5);

}  // namespace hiercls
