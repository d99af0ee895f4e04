#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "hiercls/backbone.hpp"
#include "hiercls/dataset.hpp"
#include "hiercls/inference.hpp"
#include "hiercls/losses.hpp"
#include "hiercls/taxonomy.hpp"

namespace hiercls {

// MT trains on the per-level focal loss (also the basis of F2C inference);
// JO trains on the joint-optimization loss.
enum class Variant { MT, JO };

std::string_view variant_name(Variant v);
Variant parse_variant(std::string_view s);
// Inference strategy paired with a training variant in evaluation.
Strategy default_strategy(Variant v);

struct TrainConfig {
  int epochs = 8;
  double base_learning_rate = 0.001;
  int lr_drop_epoch = 4;  // 0-based epoch from which the dropped rate applies
  double dropped_learning_rate = 0.0001;
  double momentum = 0.999;
  double weight_decay = 0.0005;
  double focal_exponent = 1.0;
  std::size_t batch_size = 30;
  Variant variant = Variant::JO;
  double validation_fraction = 0.15;
  std::size_t hidden_width = 128;
  std::uint64_t seed = 0;
  bool add_level_loss = false;        // JO only: also add the per-level focal loss
  bool jo_average_over_tuples = false;
  void validate() const;
};

struct EpochLog {
  int epoch = 0;  // 1-based
  double learning_rate = 0.0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  std::vector<double> val_error;  // per level, 1 - accuracy
  friend bool operator==(const EpochLog&, const EpochLog&) = default;
};

struct TrainResult {
  Model model;
  std::vector<EpochLog> log;
  std::vector<std::size_t> train_indices;  // sample indices
  std::vector<std::size_t> val_indices;
};

// Validation objects are a seeded fraction of whole objects (all tiles of an
// object fall on the same side).
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_validation(const Dataset& d, double fraction,
                                                                               std::uint64_t seed);

// Loss and per-sample gradients (dL/d out) of the configured objective.
FocalResult training_objective(const std::vector<LevelScores>& probs, const std::vector<const Sample*>& batch,
                               const Taxonomy& t, const TrainConfig& cfg);

// Objective value over a set of samples in a single batch.
double dataset_loss(const Model& m, const Dataset& d, const std::vector<std::size_t>& indices, const Taxonomy& t,
                    const TrainConfig& cfg);

// Single-threaded mini-batch SGD. Throws NumericalError on divergence.
TrainResult train(const Dataset& d, const Taxonomy& t, const TrainConfig& cfg);

std::string format_training_log(const std::vector<EpochLog>& log, std::size_t levels);

}  // namespace hiercls
