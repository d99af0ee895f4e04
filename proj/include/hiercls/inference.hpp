#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "hiercls/head.hpp"
#include "hiercls/taxonomy.hpp"

namespace hiercls {

enum class Strategy { MT, F2C, JO };

std::string_view strategy_name(Strategy s);
// Accepts "mt", "f2c", "jo" (any case); throws std::invalid_argument otherwise.
Strategy parse_strategy(std::string_view s);

struct PredictionTuple {
  LabelTuple labels;
  double joint_log_score = 0.0;  // sum_l log P_l[labels[l]] of the scores used
  bool consistent = false;
  Strategy strategy = Strategy::MT;
};

// Lower clamp before every log taken during inference.
inline constexpr double kInferenceLogFloor = 1e-300;

// Per-level independent argmax (lowest index wins ties).
PredictionTuple predict_mt(const LevelScores& probs, const Taxonomy& t);
// Finest-level argmax, ancestors lifted from the taxonomy.
PredictionTuple predict_f2c(const LevelScores& probs, const Taxonomy& t);
// Argmax of the joint score over all consistent tuples (lowest leaf wins ties).
PredictionTuple predict_jo(const LevelScores& probs, const Taxonomy& t);

PredictionTuple predict(const LevelScores& probs, Strategy s, const Taxonomy& t);

// Object-level prediction from the per-tile probabilities of one object.
//   MT:  per level, sum of per-tile log-probabilities, argmax per level.
//   F2C: majority vote of per-tile finest-level argmaxes, lifted.
//   JO:  JO selection on the summed per-tile log-probabilities.
PredictionTuple fuse_tiles(std::span<const LevelScores> per_tile_probs, Strategy s, const Taxonomy& t);

// Batch prediction over objects, one tile group per object. The parallel form
// distributes objects over OpenMP threads; the serial form is the reference.
std::vector<PredictionTuple> predict_objects(std::span<const std::vector<LevelScores>> objects, Strategy s,
                                             const Taxonomy& t);
std::vector<PredictionTuple> predict_objects_serial(std::span<const std::vector<LevelScores>> objects, Strategy s,
                                                    const Taxonomy& t);

}  // namespace hiercls
