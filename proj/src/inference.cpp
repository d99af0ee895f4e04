#include "hiercls/inference.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace hiercls {

namespace {

double safe_log(double p) { return std::log(std::max(p, kInferenceLogFloor)); }

int argmax(std::span<const double> v) {
  int best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  return best;
}

LevelScores to_log(const LevelScores& probs) {
  LevelScores out(probs.size());
  for (std::size_t l = 0; l < probs.size(); ++l) {
    out[l].resize(probs[l].size());
    for (std::size_t c = 0; c < probs[l].size(); ++c) out[l][c] = safe_log(probs[l][c]);
  }
  return out;
}

double tuple_log_score(const LevelScores& log_scores, const LabelTuple& labels) {
  double s = 0.0;
  for (std::size_t l = 0; l < labels.size(); ++l) s += log_scores[l][static_cast<std::size_t>(labels[l])];
  return s;
}

PredictionTuple finish(LabelTuple labels, const LevelScores& log_scores, Strategy s, const Taxonomy& t) {
  PredictionTuple p;
  p.joint_log_score = tuple_log_score(log_scores, labels);
  p.consistent = is_consistent(t, labels);
  p.labels = std::move(labels);
  p.strategy = s;
  return p;
}

PredictionTuple mt_from_log(const LevelScores& log_scores, const Taxonomy& t) {
  LabelTuple labels(log_scores.size());
  for (std::size_t l = 0; l < log_scores.size(); ++l) labels[l] = argmax(log_scores[l]);
  return finish(std::move(labels), log_scores, Strategy::MT, t);
}

PredictionTuple f2c_from_log(const LevelScores& log_scores, const Taxonomy& t) {
  return finish(lift_to_tuple(t, argmax(log_scores.back())), log_scores, Strategy::F2C, t);
}

PredictionTuple jo_from_log(const LevelScores& log_scores, const Taxonomy& t) {
  const auto& tuples = t.tuples();
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    const double s = tuple_log_score(log_scores, tuples[i]);
    if (s > best_score) {
      best_score = s;
      best = i;
    }
  }
  return finish(tuples[best], log_scores, Strategy::JO, t);
}

}  // namespace

std::string_view strategy_name(Strategy s) {
  switch (s) {
    case Strategy::MT:
      return "mt";
    case Strategy::F2C:
      return "f2c";
    case Strategy::JO:
      return "jo";
  }
  return "?";
}

Strategy parse_strategy(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "mt") return Strategy::MT;
  if (lower == "f2c") return Strategy::F2C;
  if (lower == "jo") return Strategy::JO;
  throw std::invalid_argument("unknown strategy '" + std::string(s) + "' (expected mt, f2c or jo)");
}

PredictionTuple predict_mt(const LevelScores& probs, const Taxonomy& t) {
  check_level_shapes(probs, level_sizes(t), "predict_mt");
  return mt_from_log(to_log(probs), t);
}

PredictionTuple predict_f2c(const LevelScores& probs, const Taxonomy& t) {
  check_level_shapes(probs, level_sizes(t), "predict_f2c");
  return f2c_from_log(to_log(probs), t);
}

PredictionTuple predict_jo(const LevelScores& probs, const Taxonomy& t) {
  check_level_shapes(probs, level_sizes(t), "predict_jo");
  return jo_from_log(to_log(probs), t);
}

PredictionTuple predict(const LevelScores& probs, Strategy s, const Taxonomy& t) {
  switch (s) {
    case Strategy::MT:
      return predict_mt(probs, t);
    case Strategy::F2C:
      return predict_f2c(probs, t);
    case Strategy::JO:
      return predict_jo(probs, t);
  }
  throw std::invalid_argument("unknown strategy");
}

PredictionTuple fuse_tiles(std::span<const LevelScores> per_tile_probs, Strategy s, const Taxonomy& t) {
  if (per_tile_probs.empty()) throw std::invalid_argument("fuse_tiles: no tiles");
  const auto sizes = level_sizes(t);
  LevelScores combined(sizes.size());
  for (std::size_t l = 0; l < sizes.size(); ++l) combined[l].assign(sizes[l], 0.0);
  for (const auto& tile : per_tile_probs) {
    check_level_shapes(tile, sizes, "fuse_tiles");
    for (std::size_t l = 0; l < sizes.size(); ++l)
      for (std::size_t c = 0; c < sizes[l]; ++c) combined[l][c] += safe_log(tile[l][c]);
  }
  switch (s) {
    case Strategy::MT:
      return mt_from_log(combined, t);
    case Strategy::JO:
      return jo_from_log(combined, t);
    case Strategy::F2C: {
      std::vector<std::size_t> votes(t.leaf_count(), 0);
      for (const auto& tile : per_tile_probs) ++votes[static_cast<std::size_t>(argmax(tile.back()))];
      const auto winner = std::max_element(votes.begin(), votes.end()) - votes.begin();
      return finish(lift_to_tuple(t, static_cast<int>(winner)), combined, Strategy::F2C, t);
    }
  }
  throw std::invalid_argument("unknown strategy");
}

std::vector<PredictionTuple> predict_objects_serial(std::span<const std::vector<LevelScores>> objects, Strategy s,
                                                    const Taxonomy& t) {
  std::vector<PredictionTuple> out;
  out.reserve(objects.size());
  for (const auto& tiles : objects) out.push_back(fuse_tiles(tiles, s, t));
  return out;
}

std::vector<PredictionTuple> predict_objects(std::span<const std::vector<LevelScores>> objects, Strategy s,
                                             const Taxonomy& t) {
  std::vector<PredictionTuple> out(objects.size());
  const auto n = static_cast<std::ptrdiff_t>(objects.size());
  // Exceptions must not escape the parallel region; shapes are checked up front.
  const auto sizes = level_sizes(t);
  for (const auto& tiles : objects) {
    if (tiles.empty()) throw std::invalid_argument("fuse_tiles: no tiles");
    for (const auto& tile : tiles) check_level_shapes(tile, sizes, "predict_objects");
  }
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = fuse_tiles(objects[static_cast<std::size_t>(i)], s, t);
  return out;
}

}  // namespace hiercls
