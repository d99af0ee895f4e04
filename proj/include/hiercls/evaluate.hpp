#pragma once

#include <span>
#include <string>
#include <vector>

#include "hiercls/backbone.hpp"
#include "hiercls/dataset.hpp"
#include "hiercls/inference.hpp"
#include "hiercls/metrics.hpp"

namespace hiercls {

struct Evaluation {
  Strategy strategy = Strategy::JO;
  std::vector<std::string> object_ids;
  std::vector<LabelTuple> reference;
  std::vector<PredictionTuple> predictions;
  std::vector<ConfusionMatrix> confusion;  // one per level
  double inconsistency_rate = 0.0;
};

// Object-level evaluation: tiles of one object are fused before scoring.
// `subset` restricts to the given sample indices (all samples when empty).
// Forward passes and fusion run over OpenMP threads; confusion matrices are
// accumulated per thread and merged.
Evaluation evaluate(const Model& m, const Taxonomy& t, const Dataset& d, Strategy s,
                    std::span<const std::size_t> subset = {});
// Single-threaded reference with identical results.
Evaluation evaluate_serial(const Model& m, const Taxonomy& t, const Dataset& d, Strategy s,
                           std::span<const std::size_t> subset = {});

std::string format_evaluation_report(const Taxonomy& t, const Evaluation& e);

// Prediction dump: header line, then one tab-separated record per object:
// object_id, strategy, per level (index, name), joint_log_score, consistent.
std::string format_predictions(const Taxonomy& t, const Evaluation& e);

}  // namespace hiercls
