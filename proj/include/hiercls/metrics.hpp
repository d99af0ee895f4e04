#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hiercls/inference.hpp"
#include "hiercls/taxonomy.hpp"

namespace hiercls {

// Rows are reference classes, columns predicted classes.
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  ConfusionMatrix(std::size_t level, std::size_t classes)
      : level_(level), classes_(classes), counts_(classes * classes, 0) {}

  std::size_t level() const noexcept { return level_; }
  std::size_t classes() const noexcept { return classes_; }
  std::uint64_t count(std::size_t ref, std::size_t pred) const { return counts_[ref * classes_ + pred]; }
  std::uint64_t total() const noexcept;
  std::uint64_t row_sum(std::size_t c) const;
  std::uint64_t col_sum(std::size_t c) const;

  void accumulate(int reference, int predicted);
  void merge(const ConfusionMatrix& other);

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::size_t level_ = 0;
  std::size_t classes_ = 0;
  std::vector<std::uint64_t> counts_;
};

struct ClassScore {
  bool present = false;  // appears in the reference or the prediction
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Throw ValidationError("no samples") on an empty matrix.
double overall_accuracy(const ConfusionMatrix& cm);
std::vector<ClassScore> f1_scores(const ConfusionMatrix& cm);
// Unweighted mean over present classes.
double mean_f1(const ConfusionMatrix& cm);

// Fraction of predictions that violate the hierarchy.
double consistency_rate(std::span<const PredictionTuple> predictions);

// One confusion matrix per level.
std::vector<ConfusionMatrix> confusion_matrices(const Taxonomy& t, std::span<const LabelTuple> reference,
                                                std::span<const PredictionTuple> predictions);

struct MetricsHeader {
  std::string strategy;
  std::size_t objects = 0;
  double inconsistency_rate = 0.0;
};

// Tab-separated report: comment header, `level OA mF1` block, blank line,
// `level class precision recall F1` block. Absent classes print '-'.
std::string format_metrics_report(const Taxonomy& t, const std::vector<ConfusionMatrix>& cms,
                                  const MetricsHeader& header);

}  // namespace hiercls
