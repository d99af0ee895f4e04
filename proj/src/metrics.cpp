#include "hiercls/metrics.hpp"

#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "hiercls/errors.hpp"

namespace hiercls {

std::uint64_t ConfusionMatrix::total() const noexcept {
  return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

std::uint64_t ConfusionMatrix::row_sum(std::size_t c) const {
  std::uint64_t s = 0;
  for (std::size_t j = 0; j < classes_; ++j) s += count(c, j);
  return s;
}

std::uint64_t ConfusionMatrix::col_sum(std::size_t c) const {
  std::uint64_t s = 0;
  for (std::size_t i = 0; i < classes_; ++i) s += count(i, c);
  return s;
}

void ConfusionMatrix::accumulate(int reference, int predicted) {
  if (reference < 0 || predicted < 0 || static_cast<std::size_t>(reference) >= classes_ ||
      static_cast<std::size_t>(predicted) >= classes_)
    throw std::out_of_range("confusion matrix index out of range");
  ++counts_[static_cast<std::size_t>(reference) * classes_ + static_cast<std::size_t>(predicted)];
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  if (other.classes_ != classes_ || other.level_ != level_)
    throw std::invalid_argument("cannot merge confusion matrices of different shape");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

double overall_accuracy(const ConfusionMatrix& cm) {
  const auto total = cm.total();
  if (total == 0) throw ValidationError("no samples");
  std::uint64_t diag = 0;
  for (std::size_t c = 0; c < cm.classes(); ++c) diag += cm.count(c, c);
  return static_cast<double>(diag) / static_cast<double>(total);
}

std::vector<ClassScore> f1_scores(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw ValidationError("no samples");
  std::vector<ClassScore> out(cm.classes());
  for (std::size_t c = 0; c < cm.classes(); ++c) {
    const auto tp = static_cast<double>(cm.count(c, c));
    const auto row = cm.row_sum(c);
    const auto col = cm.col_sum(c);
    ClassScore& s = out[c];
    s.present = row > 0 || col > 0;
    if (!s.present) continue;
    s.precision = col > 0 ? tp / static_cast<double>(col) : 0.0;
    s.recall = row > 0 ? tp / static_cast<double>(row) : 0.0;
    const double denom = s.precision + s.recall;
    s.f1 = denom > 0.0 ? 2.0 * s.precision * s.recall / denom : 0.0;
  }
  return out;
}

double mean_f1(const ConfusionMatrix& cm) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& s : f1_scores(cm)) {
    if (!s.present) continue;
    sum += s.f1;
    ++n;
  }
  return sum / static_cast<double>(n);
}

double consistency_rate(std::span<const PredictionTuple> predictions) {
  if (predictions.empty()) throw ValidationError("no samples");
  std::size_t bad = 0;
  for (const auto& p : predictions) bad += !p.consistent;
  return static_cast<double>(bad) / static_cast<double>(predictions.size());
}

std::vector<ConfusionMatrix> confusion_matrices(const Taxonomy& t, std::span<const LabelTuple> reference,
                                                std::span<const PredictionTuple> predictions) {
  if (reference.size() != predictions.size())
    throw std::invalid_argument("confusion_matrices: reference/prediction count mismatch");
  std::vector<ConfusionMatrix> cms;
  for (std::size_t l = 0; l < t.level_count(); ++l) cms.emplace_back(l, t.class_count(l));
  for (std::size_t k = 0; k < reference.size(); ++k)
    for (std::size_t l = 0; l < t.level_count(); ++l) cms[l].accumulate(reference[k][l], predictions[k].labels[l]);
  return cms;
}

std::string format_metrics_report(const Taxonomy& t, const std::vector<ConfusionMatrix>& cms,
                                  const MetricsHeader& header) {
  std::string out;
  char buf[512];
  std::snprintf(buf, sizeof buf, "# strategy\t%s\n# objects\t%zu\n# inconsistent_rate\t%.6f\n",
                header.strategy.c_str(), header.objects, header.inconsistency_rate);
  out += buf;
  out += "level\tOA\tmF1\n";
  for (const auto& cm : cms) {
    std::snprintf(buf, sizeof buf, "%zu\t%.6f\t%.6f\n", cm.level() + 1, overall_accuracy(cm), mean_f1(cm));
    out += buf;
  }
  out += "\nlevel\tclass\tprecision\trecall\tF1\n";
  for (const auto& cm : cms) {
    const auto scores = f1_scores(cm);
    for (std::size_t c = 0; c < scores.size(); ++c) {
      const auto& name = t.name(cm.level(), static_cast<int>(c));
      if (scores[c].present)
        std::snprintf(buf, sizeof buf, "%zu\t%s\t%.6f\t%.6f\t%.6f\n", cm.level() + 1, name.c_str(),
                      scores[c].precision, scores[c].recall, scores[c].f1);
      else
        std::snprintf(buf, sizeof buf, "%zu\t%s\t-\t-\t-\n", cm.level() + 1, name.c_str());
      out += buf;
    }
  }
  return out;
}

}  // namespace hiercls
