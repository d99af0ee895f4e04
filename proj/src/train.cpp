#include "hiercls/train.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "hiercls/errors.hpp"
#include "hiercls/random.hpp"

namespace hiercls {

std::string_view variant_name(Variant v) { return v == Variant::MT ? "mt" : "jo"; }

Variant parse_variant(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "mt" || lower == "f2c") return Variant::MT;
  if (lower == "jo") return Variant::JO;
  throw std::invalid_argument("unknown training variant '" + std::string(s) + "' (expected mt or jo)");
}

Strategy default_strategy(Variant v) { return v == Variant::MT ? Strategy::MT : Strategy::JO; }

void TrainConfig::validate() const {
  if (epochs <= 0) throw std::invalid_argument("epochs must be positive");
  if (!(base_learning_rate > 0.0) || !(dropped_learning_rate > 0.0))
    throw std::invalid_argument("learning rates must be positive");
  if (lr_drop_epoch < 0) throw std::invalid_argument("lr_drop_epoch must be >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("momentum must lie in [0, 1)");
  if (!(weight_decay >= 0.0)) throw std::invalid_argument("weight decay must be >= 0");
  if (batch_size == 0) throw std::invalid_argument("batch size must be positive");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0))
    throw std::invalid_argument("validation fraction must lie in [0, 1)");
  if (hidden_width == 0) throw std::invalid_argument("hidden width must be positive");
  FocalConfig{focal_exponent}.validate();
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_validation(const Dataset& d, double fraction,
                                                                               std::uint64_t seed) {
  auto groups = group_by_object(d);
  Rng rng(seed ^ 0x5bd1e995ULL);
  shuffle(groups, rng);
  const auto n_val = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(groups.size())));
  std::pair<std::vector<std::size_t>, std::vector<std::size_t>> out;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    auto& dst = g < n_val ? out.second : out.first;
    dst.insert(dst.end(), groups[g].begin(), groups[g].end());
  }
  std::sort(out.first.begin(), out.first.end());
  std::sort(out.second.begin(), out.second.end());
  return out;
}

FocalResult training_objective(const std::vector<LevelScores>& probs, const std::vector<const Sample*>& batch,
                               const Taxonomy& t, const TrainConfig& cfg) {
  const FocalConfig focal{cfg.focal_exponent};
  if (cfg.variant == Variant::MT) {
    std::vector<LabelTuple> labels;
    for (const Sample* s : batch) labels.push_back(s->labels);
    return focal_loss(probs, labels, focal);
  }
  std::vector<int> leaves;
  for (const Sample* s : batch) leaves.push_back(s->leaf);
  FocalResult r = jo_objective(probs, leaves, t, focal, JoLossOptions{cfg.jo_average_over_tuples});
  if (cfg.add_level_loss) {
    std::vector<LabelTuple> labels;
    for (const Sample* s : batch) labels.push_back(s->labels);
    const FocalResult extra = focal_loss(probs, labels, focal);
    r.loss += extra.loss;
    for (std::size_t k = 0; k < r.d_scores.size(); ++k)
      for (std::size_t l = 0; l < r.d_scores[k].size(); ++l)
        for (std::size_t c = 0; c < r.d_scores[k][l].size(); ++c) r.d_scores[k][l][c] += extra.d_scores[k][l][c];
  }
  return r;
}

namespace {

bool finite_scores(const LevelScores& s) {
  for (const auto& v : s)
    for (double x : v)
      if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace

double dataset_loss(const Model& m, const Dataset& d, const std::vector<std::size_t>& indices, const Taxonomy& t,
                    const TrainConfig& cfg) {
  if (indices.empty()) return 0.0;
  std::vector<LevelScores> probs;
  std::vector<const Sample*> batch;
  for (auto i : indices) {
    probs.push_back(model_forward(m, d.samples[i].features).head.probs);
    if (!finite_scores(probs.back())) return std::numeric_limits<double>::quiet_NaN();
    batch.push_back(&d.samples[i]);
  }
  return training_objective(probs, batch, t, cfg).loss;
}

namespace {

std::vector<double> level_errors(const Model& m, const Dataset& d, const std::vector<std::size_t>& indices,
                                 const Taxonomy& t, Strategy s) {
  std::vector<double> err(t.level_count(), 0.0);
  if (indices.empty()) return err;
  for (auto i : indices) {
    const auto p = predict(model_forward(m, d.samples[i].features).head.probs, s, t);
    for (std::size_t l = 0; l < err.size(); ++l) err[l] += p.labels[l] != d.samples[i].labels[l];
  }
  for (double& e : err) e /= static_cast<double>(indices.size());
  return err;
}

}  // namespace

TrainResult train(const Dataset& d, const Taxonomy& t, const TrainConfig& cfg) {
  cfg.validate();
  if (d.samples.empty()) throw ValidationError("cannot train on an empty dataset");
  if (d.taxonomy_digest != t.digest()) throw ValidationError("dataset and taxonomy do not match");

  TrainResult result;
  std::tie(result.train_indices, result.val_indices) = split_validation(d, cfg.validation_fraction, cfg.seed);
  if (result.train_indices.empty()) throw ValidationError("validation split leaves no training samples");

  Model& model = result.model;
  model = init_model(t, d.feature_dim, cfg.hidden_width, cfg.seed);
  Model grad = zeros_like(model);
  const auto params = model.tensors();
  const auto grads_mut = grad.tensors();
  const std::vector<const Matrix*> grads(grads_mut.begin(), grads_mut.end());

  OptimizerState opt;
  opt.momentum = cfg.momentum;
  opt.weight_decay = cfg.weight_decay;
  opt.schedule.steps = {{0, cfg.base_learning_rate}, {cfg.lr_drop_epoch, cfg.dropped_learning_rate}};

  Rng rng(cfg.seed ^ 0x2545f4914f6cdd1dULL);
  std::vector<std::size_t> order = result.train_indices;
  const Strategy strategy = default_strategy(cfg.variant);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle(order, rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      std::vector<const Sample*> batch;
      std::vector<ModelForward> fwd;
      std::vector<LevelScores> probs;
      for (std::size_t k = start; k < end; ++k) {
        const Sample& s = d.samples[order[k]];
        batch.push_back(&s);
        fwd.push_back(model_forward(model, s.features));
        probs.push_back(fwd.back().head.probs);
        if (!finite_scores(probs.back()))
          throw NumericalError("training diverged: non-finite scores in epoch " + std::to_string(epoch + 1));
      }
      const FocalResult obj = training_objective(probs, batch, t, cfg);
      if (!std::isfinite(obj.loss))
        throw NumericalError("training diverged: non-finite loss in epoch " + std::to_string(epoch + 1));
      loss_sum += obj.loss * static_cast<double>(batch.size());
      for (Matrix* g : grads_mut) g->set_zero();
      for (std::size_t k = 0; k < batch.size(); ++k) model_backward_accumulate(model, fwd[k], obj.d_scores[k], grad);
      try {
        sgd_step(params, grads, opt, epoch);
      } catch (const NumericalError& e) {
        throw NumericalError("training diverged in epoch " + std::to_string(epoch + 1) + ": " + e.what());
      }
    }
    EpochLog entry;
    entry.epoch = epoch + 1;
    entry.learning_rate = opt.schedule.rate_at(epoch);
    entry.train_loss = loss_sum / static_cast<double>(order.size());
    entry.val_loss = dataset_loss(model, d, result.val_indices, t, cfg);
    entry.val_error = level_errors(model, d, result.val_indices, t, strategy);
    if (!std::isfinite(entry.val_loss)) throw NumericalError("training diverged: non-finite validation loss");
    result.log.push_back(std::move(entry));
  }
  return result;
}

std::string format_training_log(const std::vector<EpochLog>& log, std::size_t levels) {
  std::string out = "epoch\tlr\ttrain_loss\tval_loss";
  for (std::size_t l = 0; l < levels; ++l) out += "\tval_err_level_" + std::to_string(l + 1);
  out += "\n";
  char buf[64];
  for (const auto& e : log) {
    std::snprintf(buf, sizeof buf, "%d\t%.6g\t%.9f\t%.9f", e.epoch, e.learning_rate, e.train_loss, e.val_loss);
    out += buf;
    for (double v : e.val_error) {
      std::snprintf(buf, sizeof buf, "\t%.6f", v);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

}  // namespace hiercls
