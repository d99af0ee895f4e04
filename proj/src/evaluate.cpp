#include "hiercls/evaluate.hpp"

#include <cstdio>
#include <stdexcept>

#include "hiercls/errors.hpp"

namespace hiercls {

namespace {

struct ObjectGroups {
  std::vector<std::vector<std::size_t>> groups;
};

ObjectGroups select_groups(const Dataset& d, std::span<const std::size_t> subset) {
  ObjectGroups g;
  if (subset.empty()) {
    g.groups = group_by_object(d);
    return g;
  }
  Dataset view;
  view.feature_dim = d.feature_dim;
  std::vector<std::size_t> back;
  for (auto i : subset) {
    view.samples.push_back(Sample{d.samples.at(i).object_id, 0, {}, {}, -1});
    back.push_back(i);
  }
  for (auto& grp : group_by_object(view)) {
    for (auto& i : grp) i = back[i];
    g.groups.push_back(std::move(grp));
  }
  return g;
}

void check_compatible(const Model& m, const Taxonomy& t, const Dataset& d) {
  if (m.taxonomy_digest != t.digest()) throw ValidationError("model was trained for a different taxonomy");
  if (d.taxonomy_digest != t.digest()) throw ValidationError("dataset was written for a different taxonomy");
  if (m.backbone.feature_dim() != d.feature_dim) throw ValidationError("model and dataset feature widths differ");
}

Evaluation prepare(const Taxonomy& t, const Dataset& d, const ObjectGroups& g, Strategy s) {
  Evaluation e;
  e.strategy = s;
  for (const auto& grp : g.groups) {
    e.object_ids.push_back(d.samples[grp.front()].object_id);
    e.reference.push_back(d.samples[grp.front()].labels);
  }
  for (std::size_t l = 0; l < t.level_count(); ++l) e.confusion.emplace_back(l, t.class_count(l));
  return e;
}

}  // namespace

Evaluation evaluate_serial(const Model& m, const Taxonomy& t, const Dataset& d, Strategy s,
                           std::span<const std::size_t> subset) {
  check_compatible(m, t, d);
  const auto g = select_groups(d, subset);
  Evaluation e = prepare(t, d, g, s);
  if (g.groups.empty()) throw ValidationError("no samples");
  for (std::size_t k = 0; k < g.groups.size(); ++k) {
    std::vector<LevelScores> tiles;
    for (auto i : g.groups[k]) tiles.push_back(model_forward(m, d.samples[i].features).head.probs);
    e.predictions.push_back(fuse_tiles(tiles, s, t));
    for (std::size_t l = 0; l < t.level_count(); ++l)
      e.confusion[l].accumulate(e.reference[k][l], e.predictions[k].labels[l]);
  }
  e.inconsistency_rate = consistency_rate(e.predictions);
  return e;
}

Evaluation evaluate(const Model& m, const Taxonomy& t, const Dataset& d, Strategy s,
                    std::span<const std::size_t> subset) {
  check_compatible(m, t, d);
  const auto g = select_groups(d, subset);
  Evaluation e = prepare(t, d, g, s);
  if (g.groups.empty()) throw ValidationError("no samples");
  e.predictions.resize(g.groups.size());
  const auto n = static_cast<std::ptrdiff_t>(g.groups.size());
#pragma omp parallel
  {
    std::vector<ConfusionMatrix> local = e.confusion;
#pragma omp for schedule(dynamic, 16)
    for (std::ptrdiff_t k = 0; k < n; ++k) {
      const auto& grp = g.groups[static_cast<std::size_t>(k)];
      std::vector<LevelScores> tiles;
      tiles.reserve(grp.size());
      for (auto i : grp) tiles.push_back(model_forward(m, d.samples[i].features).head.probs);
      auto& pred = e.predictions[static_cast<std::size_t>(k)];
      pred = fuse_tiles(tiles, s, t);
      const auto& ref = e.reference[static_cast<std::size_t>(k)];
      for (std::size_t l = 0; l < local.size(); ++l) local[l].accumulate(ref[l], pred.labels[l]);
    }
#pragma omp critical
    for (std::size_t l = 0; l < local.size(); ++l) e.confusion[l].merge(local[l]);
  }
  e.inconsistency_rate = consistency_rate(e.predictions);
  return e;
}

std::string format_evaluation_report(const Taxonomy& t, const Evaluation& e) {
  return format_metrics_report(t, e.confusion,
                               {std::string(strategy_name(e.strategy)), e.predictions.size(), e.inconsistency_rate});
}

std::string format_predictions(const Taxonomy& t, const Evaluation& e) {
  std::string out = "object_id\tstrategy";
  for (std::size_t l = 0; l < t.level_count(); ++l) {
    out += "\tlevel_" + std::to_string(l + 1) + "_index";
    out += "\tlevel_" + std::to_string(l + 1) + "_name";
  }
  out += "\tjoint_log_score\tconsistent\n";
  char buf[64];
  for (std::size_t k = 0; k < e.predictions.size(); ++k) {
    const auto& p = e.predictions[k];
    out += e.object_ids[k];
    out += '\t';
    out += strategy_name(p.strategy);
    for (std::size_t l = 0; l < p.labels.size(); ++l) {
      out += '\t' + std::to_string(p.labels[l]) + '\t';
      out += t.name(l, p.labels[l]);
    }
    std::snprintf(buf, sizeof buf, "\t%.17g\t%d\n", p.joint_log_score, p.consistent ? 1 : 0);
    out += buf;
  }
  return out;
}

}  // namespace hiercls
