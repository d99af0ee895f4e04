// hiercls: data generation, training, prediction, evaluation, gradient
// checking and tiling inspection.
//
// Exit status: 0 success, 1 usage error, 2 invalid input, 3 numerical failure.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "cli_config.hpp"
#include "hiercls/dataset.hpp"
#include "hiercls/errors.hpp"
#include "hiercls/evaluate.hpp"
#include "hiercls/gradcheck.hpp"
#include "hiercls/model_io.hpp"
#include "hiercls/synthetic.hpp"
#include "hiercls/taxonomy.hpp"
#include "hiercls/tiling.hpp"
#include "hiercls/train.hpp"

#ifndef HIERCLS_DEFAULT_TAXONOMY
#define HIERCLS_DEFAULT_TAXONOMY "fixtures/table1.tax"
#endif

using namespace hiercls;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitNumerical = 3;

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << text;
  if (!out) throw ValidationError("failed writing '" + path + "'");
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size()) throw std::invalid_argument("bad number '" + item + "'");
    out.push_back(v);
  }
  return out;
}

struct Common {
  std::string taxonomy = HIERCLS_DEFAULT_TAXONOMY;
  std::string config;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--taxonomy", c.taxonomy, "Taxonomy file")->capture_default_str();
  sub->add_option("--config", c.config, "key=value file; command-line flags override its values");
}

// gen-data ------------------------------------------------------------------

struct GenArgs {
  Common common;
  std::string out;
  std::string preset = "separable";
  std::uint64_t seed = 0;
  SyntheticSpec spec;
  std::string level_scale;
  CLI::App* app = nullptr;
};

void setup_gen(CLI::App& root, GenArgs& a) {
  a.app = root.add_subcommand("gen-data", "Write a synthetic dataset");
  auto* s = a.app;
  add_common(s, a.common);
  s->add_option("--out", a.out, "Dataset file to write")->required();
  s->add_option("--preset", a.preset, "separable, correlated or plain")
      ->check(CLI::IsMember({"separable", "correlated", "plain"}))
      ->capture_default_str();
  s->add_option("--seed", a.seed, "Generator seed")->capture_default_str();
  s->add_option("--feature-dim", a.spec.feature_dim, "Feature width (overrides preset)");
  s->add_option("--samples-per-leaf", a.spec.samples_per_leaf, "Objects per leaf class (overrides preset)");
  s->add_option("--tiles-per-object", a.spec.tiles_per_object, "Samples per object (overrides preset)");
  s->add_option("--spread", a.spec.spread, "Cluster noise std-dev (overrides preset)");
  s->add_option("--level-scale", a.level_scale, "Comma-separated per-level cluster offsets (overrides preset)");
  s->add_option("--label-noise", a.spec.label_noise_rate, "Fraction of objects relabelled (overrides preset)");
  s->add_option("--confusion-rate", a.spec.confusion_rate, "Fraction of samples with a confused finest level");
  s->add_option("--confusion-strength", a.spec.confusion_strength, "Pull towards the confusing leaf, in [0, 1]");
  s->add_option("--domain-offset", a.spec.domain_offset, "Constant added to every feature");
}

int run_gen(GenArgs& a) {
  const auto t = load_taxonomy(a.common.taxonomy);
  SyntheticSpec spec = a.preset == "separable"    ? separable_spec(a.seed)
                       : a.preset == "correlated" ? correlated_noise_spec(a.seed)
                                                  : SyntheticSpec{};
  spec.seed = a.seed;
  auto given = [&](const char* name) { return a.app->get_option(name)->count() > 0; };
  if (given("--feature-dim")) spec.feature_dim = a.spec.feature_dim;
  if (given("--samples-per-leaf")) spec.samples_per_leaf = a.spec.samples_per_leaf;
  if (given("--tiles-per-object")) spec.tiles_per_object = a.spec.tiles_per_object;
  if (given("--spread")) spec.spread = a.spec.spread;
  if (given("--level-scale")) spec.level_scale = parse_list(a.level_scale);
  if (given("--label-noise")) spec.label_noise_rate = a.spec.label_noise_rate;
  if (given("--confusion-rate")) spec.confusion_rate = a.spec.confusion_rate;
  if (given("--confusion-strength")) spec.confusion_strength = a.spec.confusion_strength;
  if (given("--domain-offset")) spec.domain_offset = a.spec.domain_offset;
  const auto d = gen_synthetic(spec, t);
  write_output(a.out, serialize_dataset(d, t));
  std::fprintf(stderr, "wrote %zu samples (%zu objects) to %s\n", d.samples.size(), group_by_object(d).size(),
               a.out.c_str());
  return 0;
}

// train ---------------------------------------------------------------------

struct TrainArgs {
  Common common;
  std::string data;
  std::string out;
  std::string log;
  std::string variant = "jo";
  TrainConfig cfg;
};

void setup_train(CLI::App& root, TrainArgs& a, CLI::App*& sub) {
  sub = root.add_subcommand("train", "Train a model; writes a checkpoint and the training log");
  auto* s = sub;
  add_common(s, a.common);
  s->add_option("--data", a.data, "Dataset file")->required();
  s->add_option("--out", a.out, "Checkpoint file to write")->required();
  s->add_option("--log", a.log, "Training log file (stdout when omitted)");
  s->add_option("--variant", a.variant, "Training objective: mt or jo")
      ->check(CLI::IsMember({"mt", "jo", "f2c"}, CLI::ignore_case))
      ->capture_default_str();
  s->add_option("--epochs", a.cfg.epochs, "Passes over the training split")->capture_default_str();
  s->add_option("--lr", a.cfg.base_learning_rate, "Initial learning rate")->capture_default_str();
  s->add_option("--lr-drop-epoch", a.cfg.lr_drop_epoch, "Epochs before the rate drops")->capture_default_str();
  s->add_option("--lr-dropped", a.cfg.dropped_learning_rate, "Learning rate after the drop")->capture_default_str();
  s->add_option("--momentum", a.cfg.momentum, "SGD momentum")->capture_default_str();
  s->add_option("--weight-decay", a.cfg.weight_decay, "L2 weight decay")->capture_default_str();
  s->add_option("--focal-exponent", a.cfg.focal_exponent, "Focal loss exponent")->capture_default_str();
  s->add_option("--batch-size", a.cfg.batch_size, "Mini-batch size")->capture_default_str();
  s->add_option("--val-fraction", a.cfg.validation_fraction, "Fraction of objects held out")->capture_default_str();
  s->add_option("--hidden", a.cfg.hidden_width, "Hidden layer width")->capture_default_str();
  s->add_option("--seed", a.cfg.seed, "Initialization, split and shuffle seed")->capture_default_str();
  s->add_flag("--add-level-loss", a.cfg.add_level_loss, "JO: also add the per-level focal loss");
  s->add_flag("--jo-average-over-tuples", a.cfg.jo_average_over_tuples, "JO: divide the loss by the tuple count");
}

int run_train(TrainArgs& a) {
  const auto t = load_taxonomy(a.common.taxonomy);
  const auto d = load_dataset(a.data, t);
  a.cfg.variant = parse_variant(a.variant);
  a.cfg.validate();
  const auto r = train(d, t, a.cfg);
  save_model(r.model, a.out);
  write_output(a.log, format_training_log(r.log, t.level_count()));
  std::fprintf(stderr, "trained %s on %zu samples (%zu held out); checkpoint %s\n",
               std::string(variant_name(a.cfg.variant)).c_str(), r.train_indices.size(), r.val_indices.size(),
               a.out.c_str());
  return 0;
}

// predict / eval ------------------------------------------------------------

struct ScoreArgs {
  Common common;
  std::string model;
  std::string data;
  std::string out;
  std::string strategy = "jo";
  std::string split = "all";
  double val_fraction = TrainConfig{}.validation_fraction;
  std::uint64_t seed = 0;
};

CLI::App* setup_score(CLI::App& root, ScoreArgs& a, const char* name, const char* help, const char* out_help) {
  auto* s = root.add_subcommand(name, help);
  add_common(s, a.common);
  s->add_option("--model", a.model, "Checkpoint file")->required();
  s->add_option("--data", a.data, "Dataset file")->required();
  s->add_option("--out", a.out, out_help);
  s->add_option("--strategy", a.strategy, "Inference strategy: mt, f2c or jo")
      ->check(CLI::IsMember({"mt", "f2c", "jo"}, CLI::ignore_case))
      ->capture_default_str();
  s->add_option("--split", a.split, "Samples to score: all, train or val (val/train repeat the training split)")
      ->check(CLI::IsMember({"all", "train", "val"}))
      ->capture_default_str();
  s->add_option("--val-fraction", a.val_fraction, "Held-out fraction used at training time")->capture_default_str();
  s->add_option("--seed", a.seed, "Training seed (for --split)")->capture_default_str();
  return s;
}

Evaluation score(const ScoreArgs& a, const Taxonomy& t) {
  const auto m = load_model(a.model);
  const auto d = load_dataset(a.data, t);
  std::vector<std::size_t> subset;
  if (a.split != "all") {
    auto [train_idx, val_idx] = split_validation(d, a.val_fraction, a.seed);
    subset = a.split == "val" ? val_idx : train_idx;
    if (subset.empty()) throw ValidationError("the " + a.split + " split is empty");
  }
  return evaluate(m, t, d, parse_strategy(a.strategy), subset);
}

int run_predict(const ScoreArgs& a) {
  const auto t = load_taxonomy(a.common.taxonomy);
  write_output(a.out, format_predictions(t, score(a, t)));
  return 0;
}

int run_eval(const ScoreArgs& a) {
  const auto t = load_taxonomy(a.common.taxonomy);
  write_output(a.out, format_evaluation_report(t, score(a, t)));
  return 0;
}

// gradcheck -----------------------------------------------------------------

struct GradArgs {
  Common common;
  std::uint64_t seed = 0;
  std::size_t instances = 20;
  double tolerance = 1e-4;
};

CLI::App* setup_grad(CLI::App& root, GradArgs& a) {
  auto* s = root.add_subcommand("gradcheck", "Compare analytic and finite-difference gradients");
  add_common(s, a.common);
  s->add_option("--seed", a.seed, "Instance seed")->capture_default_str();
  s->add_option("--instances", a.instances, "Random instances per check")->capture_default_str();
  s->add_option("--tolerance", a.tolerance, "Largest accepted relative error")->capture_default_str();
  return s;
}

int run_grad(const GradArgs& a) {
  const auto t = load_taxonomy(a.common.taxonomy);
  const auto r = check_gradients(t, a.seed, a.instances);
  std::printf("check\tmax_rel_error\n");
  std::printf("head\t%.3e\n", r.head);
  std::printf("focal\t%.3e\n", r.focal);
  std::printf("jo\t%.3e\n", r.jo);
  std::printf("composite\t%.3e\n", r.composite);
  const bool ok = r.max() < a.tolerance;
  std::printf("max\t%.3e\t%s (tolerance %.1e, %zu instances)\n", r.max(), ok ? "ok" : "FAILED", a.tolerance,
              r.instances);
  return ok ? 0 : kExitNumerical;
}

// tile ----------------------------------------------------------------------

struct TileArgs {
  std::string config;
  std::string polygons;
  std::uint64_t seed = 0;
  bool list = false;
};

CLI::App* setup_tile(CLI::App& root, TileArgs& a) {
  auto* s = root.add_subcommand("tile", "Print the tiles chosen for each polygon");
  s->add_option("--config", a.config, "key=value file; command-line flags override its values");
  s->add_option("--polygons", a.polygons, "Polygon file")->required();
  s->add_option("--seed", a.seed, "Seed of the tile subsampling")->capture_default_str();
  s->add_flag("--list", a.list, "Also list every retained tile");
  return s;
}

int run_tile(const TileArgs& a) {
  const auto objects = load_polygons(a.polygons);
  std::ostringstream sum, tiles;
  sum << "object\twidth\theight\tcandidates\tafter_filter\tretained\n";
  tiles << "object\torigin_x\torigin_y\toverlap\n";
  for (const auto& p : objects) {
    const auto box = bounding_box(p);
    const auto r = tile_object(p, a.seed);
    sum << p.id << '\t' << box.width() << '\t' << box.height() << '\t' << r.candidate_count << '\t'
        << r.after_filter_count << '\t' << r.tiles.size() << '\n';
    char buf[64];
    for (const auto& tile : r.tiles) {
      std::snprintf(buf, sizeof buf, "%.6f", tile.overlap_fraction);
      tiles << p.id << '\t' << tile.origin.x << '\t' << tile.origin.y << '\t' << buf << '\n';
    }
  }
  std::cout << sum.str();
  if (a.list) std::cout << '\n' << tiles.str();
  return 0;
}

int run(int argc, char** argv) {
  CLI::App app{"Hierarchy-consistent land use classification toolkit"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);

  GenArgs gen;
  TrainArgs tr;
  ScoreArgs pred, ev;
  GradArgs grad;
  TileArgs tile;
  CLI::App* train_cmd = nullptr;
  setup_gen(app, gen);
  setup_train(app, tr, train_cmd);
  auto* pred_cmd = setup_score(app, pred, "predict", "Write per-object predictions", "Prediction dump (stdout)");
  auto* eval_cmd = setup_score(app, ev, "eval", "Write the metrics report", "Metrics report (stdout)");
  auto* grad_cmd = setup_grad(app, grad);
  auto* tile_cmd = setup_tile(app, tile);

  // Splice configuration-file values in front of the explicit flags so that
  // the later, explicit occurrence wins.
  std::vector<std::string> args(argv, argv + argc);
  const auto config_path = cli::find_config_path(argc, argv);
  if (!config_path.empty()) {
    CLI::App* sub = argc > 1 ? app.get_subcommand_no_throw(argv[1]) : nullptr;
    if (sub == nullptr) throw CLI::ValidationError("--config must follow the subcommand name");
    const auto extra = cli::config_arguments(cli::load_run_config(config_path), *sub);
    args.insert(args.begin() + 2, extra.begin(), extra.end());
  }
  std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  if (gen.app->parsed()) return run_gen(gen);
  if (train_cmd->parsed()) return run_train(tr);
  if (pred_cmd->parsed()) return run_predict(pred);
  if (eval_cmd->parsed()) return run_eval(ev);
  if (grad_cmd->parsed()) return run_grad(grad);
  if (tile_cmd->parsed()) return run_tile(tile);
  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const CLI::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInvalid;
  }
}
