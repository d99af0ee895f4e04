// Parallel kernels against their serial references. Run with
// OMP_NUM_THREADS set to compare thread counts.

#include <benchmark/benchmark.h>

#include <cmath>

#include "hiercls/evaluate.hpp"
#include "hiercls/inference.hpp"
#include "hiercls/random.hpp"
#include "hiercls/synthetic.hpp"
#include "hiercls/tiling.hpp"

using namespace hiercls;

namespace {

const Taxonomy& taxonomy() {
  static const Taxonomy t = load_taxonomy(HIERCLS_FIXTURE_DIR "/table1.tax");
  return t;
}

PolygonObject star(int vertices) {
  PolygonObject p{"star", {{}}, std::nullopt};
  for (int i = 0; i < vertices; ++i) {
    const double r = i % 2 ? 60.0 : 125.0;
    const double a = 2 * 3.141592653589793 * i / vertices;
    p.rings[0].push_back({128 + r * std::cos(a), 128 + r * std::sin(a)});
  }
  return p;
}

std::vector<std::vector<LevelScores>> random_objects(std::size_t n) {
  const auto& t = taxonomy();
  Rng rng(3);
  std::vector<std::vector<LevelScores>> objects(n);
  for (auto& o : objects)
    for (int k = 0; k < 3; ++k) {
      LevelScores p;
      for (std::size_t l = 0; l < t.level_count(); ++l) {
        Vector v(t.class_count(l));
        double sum = 0;
        for (auto& x : v) sum += (x = std::exp(2.0 * normal(rng)));
        for (auto& x : v) x /= sum;
        p.push_back(v);
      }
      o.push_back(p);
    }
  return objects;
}

void BM_RasterizeScanline(benchmark::State& state) {
  const auto p = star(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(rasterize_mask(p, {0, 0}));
}

void BM_RasterizeSerial(benchmark::State& state) {
  const auto p = star(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(rasterize_mask_serial(p, {0, 0}));
}

void BM_PredictObjects(benchmark::State& state) {
  const auto objects = random_objects(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(predict_objects(objects, Strategy::JO, taxonomy()));
}

void BM_PredictObjectsSerial(benchmark::State& state) {
  const auto objects = random_objects(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(predict_objects_serial(objects, Strategy::JO, taxonomy()));
}

struct EvalSetup {
  Dataset data;
  Model model;
};

const EvalSetup& eval_setup() {
  static const EvalSetup s = [] {
    SyntheticSpec spec = separable_spec(1);
    spec.tiles_per_object = 3;
    spec.samples_per_leaf = 40;
    return EvalSetup{gen_synthetic(spec, taxonomy()), init_model(taxonomy(), spec.feature_dim, 128, 1)};
  }();
  return s;
}

void BM_Evaluate(benchmark::State& state) {
  const auto& s = eval_setup();
  for (auto _ : state) benchmark::DoNotOptimize(evaluate(s.model, taxonomy(), s.data, Strategy::JO));
}

void BM_EvaluateSerial(benchmark::State& state) {
  const auto& s = eval_setup();
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_serial(s.model, taxonomy(), s.data, Strategy::JO));
}

}  // namespace

BENCHMARK(BM_RasterizeScanline)->Arg(16)->Arg(256);
BENCHMARK(BM_RasterizeSerial)->Arg(16)->Arg(256);
BENCHMARK(BM_PredictObjects)->Arg(2000);
BENCHMARK(BM_PredictObjectsSerial)->Arg(2000);
BENCHMARK(BM_Evaluate)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EvaluateSerial)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
