#include <gtest/gtest.h>

#include "hiercls/errors.hpp"
#include "hiercls/metrics.hpp"
#include "test_util.hpp"

using namespace hiercls;

namespace {

ConfusionMatrix from_rows(std::vector<std::vector<int>> rows) {
  ConfusionMatrix cm(0, rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows.size(); ++c)
      for (int k = 0; k < rows[r][c]; ++k) cm.accumulate(static_cast<int>(r), static_cast<int>(c));
  return cm;
}

}  // namespace

TEST(Metrics, Accumulate) {
  ConfusionMatrix cm(0, 2);
  cm.accumulate(0, 0);
  EXPECT_EQ(cm.count(0, 0), 1u);
  EXPECT_EQ(cm.total(), 1u);
  EXPECT_THROW(cm.accumulate(2, 0), std::out_of_range);
}

TEST(Metrics, OverallAccuracy) {
  EXPECT_EQ(overall_accuracy(from_rows({{5, 0}, {0, 5}})), 1.0);
  EXPECT_EQ(overall_accuracy(from_rows({{3, 1}, {1, 3}})), 0.75);
  try {
    overall_accuracy(ConfusionMatrix(0, 3));
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_STREQ(e.what(), "no samples");
  }
}

TEST(Metrics, F1) {
  const auto perfect = f1_scores(from_rows({{2, 0}, {0, 3}}));
  for (const auto& s : perfect) EXPECT_EQ(s.f1, 1.0);
  const auto s = f1_scores(from_rows({{2, 2}, {0, 4}}));
  EXPECT_EQ(s[0].precision, 1.0);
  EXPECT_EQ(s[0].recall, 0.5);
  EXPECT_DOUBLE_EQ(s[0].f1, 2.0 / 3.0);
}

TEST(Metrics, MeanF1AbsentClassExcluded) {
  const auto cm = from_rows({{2, 2, 0}, {0, 4, 0}, {0, 0, 0}});
  const auto s = f1_scores(cm);
  EXPECT_FALSE(s[2].present);
  EXPECT_DOUBLE_EQ(mean_f1(cm), 0.5 * (s[0].f1 + s[1].f1));
  EXPECT_EQ(mean_f1(from_rows({{0, 0}, {0, 3}})), 1.0);
  EXPECT_EQ(mean_f1(from_rows({{4, 0}, {0, 4}})), 1.0);
}

TEST(Metrics, MeanOfTwo) {
  // Class 0: P = 4/5, R = 4/5 -> 0.8. Class 1: P = 3/5, R = 3/5 -> 0.6.
  const auto cm = from_rows({{4, 0, 1}, {0, 3, 2}, {1, 2, 0}});
  const auto s = f1_scores(cm);
  EXPECT_DOUBLE_EQ(s[0].f1, 0.8);
  EXPECT_NEAR(s[1].f1, 0.6, 1e-15);
  EXPECT_TRUE(s[2].present);
  EXPECT_EQ(s[2].f1, 0.0);
}

TEST(Metrics, ConsistencyRate) {
  std::vector<PredictionTuple> preds(4);
  for (auto& p : preds) p.consistent = true;
  EXPECT_EQ(consistency_rate(preds), 0.0);
  preds[2].consistent = false;
  EXPECT_EQ(consistency_rate(preds), 0.25);
  try {
    consistency_rate({});
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_STREQ(e.what(), "no samples");
  }
}

TEST(Metrics, MergeEqualsJointStream) {
  ConfusionMatrix a(1, 3), b(1, 3), ab(1, 3);
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    const int r = static_cast<int>(uniform_index(rng, 3)), p = static_cast<int>(uniform_index(rng, 3));
    (i % 2 ? a : b).accumulate(r, p);
    ab.accumulate(r, p);
  }
  a.merge(b);
  EXPECT_EQ(a, ab);
  EXPECT_THROW(a.merge(ConfusionMatrix(1, 4)), std::exception);
}

TEST(Metrics, ReportFormat) {
  const Taxonomy t({{{"a", "", -1}, {"b", "", -1}}, {{"a1", "", 0}, {"b1", "", 1}, {"b2", "", 1}}});
  std::vector<LabelTuple> ref{{0, 0}, {1, 1}, {1, 2}, {1, 1}};
  std::vector<PredictionTuple> pred(4);
  pred[0].labels = {0, 0};
  pred[1].labels = {1, 1};
  pred[2].labels = {1, 1};
  pred[3].labels = {1, 1};
  for (auto& p : pred) p.consistent = true;
  const auto cms = confusion_matrices(t, ref, pred);
  ASSERT_EQ(cms.size(), 2u);
  const auto report = format_metrics_report(t, cms, {"jo", 4, 0.0});
  const std::string expected =
      "# strategy\tjo\n"
      "# objects\t4\n"
      "# inconsistent_rate\t0.000000\n"
      "level\tOA\tmF1\n"
      "1\t1.000000\t1.000000\n"
      "2\t0.750000\t0.600000\n"
      "\n"
      "level\tclass\tprecision\trecall\tF1\n"
      "1\ta\t1.000000\t1.000000\t1.000000\n"
      "1\tb\t1.000000\t1.000000\t1.000000\n"
      "2\ta1\t1.000000\t1.000000\t1.000000\n"
      "2\tb1\t0.666667\t1.000000\t0.800000\n"
      "2\tb2\t0.000000\t0.000000\t0.000000\n";
  EXPECT_EQ(report, expected);
}
