#include <gtest/gtest.h>

#include <set>
#include <stdexcept>

#include "hiercls/errors.hpp"
#include "hiercls/taxonomy.hpp"
#include "test_util.hpp"

using namespace hiercls;

namespace {

Taxonomy table1() { return load_taxonomy(HIERCLS_FIXTURE_DIR "/table1.tax"); }

LabelTuple named(const Taxonomy& t, std::initializer_list<const char*> names) {
  LabelTuple out;
  std::size_t l = 0;
  for (const char* n : names) {
    auto idx = t.find(l++, n);
    if (!idx) throw std::runtime_error(std::string("unknown class ") + n);
    out.push_back(*idx);
  }
  return out;
}

}  // namespace

TEST(Taxonomy, FixtureCounts) {
  const auto t = table1();
  ASSERT_EQ(t.level_count(), 3u);
  EXPECT_EQ(t.class_count(0), 4u);
  EXPECT_EQ(t.class_count(1), 14u);
  EXPECT_EQ(t.class_count(2), 21u);
  EXPECT_EQ(enumerate_tuples(t).size(), 21u);
}

TEST(Taxonomy, OneLevel) {
  const auto t = parse_taxonomy("1\tx\t-\n1\ty\t-\n1\tz\t-\n");
  EXPECT_EQ(t.level_count(), 1u);
  EXPECT_EQ(t.class_count(0), 3u);
  const auto tuples = enumerate_tuples(t);
  ASSERT_EQ(tuples.size(), 3u);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(tuples[i], LabelTuple{i});
  EXPECT_EQ(lift_to_tuple(t, 2), LabelTuple{2});
}

TEST(Taxonomy, UnknownParentRejected) {
  EXPECT_THROW(parse_taxonomy("1\tx\t-\n2\ty\tnope\n"), ValidationError);
}

TEST(Taxonomy, MalformedLinesReportLine) {
  try {
    parse_taxonomy("1\tx\t-\n# c\nfoo\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(parse_taxonomy("1\tx\t-\n3\ty\tx\n"), std::exception);
  EXPECT_THROW(parse_taxonomy("1\tx\t-\n2\ty\tx\n2\tz\tx\n2\tz\tx\n3\tq\ty\n"), std::exception);
  // A class above the finest level without children has no consistent tuple.
  EXPECT_THROW(parse_taxonomy("1\tx\t-\n1\ty\t-\n2\tz\tx\n"), ValidationError);
  EXPECT_THROW(parse_taxonomy(""), std::exception);
}

TEST(Taxonomy, TwoRootsFourTuples) {
  const auto t = parse_taxonomy(
      "1\tr1\t-\n1\tr2\t-\n2\tc1\tr1\n2\tc2\tr2\n3\tl1\tc1\n3\tl2\tc1\n3\tl3\tc2\n3\tl4\tc2\n");
  const auto tuples = enumerate_tuples(t);
  ASSERT_EQ(tuples.size(), 4u);
  EXPECT_EQ(tuples[0], (LabelTuple{0, 0, 0}));
  EXPECT_EQ(tuples[1], (LabelTuple{0, 0, 1}));
  EXPECT_EQ(tuples[2], (LabelTuple{1, 1, 2}));
  EXPECT_EQ(tuples[3], (LabelTuple{1, 1, 3}));
}

TEST(Taxonomy, FixtureTuples) {
  const auto t = table1();
  const auto leaf = t.find(2, "res.use");
  ASSERT_TRUE(leaf);
  EXPECT_EQ(enumerate_tuples(t)[*leaf], named(t, {"settlement", "residential", "residential in use"}));
  EXPECT_EQ(lift_to_tuple(t, *t.find(2, "motor road")), named(t, {"traffic", "road traffic", "motor road"}));
  EXPECT_EQ(format_tuple(t, lift_to_tuple(t, *t.find(2, "motor road"))), "(traffic, road traffic, motor road)");
}

TEST(Taxonomy, Consistency) {
  const auto t = table1();
  EXPECT_TRUE(is_consistent(t, named(t, {"settlement", "residential", "res.use"})));
  EXPECT_FALSE(is_consistent(t, named(t, {"settlement", "road traffic", "motor road"})));
  for (const auto& tuple : enumerate_tuples(t)) EXPECT_TRUE(is_consistent(t, tuple));
  EXPECT_THROW(is_consistent(t, LabelTuple{0, 0}), std::invalid_argument);
  EXPECT_THROW(is_consistent(t, LabelTuple{0, 0, 21}), std::invalid_argument);
  EXPECT_THROW(is_consistent(t, LabelTuple{-1, 0, 0}), std::invalid_argument);
}

TEST(Taxonomy, LiftOutOfRange) {
  const auto t = table1();
  EXPECT_THROW(lift_to_tuple(t, 21), std::out_of_range);
  EXPECT_THROW(lift_to_tuple(t, -1), std::out_of_range);
}

TEST(Taxonomy, RoundTrip) {
  const auto t = table1();
  const auto text = serialize_taxonomy(t);
  const auto back = parse_taxonomy(text);
  EXPECT_TRUE(back == t);
  EXPECT_EQ(serialize_taxonomy(back), text);
  EXPECT_EQ(back.digest(), t.digest());
}

TEST(Taxonomy, DuplicateNamesAcrossLevelsAreDistinct) {
  const auto t = table1();
  const auto mix2 = t.find(1, "mixed usage");
  const auto mix3 = t.find(2, "mixed usage");
  ASSERT_TRUE(mix2 && mix3);
  EXPECT_EQ(t.parent(2, *mix3), *mix2);
}

TEST(Taxonomy, RandomForestsProperties) {
  Rng rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const auto levels = 1 + uniform_index(rng, 4);
    const auto t = testutil::random_taxonomy(rng, levels, 8);
    const auto tuples = enumerate_tuples(t);
    ASSERT_EQ(tuples.size(), t.leaf_count());
    std::set<LabelTuple> unique(tuples.begin(), tuples.end());
    EXPECT_EQ(unique.size(), tuples.size());
    for (std::size_t leaf = 0; leaf < t.leaf_count(); ++leaf) {
      const auto lifted = lift_to_tuple(t, static_cast<int>(leaf));
      EXPECT_TRUE(is_consistent(t, lifted));
      EXPECT_EQ(lifted, tuples[leaf]);
    }
    EXPECT_TRUE(parse_taxonomy(serialize_taxonomy(t)) == t);
  }
}
