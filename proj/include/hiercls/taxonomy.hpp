#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hiercls {

// One class index per semantic level, coarsest level first.
using LabelTuple = std::vector<int>;

struct ClassInfo {
  std::string name;
  std::string abbreviation;  // may be empty
  int parent = -1;           // index at the previous level, -1 on level 0
};

// Strict forest of depth B. Levels are 0-based in code (level 0 = coarsest);
// file formats and reports number them from 1.
class Taxonomy {
 public:
  // Validates and builds; throws ValidationError naming the offending class.
  explicit Taxonomy(std::vector<std::vector<ClassInfo>> levels);

  std::size_t level_count() const noexcept { return levels_.size(); }
  std::size_t class_count(std::size_t level) const { return levels_.at(level).size(); }
  std::size_t leaf_count() const noexcept { return levels_.back().size(); }
  const ClassInfo& info(std::size_t level, int index) const;
  const std::string& name(std::size_t level, int index) const { return info(level, index).name; }
  int parent(std::size_t level, int index) const { return info(level, index).parent; }
  const std::vector<int>& children(std::size_t level, int index) const;

  // Lookup by full name or abbreviation.
  std::optional<int> find(std::size_t level, std::string_view name) const;

  // Tuples ordered by leaf index; computed once at construction.
  const std::vector<LabelTuple>& tuples() const noexcept { return tuples_; }

  const std::vector<std::vector<ClassInfo>>& levels() const noexcept { return levels_; }

  // 64-bit FNV-1a over the serialized form.
  std::uint64_t digest() const;

  friend bool operator==(const Taxonomy& a, const Taxonomy& b);

 private:
  std::vector<std::vector<ClassInfo>> levels_;
  std::vector<std::vector<std::vector<int>>> children_;
  std::vector<LabelTuple> tuples_;
};

bool operator==(const ClassInfo& a, const ClassInfo& b);

Taxonomy parse_taxonomy(std::string_view text);
Taxonomy load_taxonomy(const std::string& path);
std::string serialize_taxonomy(const Taxonomy& t);

std::vector<LabelTuple> enumerate_tuples(const Taxonomy& t);
// Throws std::invalid_argument on a length or range violation.
bool is_consistent(const Taxonomy& t, const LabelTuple& labels);
LabelTuple lift_to_tuple(const Taxonomy& t, int leaf);

std::string format_tuple(const Taxonomy& t, const LabelTuple& labels);

}  // namespace hiercls
