#include "hiercls/taxonomy.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "hiercls/errors.hpp"

namespace hiercls {

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find('\t', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::string_view trim_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

}  // namespace

bool operator==(const ClassInfo& a, const ClassInfo& b) {
  return a.name == b.name && a.abbreviation == b.abbreviation && a.parent == b.parent;
}

bool operator==(const Taxonomy& a, const Taxonomy& b) { return a.levels_ == b.levels_; }

Taxonomy::Taxonomy(std::vector<std::vector<ClassInfo>> levels) : levels_(std::move(levels)) {
  if (levels_.empty()) throw ValidationError("taxonomy has no levels");
  children_.resize(levels_.size());
  for (std::size_t l = 0; l < levels_.size(); ++l) {
    const auto& classes = levels_[l];
    if (classes.empty()) throw ValidationError("level " + std::to_string(l + 1) + " has no classes");
    std::unordered_set<std::string> names;
    for (const auto& c : classes) {
      if (c.name.empty()) throw ValidationError("empty class name at level " + std::to_string(l + 1));
      if (!names.insert(c.name).second)
        throw ValidationError("duplicate class name '" + c.name + "' at level " + std::to_string(l + 1));
    }
    std::unordered_set<std::string> abbrevs;
    for (const auto& c : classes) {
      if (c.abbreviation.empty() || c.abbreviation == c.name) continue;
      if (names.count(c.abbreviation) || !abbrevs.insert(c.abbreviation).second)
        throw ValidationError("ambiguous abbreviation '" + c.abbreviation + "' of class '" + c.name +
                              "' at level " + std::to_string(l + 1));
    }
    children_[l].resize(classes.size());
    for (std::size_t c = 0; c < classes.size(); ++c) {
      const int p = classes[c].parent;
      if (l == 0) {
        if (p != -1) throw ValidationError("level-1 class '" + classes[c].name + "' has a parent");
        continue;
      }
      if (p < 0 || static_cast<std::size_t>(p) >= levels_[l - 1].size())
        throw ValidationError("class '" + classes[c].name + "' at level " + std::to_string(l + 1) +
                              " has no valid parent");
      children_[l - 1][static_cast<std::size_t>(p)].push_back(static_cast<int>(c));
    }
  }
  for (std::size_t l = 0; l + 1 < levels_.size(); ++l) {
    for (std::size_t c = 0; c < levels_[l].size(); ++c) {
      if (children_[l][c].empty())
        throw ValidationError("non-leaf class '" + levels_[l][c].name + "' at level " + std::to_string(l + 1) +
                              " has no children");
    }
  }
  const std::size_t b = levels_.size();
  tuples_.reserve(leaf_count());
  for (std::size_t leaf = 0; leaf < leaf_count(); ++leaf) {
    LabelTuple t(b);
    int idx = static_cast<int>(leaf);
    for (std::size_t l = b; l-- > 0;) {
      t[l] = idx;
      idx = levels_[l][static_cast<std::size_t>(idx)].parent;
    }
    tuples_.push_back(std::move(t));
  }
}

const ClassInfo& Taxonomy::info(std::size_t level, int index) const {
  const auto& classes = levels_.at(level);
  if (index < 0 || static_cast<std::size_t>(index) >= classes.size())
    throw std::out_of_range("class index " + std::to_string(index) + " out of range at level " +
                            std::to_string(level + 1));
  return classes[static_cast<std::size_t>(index)];
}

const std::vector<int>& Taxonomy::children(std::size_t level, int index) const {
  info(level, index);
  return children_[level][static_cast<std::size_t>(index)];
}

std::optional<int> Taxonomy::find(std::size_t level, std::string_view name) const {
  const auto& classes = levels_.at(level);
  for (std::size_t c = 0; c < classes.size(); ++c)
    if (classes[c].name == name) return static_cast<int>(c);
  for (std::size_t c = 0; c < classes.size(); ++c)
    if (!classes[c].abbreviation.empty() && classes[c].abbreviation == name) return static_cast<int>(c);
  return std::nullopt;
}

std::uint64_t Taxonomy::digest() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : serialize_taxonomy(*this)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Taxonomy parse_taxonomy(std::string_view text) {
  std::vector<std::vector<ClassInfo>> levels;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const auto line = trim_cr(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;

    const auto fields = split_tabs(line);
    if (fields.size() < 3 || fields.size() > 4)
      throw ParseError(line_no, "expected level<TAB>name<TAB>parent[<TAB>abbreviation]");
    std::size_t level = 0;
    try {
      std::size_t used = 0;
      level = std::stoul(std::string(fields[0]), &used);
      if (used != fields[0].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ParseError(line_no, "invalid level '" + std::string(fields[0]) + "'");
    }
    if (level == 0) throw ParseError(line_no, "levels are numbered from 1");
    if (level < levels.size()) throw ParseError(line_no, "levels must appear in nondecreasing order");
    if (level > levels.size() + 1) throw ParseError(line_no, "level " + std::to_string(level) + " skips a level");
    if (level == levels.size() + 1) levels.emplace_back();

    ClassInfo info;
    info.name = std::string(fields[1]);
    if (info.name.empty()) throw ParseError(line_no, "empty class name");
    if (fields.size() == 4) info.abbreviation = std::string(fields[3]);
    const std::string_view parent_name = fields[2];
    if (level == 1) {
      if (parent_name != "-") throw ParseError(line_no, "level-1 class '" + info.name + "' must use '-' as parent");
    } else {
      const auto& coarser = levels[level - 2];
      int found = -1;
      for (std::size_t c = 0; c < coarser.size(); ++c)
        if (coarser[c].name == parent_name) found = static_cast<int>(c);
      if (found < 0)
        throw ValidationError("line " + std::to_string(line_no) + ": class '" + info.name + "' names unknown parent '" +
                              std::string(parent_name) + "'");
      info.parent = found;
    }
    levels[level - 1].push_back(std::move(info));
  }
  return Taxonomy(std::move(levels));
}

Taxonomy load_taxonomy(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open taxonomy file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_taxonomy(ss.str());
}

std::string serialize_taxonomy(const Taxonomy& t) {
  std::string out;
  for (std::size_t l = 0; l < t.level_count(); ++l) {
    for (const auto& c : t.levels()[l]) {
      out += std::to_string(l + 1);
      out += '\t';
      out += c.name;
      out += '\t';
      out += l == 0 ? std::string("-") : t.levels()[l - 1][static_cast<std::size_t>(c.parent)].name;
      if (!c.abbreviation.empty()) {
        out += '\t';
        out += c.abbreviation;
      }
      out += '\n';
    }
  }
  return out;
}

std::vector<LabelTuple> enumerate_tuples(const Taxonomy& t) { return t.tuples(); }

bool is_consistent(const Taxonomy& t, const LabelTuple& labels) {
  if (labels.size() != t.level_count())
    throw std::invalid_argument("label tuple has " + std::to_string(labels.size()) + " entries, taxonomy has " +
                                std::to_string(t.level_count()) + " levels");
  for (std::size_t l = 0; l < labels.size(); ++l)
    if (labels[l] < 0 || static_cast<std::size_t>(labels[l]) >= t.class_count(l))
      throw std::invalid_argument("label index out of range at level " + std::to_string(l + 1));
  for (std::size_t l = 1; l < labels.size(); ++l)
    if (t.parent(l, labels[l]) != labels[l - 1]) return false;
  return true;
}

LabelTuple lift_to_tuple(const Taxonomy& t, int leaf) {
  if (leaf < 0 || static_cast<std::size_t>(leaf) >= t.leaf_count())
    throw std::out_of_range("leaf index " + std::to_string(leaf) + " out of range");
  return t.tuples()[static_cast<std::size_t>(leaf)];
}

std::string format_tuple(const Taxonomy& t, const LabelTuple& labels) {
  std::string out = "(";
  for (std::size_t l = 0; l < labels.size(); ++l) {
    if (l) out += ", ";
    out += t.name(l, labels[l]);
  }
  return out + ")";
}

}  // namespace hiercls
