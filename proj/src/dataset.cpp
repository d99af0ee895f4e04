#include "hiercls/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "hiercls/errors.hpp"
#include "hiercls/random.hpp"

namespace hiercls {

std::string hex_digest(std::uint64_t d) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(d));
  return buf;
}

std::vector<std::vector<std::size_t>> group_by_object(const Dataset& d) {
  std::vector<std::vector<std::size_t>> groups;
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < d.samples.size(); ++i) {
    auto [it, fresh] = index.emplace(d.samples[i].object_id, groups.size());
    if (fresh) groups.emplace_back();
    groups[it->second].push_back(i);
  }
  return groups;
}

std::string serialize_dataset(const Dataset& d, const Taxonomy& t) {
  std::string out = "# hiercls-dataset\t" + std::to_string(d.samples.size()) + "\t" + std::to_string(d.feature_dim) +
                    "\t" + hex_digest(t.digest()) + "\n";
  const std::size_t leaf_level = t.level_count() - 1;
  char buf[32];
  for (const auto& s : d.samples) {
    out += s.object_id;
    out += '\t';
    out += t.name(leaf_level, s.leaf);
    for (double v : s.features) {
      std::snprintf(buf, sizeof buf, "\t%.17g", v);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

Dataset parse_dataset(const std::string& text, const Taxonomy& t) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  Dataset d;
  std::size_t declared = 0;
  bool header = false;
  const std::size_t leaf_level = t.level_count() - 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const auto pos = line.find('\t', start);
      fields.push_back(line.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    if (!header) {
      if (fields.size() != 4 || fields[0] != "# hiercls-dataset")
        throw ParseError(line_no, "missing '# hiercls-dataset' header");
      try {
        declared = std::stoul(fields[1]);
        d.feature_dim = std::stoul(fields[2]);
        d.taxonomy_digest = std::stoull(fields[3], nullptr, 16);
      } catch (const std::exception&) {
        throw ParseError(line_no, "malformed dataset header");
      }
      if (d.taxonomy_digest != t.digest())
        throw ValidationError("dataset was written for a different taxonomy (digest " + fields[3] + ", expected " +
                              hex_digest(t.digest()) + ")");
      header = true;
      continue;
    }
    if (line.front() == '#') continue;
    if (fields.size() != 2 + d.feature_dim)
      throw ParseError(line_no, "expected " + std::to_string(2 + d.feature_dim) + " fields, got " +
                                    std::to_string(fields.size()));
    Sample s;
    s.object_id = fields[0];
    const auto leaf = t.find(leaf_level, fields[1]);
    if (!leaf) throw ParseError(line_no, "unknown finest-level class '" + fields[1] + "'");
    s.leaf = *leaf;
    s.labels = lift_to_tuple(t, s.leaf);
    s.features.reserve(d.feature_dim);
    for (std::size_t k = 2; k < fields.size(); ++k) {
      try {
        std::size_t used = 0;
        s.features.push_back(std::stod(fields[k], &used));
        if (used != fields[k].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw ParseError(line_no, "invalid feature value '" + fields[k] + "'");
      }
    }
    d.samples.push_back(std::move(s));
  }
  if (!header) throw ParseError(line_no, "empty dataset file");
  if (d.samples.size() != declared)
    throw ValidationError("dataset header declares " + std::to_string(declared) + " samples, found " +
                          std::to_string(d.samples.size()));
  return d;
}

Dataset load_dataset(const std::string& path, const Taxonomy& t) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open dataset file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_dataset(ss.str(), t);
}

Dataset merge_datasets(const Dataset& a, const Dataset& b) {
  if (a.feature_dim != b.feature_dim || a.taxonomy_digest != b.taxonomy_digest)
    throw ValidationError("cannot merge datasets with different feature width or taxonomy");
  Dataset out = a;
  // Objects of the second set keep their identity even when ids collide.
  std::unordered_set<std::string> a_ids, taken;
  for (const auto& s : a.samples) a_ids.insert(s.object_id);
  taken = a_ids;
  for (const auto& s : b.samples) taken.insert(s.object_id);
  std::unordered_map<std::string, std::string> renamed;
  for (auto s : b.samples) {
    if (a_ids.count(s.object_id)) {
      auto it = renamed.find(s.object_id);
      if (it == renamed.end()) {
        std::string id = s.object_id;
        while (taken.count(id)) id += "'";
        taken.insert(id);
        it = renamed.emplace(s.object_id, id).first;
      }
      s.object_id = it->second;
    }
    out.samples.push_back(std::move(s));
  }
  return out;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> kfold_split(std::size_t n, std::size_t k,
                                                                          std::size_t fold, std::uint64_t seed) {
  if (k < 2 || fold >= k || n < k) throw std::invalid_argument("kfold_split: need 2 <= k <= n and fold < k");
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  shuffle(order, rng);
  std::pair<std::vector<std::size_t>, std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < n; ++i) (i % k == fold ? out.second : out.first).push_back(order[i]);
  return out;
}

}  // namespace hiercls
