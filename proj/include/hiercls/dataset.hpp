#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hiercls/numerics.hpp"
#include "hiercls/taxonomy.hpp"

namespace hiercls {

// One input patch. Samples sharing an object id are tiles of the same object.
struct Sample {
  std::string object_id;
  int leaf = 0;       // labelled finest-level class
  LabelTuple labels;  // lift_to_tuple(leaf)
  Vector features;
  int source_leaf = -1;  // generating cluster for synthetic data, -1 if unknown
};

struct Dataset {
  std::size_t feature_dim = 0;
  std::uint64_t taxonomy_digest = 0;
  std::vector<Sample> samples;
};

// Groups of sample indices, one per object, in order of first appearance.
std::vector<std::vector<std::size_t>> group_by_object(const Dataset& d);

// Dataset file:
//   # hiercls-dataset<TAB>count<TAB>feature_dim<TAB>taxonomy digest (hex)
//   id<TAB>leaf name<TAB>f_1<TAB>...<TAB>f_D
// Values are written with 17 significant digits (exact round trip).
std::string serialize_dataset(const Dataset& d, const Taxonomy& t);
Dataset parse_dataset(const std::string& text, const Taxonomy& t);
Dataset load_dataset(const std::string& path, const Taxonomy& t);

// Concatenate two datasets over the same taxonomy and feature width. Object
// ids of the second set that collide with the first get a trailing prime.
Dataset merge_datasets(const Dataset& a, const Dataset& b);

// Seeded k-fold split of [0, n): returns (train, test) for the given fold.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> kfold_split(std::size_t n, std::size_t k,
                                                                          std::size_t fold, std::uint64_t seed);

std::string hex_digest(std::uint64_t d);

}  // namespace hiercls
