#pragma once

#include <string>

#include "hiercls/backbone.hpp"

namespace hiercls {

// Text checkpoint, exact round trip (values in C99 hex-float notation):
//
//   hiercls-checkpoint 1
//   taxonomy_digest <16 hex digits>
//   levels <B> <M_1> ... <M_B>
//   feature_dim <D>
//   hidden <H>
//   tensors <K>
//   <name> <rows> <cols>            (K manifest lines)
//   <row-major values>              (rows * cols values per tensor, one tensor
//                                    per line, in manifest order)
std::string serialize_model(const Model& m);
Model parse_model(const std::string& text);
void save_model(const Model& m, const std::string& path);
Model load_model(const std::string& path);

}  // namespace hiercls
