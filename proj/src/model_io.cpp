#include "hiercls/model_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "hiercls/dataset.hpp"
#include "hiercls/errors.hpp"

namespace hiercls {

namespace {

constexpr const char* kMagic = "hiercls-checkpoint";

void expect_key(std::istream& in, const char* key, std::size_t line) {
  std::string k;
  if (!(in >> k) || k != key) throw ParseError(line, std::string("expected '") + key + "'");
}

}  // namespace

std::string serialize_model(const Model& m) {
  std::string out = std::string(kMagic) + " 1\n";
  out += "taxonomy_digest " + hex_digest(m.taxonomy_digest) + "\n";
  out += "levels " + std::to_string(m.head.level_count());
  for (auto s : m.head.sizes()) out += " " + std::to_string(s);
  out += "\nfeature_dim " + std::to_string(m.backbone.feature_dim()) + "\n";
  out += "hidden " + std::to_string(m.backbone.hidden_width()) + "\n";
  const auto tensors = m.tensors();
  const auto names = m.tensor_names();
  out += "tensors " + std::to_string(tensors.size()) + "\n";
  for (std::size_t k = 0; k < tensors.size(); ++k)
    out += names[k] + " " + std::to_string(tensors[k]->rows()) + " " + std::to_string(tensors[k]->cols()) + "\n";
  char buf[40];
  for (const Matrix* t : tensors) {
    bool first = true;
    for (double v : t->data()) {
      std::snprintf(buf, sizeof buf, "%s%a", first ? "" : " ", v);
      out += buf;
      first = false;
    }
    out += "\n";
  }
  return out;
}

Model parse_model(const std::string& text) {
  std::istringstream in(text);
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != kMagic || version != 1) throw ParseError(1, "not a hiercls checkpoint");
  expect_key(in, "taxonomy_digest", 2);
  std::string digest;
  in >> digest;
  expect_key(in, "levels", 3);
  std::size_t b = 0;
  if (!(in >> b) || b == 0) throw ParseError(3, "invalid level count");
  std::vector<std::size_t> sizes(b);
  for (auto& s : sizes)
    if (!(in >> s) || s == 0) throw ParseError(3, "invalid level size");
  std::size_t feature_dim = 0, hidden = 0, count = 0;
  expect_key(in, "feature_dim", 4);
  in >> feature_dim;
  expect_key(in, "hidden", 5);
  in >> hidden;
  expect_key(in, "tensors", 6);
  in >> count;
  if (!in) throw ParseError(6, "malformed checkpoint header");

  Model m;
  m.taxonomy_digest = std::strtoull(digest.c_str(), nullptr, 16);
  m.backbone = make_backbone(feature_dim, hidden, sizes);
  m.head = HeadParams(sizes);
  const auto tensors = m.tensors();
  const auto names = m.tensor_names();
  if (count != tensors.size())
    throw ValidationError("checkpoint has " + std::to_string(count) + " tensors, expected " +
                          std::to_string(tensors.size()));
  for (std::size_t k = 0; k < count; ++k) {
    std::string name;
    std::size_t rows = 0, cols = 0;
    if (!(in >> name >> rows >> cols)) throw ParseError(7 + k, "malformed manifest entry");
    if (name != names[k] || rows != tensors[k]->rows() || cols != tensors[k]->cols())
      throw ValidationError("checkpoint manifest entry '" + name + "' does not match the expected layout ('" +
                            names[k] + "')");
  }
  for (std::size_t k = 0; k < count; ++k) {
    for (double& v : tensors[k]->data()) {
      std::string tok;
      if (!(in >> tok)) throw ValidationError("checkpoint truncated in tensor '" + names[k] + "'");
      char* end = nullptr;
      v = std::strtod(tok.c_str(), &end);
      if (end != tok.c_str() + tok.size()) throw ValidationError("invalid value '" + tok + "' in checkpoint");
    }
  }
  std::string extra;
  if (in >> extra) throw ValidationError("trailing data in checkpoint");
  return m;
}

void save_model(const Model& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write checkpoint '" + path + "'");
  out << serialize_model(m);
}

Model load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open checkpoint '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

}  // namespace hiercls
