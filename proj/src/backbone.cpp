#include "hiercls/backbone.hpp"

#include <cmath>
#include <stdexcept>

#include "hiercls/random.hpp"

namespace hiercls {

std::vector<Matrix*> Backbone::tensors() {
  std::vector<Matrix*> out{&hidden_weight, &hidden_bias};
  for (std::size_t l = 0; l < level_weight.size(); ++l) {
    out.push_back(&level_weight[l]);
    out.push_back(&level_bias[l]);
  }
  return out;
}

std::vector<const Matrix*> Backbone::tensors() const {
  auto mut = const_cast<Backbone*>(this)->tensors();
  return {mut.begin(), mut.end()};
}

std::vector<std::string> Backbone::tensor_names() const {
  std::vector<std::string> out{"backbone.hidden.weight", "backbone.hidden.bias"};
  for (std::size_t l = 0; l < level_weight.size(); ++l) {
    out.push_back("backbone.level." + std::to_string(l + 1) + ".weight");
    out.push_back("backbone.level." + std::to_string(l + 1) + ".bias");
  }
  return out;
}

Backbone make_backbone(std::size_t feature_dim, std::size_t hidden, const std::vector<std::size_t>& sizes) {
  if (feature_dim == 0 || hidden == 0) throw std::invalid_argument("backbone dimensions must be positive");
  Backbone b;
  b.hidden_weight = Matrix(hidden, feature_dim);
  b.hidden_bias = Matrix(hidden, 1);
  for (auto m : sizes) {
    b.level_weight.emplace_back(m, hidden);
    b.level_bias.emplace_back(m, 1);
  }
  return b;
}

Backbone init_backbone(std::size_t feature_dim, std::size_t hidden, const std::vector<std::size_t>& sizes,
                       std::uint64_t seed) {
  Backbone b = make_backbone(feature_dim, hidden, sizes);
  Rng rng(seed);
  auto fill = [&rng](Matrix& m) {
    const double a = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
    for (double& x : m.data()) x = uniform(rng, -a, a);
  };
  fill(b.hidden_weight);
  for (auto& w : b.level_weight) fill(w);
  return b;
}

BackboneForward backbone_forward(const Backbone& b, std::span<const double> x) {
  if (x.size() != b.feature_dim())
    throw std::invalid_argument("backbone_forward: expected " + std::to_string(b.feature_dim()) + " features, got " +
                                std::to_string(x.size()));
  BackboneForward f;
  f.input.assign(x.begin(), x.end());
  f.pre_activation.assign(b.hidden_bias.data().begin(), b.hidden_bias.data().end());
  matvec_add(b.hidden_weight, x, f.pre_activation);
  f.hidden = relu(f.pre_activation);
  f.z.resize(b.level_weight.size());
  for (std::size_t l = 0; l < b.level_weight.size(); ++l) {
    f.z[l].assign(b.level_bias[l].data().begin(), b.level_bias[l].data().end());
    matvec_add(b.level_weight[l], f.hidden, f.z[l]);
  }
  return f;
}

Vector backbone_backward_accumulate(const Backbone& b, const BackboneForward& fwd, const LevelScores& d_z,
                                    Backbone& acc) {
  if (d_z.size() != b.level_weight.size()) throw std::invalid_argument("backbone_backward: level count mismatch");
  Vector d_hidden(b.hidden_width(), 0.0);
  for (std::size_t l = 0; l < d_z.size(); ++l) {
    add_outer(acc.level_weight[l], d_z[l], fwd.hidden);
    auto bias = acc.level_bias[l].data();
    for (std::size_t k = 0; k < d_z[l].size(); ++k) bias[k] += d_z[l][k];
    matvec_transposed_add(b.level_weight[l], d_z[l], d_hidden);
  }
  const Vector d_pre = relu_backward(fwd.pre_activation, d_hidden);
  add_outer(acc.hidden_weight, d_pre, fwd.input);
  auto hb = acc.hidden_bias.data();
  for (std::size_t k = 0; k < d_pre.size(); ++k) hb[k] += d_pre[k];
  Vector d_x(b.feature_dim(), 0.0);
  matvec_transposed_add(b.hidden_weight, d_pre, d_x);
  return d_x;
}

std::vector<Matrix*> Model::tensors() {
  auto out = backbone.tensors();
  for (Matrix* m : head.tensors()) out.push_back(m);
  return out;
}

std::vector<const Matrix*> Model::tensors() const {
  auto mut = const_cast<Model*>(this)->tensors();
  return {mut.begin(), mut.end()};
}

std::vector<std::string> Model::tensor_names() const {
  auto out = backbone.tensor_names();
  for (auto& n : head.tensor_names()) out.push_back(std::move(n));
  return out;
}

Model init_model(const Taxonomy& t, std::size_t feature_dim, std::size_t hidden, std::uint64_t seed) {
  Model m;
  m.taxonomy_digest = t.digest();
  m.backbone = init_backbone(feature_dim, hidden, level_sizes(t), seed);
  m.head = init_head_params(t, seed ^ 0x9e3779b97f4a7c15ULL);
  return m;
}

Model zeros_like(const Model& m) {
  Model z;
  z.taxonomy_digest = m.taxonomy_digest;
  std::vector<std::size_t> sizes;
  for (const auto& w : m.backbone.level_weight) sizes.push_back(w.rows());
  z.backbone = make_backbone(m.backbone.feature_dim(), m.backbone.hidden_width(), sizes);
  z.head = HeadParams(m.head.sizes());
  return z;
}

ModelForward model_forward(const Model& m, std::span<const double> x) {
  ModelForward f;
  f.backbone = backbone_forward(m.backbone, x);
  f.head = head_forward(m.head, f.backbone.z);
  return f;
}

void model_backward_accumulate(const Model& m, const ModelForward& fwd, const LevelScores& d_out, Model& acc) {
  const LevelScores d_z = head_backward_accumulate(m.head, fwd.head, d_out, acc.head);
  backbone_backward_accumulate(m.backbone, fwd.backbone, d_z, acc.backbone);
}

}  // namespace hiercls
