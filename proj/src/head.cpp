#include "hiercls/head.hpp"

#include <cmath>
#include <stdexcept>

#include "hiercls/random.hpp"

namespace hiercls {

std::vector<std::size_t> level_sizes(const Taxonomy& t) {
  std::vector<std::size_t> s(t.level_count());
  for (std::size_t l = 0; l < s.size(); ++l) s[l] = t.class_count(l);
  return s;
}

void check_level_shapes(const LevelScores& s, const std::vector<std::size_t>& sizes, const char* what) {
  if (s.size() != sizes.size())
    throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(sizes.size()) + " levels, got " +
                                std::to_string(s.size()));
  for (std::size_t l = 0; l < sizes.size(); ++l)
    if (s[l].size() != sizes[l])
      throw std::invalid_argument(std::string(what) + ": level " + std::to_string(l + 1) + " has length " +
                                  std::to_string(s[l].size()) + ", expected " + std::to_string(sizes[l]));
}

HeadParams::HeadParams(std::vector<std::size_t> sizes) : sizes_(std::move(sizes)) {
  const std::size_t b = sizes_.size();
  for (std::size_t l = 1; l < b; ++l) {
    w_self_.emplace_back(sizes_[l], sizes_[l]);
    auto& cross = w_cross_.emplace_back();
    for (std::size_t i = 0; i < l; ++i) cross.emplace_back(sizes_[l], sizes_[i]);
  }
  for (std::size_t l = 0; l + 1 < b; ++l) {
    v_self_.emplace_back(sizes_[l], sizes_[l]);
    auto& cross = v_cross_.emplace_back();
    for (std::size_t j = l + 1; j < b; ++j) cross.emplace_back(sizes_[l], sizes_[j]);
  }
}

std::size_t HeadParams::w_cross_count() const noexcept {
  std::size_t n = 0;
  for (const auto& c : w_cross_) n += c.size();
  return n;
}

std::size_t HeadParams::v_cross_count() const noexcept {
  std::size_t n = 0;
  for (const auto& c : v_cross_) n += c.size();
  return n;
}

std::vector<Matrix*> HeadParams::tensors() {
  std::vector<Matrix*> out;
  for (std::size_t k = 0; k < w_self_.size(); ++k) {
    out.push_back(&w_self_[k]);
    for (auto& m : w_cross_[k]) out.push_back(&m);
  }
  for (std::size_t k = 0; k < v_self_.size(); ++k) {
    out.push_back(&v_self_[k]);
    for (auto& m : v_cross_[k]) out.push_back(&m);
  }
  return out;
}

std::vector<const Matrix*> HeadParams::tensors() const {
  auto mut = const_cast<HeadParams*>(this)->tensors();
  return {mut.begin(), mut.end()};
}

std::vector<std::string> HeadParams::tensor_names() const {
  // Level numbers in names are 1-based.
  std::vector<std::string> out;
  const std::size_t b = sizes_.size();
  for (std::size_t l = 1; l < b; ++l) {
    out.push_back("head.W." + std::to_string(l + 1));
    for (std::size_t i = 0; i < l; ++i) out.push_back("head.W." + std::to_string(l + 1) + "." + std::to_string(i + 1));
  }
  for (std::size_t l = 0; l + 1 < b; ++l) {
    out.push_back("head.V." + std::to_string(l + 1));
    for (std::size_t j = l + 1; j < b; ++j)
      out.push_back("head.V." + std::to_string(l + 1) + "." + std::to_string(j + 1));
  }
  return out;
}

void HeadParams::set_zero() {
  for (Matrix* m : tensors()) m->set_zero();
}

HeadParams init_head_params(const Taxonomy& t, std::uint64_t seed) {
  HeadParams p(level_sizes(t));
  Rng rng(seed);
  for (Matrix* m : p.tensors()) {
    const double a = std::sqrt(6.0 / static_cast<double>(m->rows() + m->cols()));
    for (double& x : m->data()) x = uniform(rng, -a, a);
  }
  return p;
}

HeadForward head_forward(const HeadParams& p, const LevelScores& z) {
  check_level_shapes(z, p.sizes(), "head_forward input");
  const std::size_t b = p.level_count();
  HeadForward f;
  f.input = z;
  f.relu_input.resize(b);
  for (std::size_t l = 0; l < b; ++l) f.relu_input[l] = relu(z[l]);

  f.mid.resize(b);
  f.mid[0] = z[0];
  for (std::size_t l = 1; l < b; ++l) {
    f.mid[l] = matvec(p.w_self(l), f.relu_input[l]);
    for (std::size_t i = 0; i < l; ++i) matvec_add(p.w_cross(l, i), f.relu_input[i], f.mid[l]);
  }

  f.relu_mid.resize(b);
  for (std::size_t l = 0; l < b; ++l) f.relu_mid[l] = relu(f.mid[l]);

  f.out.resize(b);
  f.out[b - 1] = f.mid[b - 1];
  for (std::size_t l = 0; l + 1 < b; ++l) {
    f.out[l] = matvec(p.v_self(l), f.relu_mid[l]);
    for (std::size_t j = l + 1; j < b; ++j) matvec_add(p.v_cross(l, j), f.relu_mid[j], f.out[l]);
  }

  f.probs.resize(b);
  for (std::size_t l = 0; l < b; ++l) f.probs[l] = softmax(f.out[l]);
  return f;
}

LevelScores head_backward_accumulate(const HeadParams& p, const HeadForward& fwd, const LevelScores& d_out,
                                     HeadParams& acc) {
  const std::size_t b = p.level_count();
  if (fwd.input.size() != b) throw std::invalid_argument("head_backward: forward cache does not match parameters");
  check_level_shapes(fwd.mid, p.sizes(), "head_backward cache");
  check_level_shapes(d_out, p.sizes(), "head_backward upstream gradient");
  if (acc.sizes() != p.sizes()) throw std::invalid_argument("head_backward: accumulator shape mismatch");

  // Second layer.
  LevelScores d_mid(b);
  LevelScores d_relu_mid(b);
  for (std::size_t l = 0; l < b; ++l) {
    d_mid[l].assign(p.sizes()[l], 0.0);
    d_relu_mid[l].assign(p.sizes()[l], 0.0);
  }
  d_mid[b - 1] = d_out[b - 1];
  for (std::size_t l = 0; l + 1 < b; ++l) {
    add_outer(acc.v_self(l), d_out[l], fwd.relu_mid[l]);
    matvec_transposed_add(p.v_self(l), d_out[l], d_relu_mid[l]);
    for (std::size_t j = l + 1; j < b; ++j) {
      add_outer(acc.v_cross(l, j), d_out[l], fwd.relu_mid[j]);
      matvec_transposed_add(p.v_cross(l, j), d_out[l], d_relu_mid[j]);
    }
  }
  for (std::size_t l = 0; l < b; ++l) {
    const auto g = relu_backward(fwd.mid[l], d_relu_mid[l]);
    for (std::size_t k = 0; k < g.size(); ++k) d_mid[l][k] += g[k];
  }

  // First layer.
  LevelScores d_z(b);
  LevelScores d_relu_z(b);
  for (std::size_t l = 0; l < b; ++l) d_relu_z[l].assign(p.sizes()[l], 0.0);
  d_z[0] = d_mid[0];
  for (std::size_t l = 1; l < b; ++l) d_z[l].assign(p.sizes()[l], 0.0);
  for (std::size_t l = 1; l < b; ++l) {
    add_outer(acc.w_self(l), d_mid[l], fwd.relu_input[l]);
    matvec_transposed_add(p.w_self(l), d_mid[l], d_relu_z[l]);
    for (std::size_t i = 0; i < l; ++i) {
      add_outer(acc.w_cross(l, i), d_mid[l], fwd.relu_input[i]);
      matvec_transposed_add(p.w_cross(l, i), d_mid[l], d_relu_z[i]);
    }
  }
  for (std::size_t l = 0; l < b; ++l) {
    const auto g = relu_backward(fwd.input[l], d_relu_z[l]);
    for (std::size_t k = 0; k < g.size(); ++k) d_z[l][k] += g[k];
  }
  return d_z;
}

HeadGradients head_backward(const HeadParams& p, const HeadForward& fwd, const LevelScores& d_out) {
  HeadGradients g;
  g.d_params = HeadParams(p.sizes());
  g.d_input = head_backward_accumulate(p, fwd, d_out, g.d_params);
  return g;
}

LevelScores probs_to_out_gradient(const HeadForward& fwd, const LevelScores& d_probs) {
  if (d_probs.size() != fwd.probs.size()) throw std::invalid_argument("probs_to_out_gradient: level mismatch");
  LevelScores d_out(d_probs.size());
  for (std::size_t l = 0; l < d_probs.size(); ++l) d_out[l] = softmax_backward(fwd.probs[l], d_probs[l]);
  return d_out;
}

std::size_t count_relu_zeroed(const HeadForward& fwd) {
  std::size_t n = 0;
  for (const auto& v : fwd.input)
    for (double x : v) n += x <= 0.0;
  for (const auto& v : fwd.mid)
    for (double x : v) n += x <= 0.0;
  return n;
}

}  // namespace hiercls
