#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hiercls/head.hpp"
#include "hiercls/numerics.hpp"

namespace hiercls {

// Shared ReLU hidden layer followed by one linear map per level:
//   h = relu(A x + a),  z[l] = C_l h + c_l.
// Stands in for the convolutional trunk that produces the head input.
struct Backbone {
  Matrix hidden_weight;  // H x D
  Matrix hidden_bias;    // H x 1
  std::vector<Matrix> level_weight;  // M_l x H
  std::vector<Matrix> level_bias;    // M_l x 1

  std::size_t feature_dim() const noexcept { return hidden_weight.cols(); }
  std::size_t hidden_width() const noexcept { return hidden_weight.rows(); }

  std::vector<Matrix*> tensors();
  std::vector<const Matrix*> tensors() const;
  std::vector<std::string> tensor_names() const;
  friend bool operator==(const Backbone&, const Backbone&) = default;
};

Backbone make_backbone(std::size_t feature_dim, std::size_t hidden, const std::vector<std::size_t>& sizes);
// Xavier-uniform weights, zero biases.
Backbone init_backbone(std::size_t feature_dim, std::size_t hidden, const std::vector<std::size_t>& sizes,
                       std::uint64_t seed);

struct BackboneForward {
  Vector input;
  Vector pre_activation;
  Vector hidden;
  LevelScores z;
};

BackboneForward backbone_forward(const Backbone& b, std::span<const double> x);
// Adds parameter gradients into acc; returns dL/dx.
Vector backbone_backward_accumulate(const Backbone& b, const BackboneForward& fwd, const LevelScores& d_z,
                                    Backbone& acc);

struct Model {
  std::uint64_t taxonomy_digest = 0;
  Backbone backbone;
  HeadParams head;

  std::vector<Matrix*> tensors();
  std::vector<const Matrix*> tensors() const;
  std::vector<std::string> tensor_names() const;
  friend bool operator==(const Model&, const Model&) = default;
};

Model init_model(const Taxonomy& t, std::size_t feature_dim, std::size_t hidden, std::uint64_t seed);
// Zero-valued gradient buffers shaped like the model.
Model zeros_like(const Model& m);

struct ModelForward {
  BackboneForward backbone;
  HeadForward head;
};

ModelForward model_forward(const Model& m, std::span<const double> x);
// Backward from dL/d out (head output scores) into the gradient buffers.
void model_backward_accumulate(const Model& m, const ModelForward& fwd, const LevelScores& d_out, Model& acc);

}  // namespace hiercls
