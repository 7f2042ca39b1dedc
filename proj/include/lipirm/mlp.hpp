#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <json.hpp>

#include "lipirm/domain_data.hpp"
#include "lipirm/numerics.hpp"

namespace lipirm {

/// Fully connected network with ReLU hidden layers and a scalar output.
/// Parameters live in one flat vector: for every layer the weight matrix
/// (out x in, row-major) followed by the bias vector.
struct MlpModel {
  std::vector<std::size_t> layer_sizes;
  std::vector<double> params;
  LabelKind kind = LabelKind::Regression;

  std::size_t input_dim() const { return layer_sizes.front(); }
  std::size_t layer_count() const { return layer_sizes.size() - 1; }
  /// Offset of the weights of layer l inside params.
  std::size_t weight_offset(std::size_t l) const;

  static std::size_t param_count(std::span<const std::size_t> sizes);
  /// He-uniform weights, zero biases.
  static MlpModel create(std::vector<std::size_t> sizes, LabelKind kind, Rng &rng);
};

/// Activations kept by a forward pass for backpropagation.
struct ForwardCache {
  std::vector<std::vector<double>> act;  // act[0] = input, act[l+1] = layer l output
};

/// Raw output: the value for regression, the logit for classification.
double forward(const MlpModel &model, std::span<const double> x);
double forward(const MlpModel &model, std::span<const double> x, ForwardCache &cache);

/// Regression value or the probability of the positive class.
double predict(const MlpModel &model, std::span<const double> x);

/// grad += dout * d(output)/d(params) for the pass stored in cache.
void backward(const MlpModel &model, const ForwardCache &cache, double dout,
              std::span<double> grad);

nlohmann::json to_json(const MlpModel &model);
MlpModel model_from_json(const nlohmann::json &j);

} // namespace lipirm
