#ifndef ALMN_MLP_HPP
#define ALMN_MLP_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

#include "almn/linalg.hpp"

namespace almn {

struct DenseLayer {
  Matrix weight;  // out x in
  Vec bias;       // out

  std::size_t in_dim() const noexcept { return weight.cols(); }
  std::size_t out_dim() const noexcept { return weight.rows(); }

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// Fully connected p -> h1 -> ... -> d network. Rectifier on hidden layers,
/// identity on the embedding head (last layer).
class MlpModel {
public:
  MlpModel() = default;
  explicit MlpModel(std::vector<DenseLayer> layers);

  /// Glorot-uniform weights, zero biases.
  static MlpModel glorot(const std::vector<std::size_t>& widths, std::uint64_t seed);

  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
  std::vector<DenseLayer>& layers() noexcept { return layers_; }
  std::size_t input_dim() const;
  std::size_t output_dim() const;
  std::vector<std::size_t> widths() const;

  bool all_finite() const;

  friend bool operator==(const MlpModel&, const MlpModel&) = default;

private:
  std::vector<DenseLayer> layers_;
};

/// Activations kept for the backward pass: inputs[l] feeds layer l,
/// pre_activation[l] is its affine output.
struct ForwardCache {
  std::vector<Matrix> inputs;
  std::vector<Matrix> pre_activation;
  Matrix output;
};

Matrix forward(const MlpModel& model, const Matrix& inputs);
ForwardCache forward_cached(const MlpModel& model, const Matrix& inputs);

/// Parameter gradients, same shapes as the model's layers.
using ParamGrads = std::vector<DenseLayer>;

/// Backpropagates d(loss)/d(output) through the cached forward pass.
ParamGrads backward(const MlpModel& model, const ForwardCache& cache, const Matrix& output_grad);

}  // namespace almn

#endif  // ALMN_MLP_HPP
