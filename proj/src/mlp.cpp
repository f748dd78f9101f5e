#include "almn/mlp.hpp"

#include <cmath>
#include <random>

#include "almn/error.hpp"
#include "almn/kernels.hpp"

namespace almn {

MlpModel::MlpModel(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw Error(ErrorCode::InvalidArgument, "model needs at least one layer");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    if (layers_[l].bias.size() != layers_[l].out_dim())
      throw Error(ErrorCode::DimensionMismatch, "bias size mismatch in layer " + std::to_string(l));
    if (l > 0 && layers_[l].in_dim() != layers_[l - 1].out_dim())
      throw Error(ErrorCode::DimensionMismatch, "layer " + std::to_string(l) + " does not chain");
  }
}

MlpModel MlpModel::glorot(const std::vector<std::size_t>& widths, std::uint64_t seed) {
  if (widths.size() < 2) throw Error(ErrorCode::InvalidArgument, "need at least input and output widths");
  std::mt19937_64 engine(seed);
  std::vector<DenseLayer> layers;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const std::size_t in = widths[l], out = widths[l + 1];
    if (in == 0 || out == 0) throw Error(ErrorCode::InvalidArgument, "layer widths must be positive");
    const double s = std::sqrt(6.0 / static_cast<double>(in + out));
    std::uniform_real_distribution<double> dist(-s, s);
    DenseLayer layer{Matrix(out, in), Vec(out, 0.0)};
    for (double& w : layer.weight.flat()) w = dist(engine);
    layers.push_back(std::move(layer));
  }
  return MlpModel(std::move(layers));
}

std::size_t MlpModel::input_dim() const { return layers_.front().in_dim(); }
std::size_t MlpModel::output_dim() const { return layers_.back().out_dim(); }

std::vector<std::size_t> MlpModel::widths() const {
  std::vector<std::size_t> w{input_dim()};
  for (const auto& layer : layers_) w.push_back(layer.out_dim());
  return w;
}

bool MlpModel::all_finite() const {
  for (const auto& layer : layers_)
    if (!almn::all_finite(layer.weight.flat()) || !almn::all_finite(layer.bias)) return false;
  return true;
}

ForwardCache forward_cached(const MlpModel& model, const Matrix& inputs) {
  if (inputs.cols() != model.input_dim())
    throw Error(ErrorCode::DimensionMismatch, "input has " + std::to_string(inputs.cols()) +
                                                  " features, model expects " + std::to_string(model.input_dim()));
  const auto& layers = model.layers();
  ForwardCache cache;
  Matrix act = inputs;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Matrix z;
    kernels::dense_forward(act, layers[l].weight, layers[l].bias, z);
    cache.inputs.push_back(std::move(act));
    act = z;
    if (l + 1 < layers.size())
      for (double& v : act.flat()) v = v > 0.0 ? v : 0.0;
    cache.pre_activation.push_back(std::move(z));
  }
  cache.output = std::move(act);
  return cache;
}

Matrix forward(const MlpModel& model, const Matrix& inputs) { return forward_cached(model, inputs).output; }

ParamGrads backward(const MlpModel& model, const ForwardCache& cache, const Matrix& output_grad) {
  const auto& layers = model.layers();
  if (output_grad.rows() != cache.output.rows() || output_grad.cols() != cache.output.cols())
    throw Error(ErrorCode::DimensionMismatch, "output gradient shape");
  ParamGrads grads(layers.size());
  Matrix delta = output_grad;
  for (std::size_t l = layers.size(); l-- > 0;) {
    kernels::dense_weight_grad(delta, cache.inputs[l], grads[l].weight, grads[l].bias);
    if (l == 0) break;
    Matrix upstream;
    kernels::dense_input_grad(delta, layers[l].weight, upstream);
    const Matrix& z = cache.pre_activation[l - 1];
    for (std::size_t i = 0; i < upstream.flat().size(); ++i)
      if (!(z.flat()[i] > 0.0)) upstream.flat()[i] = 0.0;
    delta = std::move(upstream);
  }
  return grads;
}

}  // namespace almn
