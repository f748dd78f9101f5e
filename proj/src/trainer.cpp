#include "almn/trainer.hpp"

#include <algorithm>
#include <cmath>

#include "almn/error.hpp"
#include "almn/gradients.hpp"

namespace almn {

std::string_view to_string(CenterSchedule schedule) {
  return schedule == CenterSchedule::per_epoch ? "epoch" : "iteration";
}

CenterSchedule parse_center_schedule(std::string_view text) {
  if (text == "iteration") return CenterSchedule::per_iteration;
  if (text == "epoch") return CenterSchedule::per_epoch;
  throw Error(ErrorCode::InvalidArgument, "center_update must be 'iteration' or 'epoch'");
}

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw Error(ErrorCode::InvalidArgument, "lr must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw Error(ErrorCode::InvalidArgument, "momentum must be in [0, 1)");
  if (!(weight_decay >= 0.0)) throw Error(ErrorCode::InvalidArgument, "weight_decay must be >= 0");
  if (!(lr_decay_factor > 0.0)) throw Error(ErrorCode::InvalidArgument, "lr_decay_factor must be > 0");
  if (!(head_lr_multiplier > 0.0)) throw Error(ErrorCode::InvalidArgument, "head_lr_multiplier must be > 0");
  if (!(center_alpha >= 0.0)) throw Error(ErrorCode::InvalidArgument, "center_alpha must be >= 0");
  if (embedding_dim < 2) throw Error(ErrorCode::InvalidArgument, "embedding_dim must be >= 2");
  for (std::size_t h : hidden)
    if (h == 0) throw Error(ErrorCode::InvalidArgument, "hidden widths must be positive");
  loss.validate();
  batch.validate();
}

std::size_t TrainConfig::effective_decay_at() const {
  return decay_at_iteration.value_or(static_cast<std::size_t>(0.6 * static_cast<double>(iterations)));
}

double TrainConfig::learning_rate_at(std::size_t iteration) const {
  return iteration >= effective_decay_at() ? lr * lr_decay_factor : lr;
}

BatchGradients compute_batch_gradients(const MlpModel& model, const Matrix& inputs,
                                       const std::vector<ClassId>& labels, const CenterBank& centers,
                                       const LossConfig& loss) {
  const ForwardCache cache = forward_cached(model, inputs);
  EmbeddingBatch batch{cache.output, labels};
  const GradientBundle bundle = loss_backward(batch, centers, loss);
  return {bundle.loss, backward(model, cache, bundle.grads), cache.output};
}

namespace {

ParamGrads zero_like(const MlpModel& model) {
  ParamGrads v;
  for (const auto& layer : model.layers())
    v.push_back({Matrix(layer.out_dim(), layer.in_dim()), Vec(layer.out_dim(), 0.0)});
  return v;
}

}  // namespace

Trainer::Trainer(const Dataset& train_set, TrainConfig config) : data_(train_set), config_(std::move(config)) {
  config_.validate();
  std::vector<std::size_t> widths{train_set.feature_dim()};
  widths.insert(widths.end(), config_.hidden.begin(), config_.hidden.end());
  widths.push_back(config_.embedding_dim);
  state_.model = MlpModel::glorot(widths, config_.seed);
  state_.velocity = zero_like(state_.model);
  state_.centers = CenterBank(config_.embedding_dim, config_.center_alpha);
  state_.rng = Rng(config_.batch.seed);
  epoch_length_ = std::max<std::size_t>(1, train_set.size() / (config_.batch.m * config_.batch.n));
}

Trainer::Trainer(const Dataset& train_set, TrainConfig config, TrainState resume)
    : data_(train_set), config_(std::move(config)), state_(std::move(resume)) {
  config_.validate();
  if (state_.model.input_dim() != train_set.feature_dim())
    throw Error(ErrorCode::DimensionMismatch, "checkpoint input width does not match the data");
  epoch_length_ = std::max<std::size_t>(1, train_set.size() / (config_.batch.m * config_.batch.n));
}

double Trainer::step() {
  const std::size_t it = state_.iteration;
  const auto items = sample_batch(data_, config_.batch, state_.rng);
  const Dataset batch_data = data_.subset(items);

  const ForwardCache cache = forward_cached(state_.model, batch_data.features());
  EmbeddingBatch batch{cache.output, batch_data.labels()};
  state_.centers.init_missing(batch);
  const GradientBundle bundle = [&] {
    try {
      return loss_backward(batch, state_.centers, config_.loss);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::NonFiniteGradient || e.code() == ErrorCode::NonFiniteResult)
        throw Error(ErrorCode::DivergenceDetected, "iteration " + std::to_string(it) + ": " + e.what());
      throw;
    }
  }();
  if (!std::isfinite(bundle.loss))
    throw Error(ErrorCode::DivergenceDetected, "non-finite loss at iteration " + std::to_string(it));

  const ParamGrads grads = backward(state_.model, cache, bundle.grads);
  const double lr = config_.learning_rate_at(it);
  auto& layers = state_.model.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const double step = lr * (l + 1 == layers.size() ? config_.head_lr_multiplier : 1.0);
    auto w = layers[l].weight.flat();
    auto vw = state_.velocity[l].weight.flat();
    auto gw = grads[l].weight.flat();
    for (std::size_t k = 0; k < w.size(); ++k) {
      vw[k] = config_.momentum * vw[k] - step * (gw[k] + config_.weight_decay * w[k]);
      w[k] += vw[k];
    }
    auto& b = layers[l].bias;
    auto& vb = state_.velocity[l].bias;
    for (std::size_t k = 0; k < b.size(); ++k) {
      vb[k] = config_.momentum * vb[k] - step * grads[l].bias[k];
      b[k] += vb[k];
    }
  }
  if (!state_.model.all_finite())
    throw Error(ErrorCode::DivergenceDetected, "non-finite parameters after iteration " + std::to_string(it));

  if (config_.center_update == CenterSchedule::per_iteration || (it + 1) % epoch_length_ == 0)
    state_.centers.update(batch);

  state_.loss_curve.push_back(bundle.loss);
  ++state_.iteration;
  return bundle.loss;
}

void Trainer::run() {
  while (state_.iteration < config_.iterations) step();
}

TrainResult train(const Dataset& train_set, const TrainConfig& config) {
  Trainer trainer(train_set, config);
  trainer.run();
  const TrainState& s = trainer.state();
  return {s.model, s.centers, s.loss_curve};
}

}  // namespace almn
