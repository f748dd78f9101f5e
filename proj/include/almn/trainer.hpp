#ifndef ALMN_TRAINER_HPP
#define ALMN_TRAINER_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "almn/centers.hpp"
#include "almn/dataset.hpp"
#include "almn/losses.hpp"
#include "almn/mlp.hpp"

namespace almn {

enum class CenterSchedule { per_iteration, per_epoch };

std::string_view to_string(CenterSchedule schedule);
CenterSchedule parse_center_schedule(std::string_view text);

struct TrainConfig {
  std::size_t iterations = 2000;
  double lr = 0.00001;
  double lr_decay_factor = 0.8;
  /// Defaults to 60% of `iterations` when unset.
  std::optional<std::size_t> decay_at_iteration;
  double momentum = 0.9;
  double weight_decay = 0.0002;
  /// theta_nn is held constant during training.
  LossConfig loss{.theta_nn_path = false};
  /// batch.seed drives the sampler; `seed` drives parameter initialization.
  BatchSpec batch{};
  double center_alpha = 0.5;
  CenterSchedule center_update = CenterSchedule::per_iteration;
  double head_lr_multiplier = 10.0;
  std::vector<std::size_t> hidden{64, 64};
  std::size_t embedding_dim = 32;
  std::uint64_t seed = 0;

  void validate() const;
  std::size_t effective_decay_at() const;
  double learning_rate_at(std::size_t iteration) const;
};

struct TrainState {
  MlpModel model;
  ParamGrads velocity;
  CenterBank centers{1, 0.0};
  Rng rng;
  std::size_t iteration = 0;
  std::vector<double> loss_curve;
};

/// Loss and parameter gradients of one batch with the centers held fixed.
struct BatchGradients {
  double loss = 0.0;
  ParamGrads params;
  Matrix embeddings;
};

BatchGradients compute_batch_gradients(const MlpModel& model, const Matrix& inputs,
                                       const std::vector<ClassId>& labels, const CenterBank& centers,
                                       const LossConfig& loss);

/// Sample -> forward -> loss gradient -> backprop -> SGD (momentum, weight
/// decay, head multiplier) -> center update, once per step.
class Trainer {
public:
  Trainer(const Dataset& train_set, TrainConfig config);
  Trainer(const Dataset& train_set, TrainConfig config, TrainState resume);

  /// Runs one iteration and returns its loss. Throws DivergenceDetected on a
  /// non-finite loss or parameter.
  double step();
  /// Steps until config.iterations is reached.
  void run();

  const TrainState& state() const noexcept { return state_; }
  const TrainConfig& config() const noexcept { return config_; }

private:
  const Dataset& data_;
  TrainConfig config_;
  TrainState state_;
  std::size_t epoch_length_ = 1;
};

struct TrainResult {
  MlpModel model;
  CenterBank centers{1, 0.0};
  std::vector<double> loss_curve;
};

TrainResult train(const Dataset& train_set, const TrainConfig& config);

}  // namespace almn

#endif  // ALMN_TRAINER_HPP
