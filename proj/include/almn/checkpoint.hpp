#ifndef ALMN_CHECKPOINT_HPP
#define ALMN_CHECKPOINT_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "almn/trainer.hpp"

namespace almn {

inline constexpr int kCheckpointVersion = 1;

/// JSON container: model shape and parameters, momentum buffers, center bank,
/// sampler state and iteration count.
std::string serialize_checkpoint(const TrainState& state);
TrainState deserialize_checkpoint(const std::string& text);

void save_checkpoint(const TrainState& state, const std::filesystem::path& path);
/// Accepts either the checkpoint file or a directory holding checkpoint.json.
TrainState load_checkpoint(const std::filesystem::path& path);

/// "iteration,loss" header plus one row per step.
std::string format_loss_curve(const std::vector<double>& curve);

}  // namespace almn

#endif  // ALMN_CHECKPOINT_HPP
