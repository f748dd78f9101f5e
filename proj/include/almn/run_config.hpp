#ifndef ALMN_RUN_CONFIG_HPP
#define ALMN_RUN_CONFIG_HPP

#include <filesystem>
#include <string>

#include "almn/trainer.hpp"

namespace almn {

enum class DataSplit { train, test, all };

std::string_view to_string(DataSplit split);
DataSplit parse_data_split(std::string_view text);

/// Everything `train` needs. Text form is INI-style:
///
///   [data]   csv | idx_images + idx_labels, split
///   [output] dir
///   [train]  iterations, lr, lr_decay_factor, decay_at_iteration, momentum,
///            weight_decay, head_lr_multiplier, hidden, embedding_dim,
///            center_alpha, center_update, seed
///   [batch]  m, n, seed
///   [loss]   mode, beta, lambda, m_angle, theta_nn_path
///
/// Unknown sections or keys are rejected.
struct RunConfig {
  std::string data_csv;
  std::string idx_images;
  std::string idx_labels;
  DataSplit split = DataSplit::train;
  std::string output_dir = "out";
  TrainConfig train;

  /// Every field, defaults materialized, in the same INI layout.
  std::string to_ini() const;
};

RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace almn

#endif  // ALMN_RUN_CONFIG_HPP
