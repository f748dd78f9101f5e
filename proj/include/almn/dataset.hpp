#ifndef ALMN_DATASET_HPP
#define ALMN_DATASET_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "almn/batch.hpp"
#include "almn/linalg.hpp"

namespace almn {

/// Labelled input features; immutable once built.
class Dataset {
public:
  Dataset() = default;
  Dataset(Matrix features, std::vector<ClassId> labels);

  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t feature_dim() const noexcept { return features_.cols(); }
  const Matrix& features() const noexcept { return features_; }
  const std::vector<ClassId>& labels() const noexcept { return labels_; }
  /// class id -> item indices, ascending.
  const std::map<ClassId, std::vector<std::size_t>>& class_index() const noexcept { return class_index_; }
  std::vector<ClassId> classes() const;

  Dataset subset(const std::vector<std::size_t>& items) const;

  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.features_ == b.features_ && a.labels_ == b.labels_;
  }

private:
  Matrix features_;
  std::vector<ClassId> labels_;
  std::map<ClassId, std::vector<std::size_t>> class_index_;
};

/// Zero-shot split: the lower half of the sorted class ids train, the rest test.
std::pair<Dataset, Dataset> split_by_class(const Dataset& ds);

/// Seeded generator with a serializable state.
class Rng {
public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::mt19937_64& engine() noexcept { return engine_; }
  std::string state() const;
  void restore(const std::string& state);

  friend bool operator==(const Rng&, const Rng&) = default;

private:
  std::mt19937_64 engine_;
};

struct BatchSpec {
  std::size_t m = 10;  // classes per batch
  std::size_t n = 5;   // samples per class
  std::uint64_t seed = 0;

  void validate() const;
};

/// m distinct classes drawn uniformly among those with at least n items,
/// then n distinct items per class. Returns item indices grouped by class.
std::vector<std::size_t> sample_batch(const Dataset& ds, const BatchSpec& spec, Rng& rng);

struct MultimodalSpec {
  int classes = 10;
  int subclusters_per_class = 2;
  int points_per_class = 200;
  int input_dim = 16;
  double spread = 0.1;
  std::uint64_t seed = 0;
};

/// Per class: subcluster means uniform in [-1, 1]^p, isotropic Gaussian points
/// (sigma = spread) split evenly across subclusters. Labels are 0..classes-1.
Dataset gen_multimodal(const MultimodalSpec& spec);

/// One row per item: label followed by features, comma separated, no header.
Dataset load_csv(const std::filesystem::path& path);
Dataset parse_csv(const std::string& text);
std::string format_csv(const Dataset& ds);
void write_csv(const Dataset& ds, const std::filesystem::path& path);

/// IDX images (magic 0x00000803) and labels (0x00000801); pixels scaled to [0, 1].
Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels);
Dataset parse_idx(const std::vector<std::uint8_t>& images, const std::vector<std::uint8_t>& labels);

}  // namespace almn

#endif  // ALMN_DATASET_HPP
