#ifndef ALMN_BATCH_HPP
#define ALMN_BATCH_HPP

#include <cstddef>
#include <vector>

#include "almn/linalg.hpp"

namespace almn {

using ClassId = int;

/// One mini-batch of embeddings: row i of `x` carries label `labels[i]`.
/// Sampled batches are laid out as m classes x n samples, but row order is
/// not significant to any loss.
struct EmbeddingBatch {
  Matrix x;
  std::vector<ClassId> labels;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t dim() const noexcept { return x.cols(); }
};

struct BatchLayout {
  std::size_t m = 0;  // distinct classes
  std::size_t n = 0;  // samples per class
  std::vector<ClassId> classes;  // sorted
};

/// Verifies rows/labels agree and every class contributes the same number of
/// samples. Throws InvalidBatch / DimensionMismatch otherwise.
BatchLayout batch_layout(const EmbeddingBatch& batch);

/// Like batch_layout, additionally requiring m >= 2 (SingleClassBatch).
BatchLayout require_loss_layout(const EmbeddingBatch& batch);

/// Indices of rows whose label differs from `label`, ascending.
std::vector<std::size_t> negatives_of(const EmbeddingBatch& batch, ClassId label);

}  // namespace almn

#endif  // ALMN_BATCH_HPP
