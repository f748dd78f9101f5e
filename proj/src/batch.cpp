#include "almn/batch.hpp"

#include <map>

#include "almn/error.hpp"

namespace almn {

BatchLayout batch_layout(const EmbeddingBatch& batch) {
  if (batch.x.rows() != batch.labels.size())
    throw Error(ErrorCode::DimensionMismatch, "batch rows and labels differ in length");
  if (batch.labels.empty()) throw Error(ErrorCode::InvalidBatch, "empty batch");
  std::map<ClassId, std::size_t> counts;
  for (ClassId y : batch.labels) ++counts[y];
  BatchLayout layout;
  layout.m = counts.size();
  layout.n = counts.begin()->second;
  for (const auto& [label, count] : counts) {
    if (count != layout.n)
      throw Error(ErrorCode::InvalidBatch, "class " + std::to_string(label) + " has " +
                                               std::to_string(count) + " samples, expected " +
                                               std::to_string(layout.n));
    layout.classes.push_back(label);
  }
  return layout;
}

BatchLayout require_loss_layout(const EmbeddingBatch& batch) {
  BatchLayout layout = batch_layout(batch);
  if (layout.m < 2) throw Error(ErrorCode::SingleClassBatch, "loss needs at least two classes");
  return layout;
}

std::vector<std::size_t> negatives_of(const EmbeddingBatch& batch, ClassId label) {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < batch.labels.size(); ++j)
    if (batch.labels[j] != label) out.push_back(j);
  return out;
}

}  // namespace almn
