#include "almn/centers.hpp"

#include <string>

#include "almn/error.hpp"

namespace almn {

CenterBank::CenterBank(std::size_t dim, double alpha) : dim_(dim), alpha_(alpha) {
  if (dim == 0) throw Error(ErrorCode::InvalidArgument, "center dimension must be positive");
  if (!(alpha >= 0.0)) throw Error(ErrorCode::InvalidArgument, "center alpha must be non-negative");
}

const Vec& CenterBank::at(ClassId label) const {
  auto it = centers_.find(label);
  if (it == centers_.end())
    throw Error(ErrorCode::UninitializedCenter, "no center for class " + std::to_string(label));
  return it->second;
}

const Vec& CenterBank::get_or_init(ClassId label, const std::vector<ConstRow>& samples) {
  if (auto it = centers_.find(label); it != centers_.end()) return it->second;
  if (samples.empty())
    throw Error(ErrorCode::UninitializedCenter, "cannot initialize class " + std::to_string(label) +
                                                    " without samples");
  Vec mean(dim_, 0.0);
  for (ConstRow s : samples) {
    if (s.size() != dim_) throw Error(ErrorCode::DimensionMismatch, "sample dimension != bank dimension");
    axpy(1.0, s, mean);
  }
  for (double& v : mean) v /= static_cast<double>(samples.size());
  return centers_.emplace(label, std::move(mean)).first->second;
}

void CenterBank::init_missing(const EmbeddingBatch& batch) {
  std::map<ClassId, std::vector<ConstRow>> grouped;
  for (std::size_t i = 0; i < batch.size(); ++i)
    if (!contains(batch.labels[i])) grouped[batch.labels[i]].push_back(batch.x.row(i));
  for (const auto& [label, rows] : grouped) get_or_init(label, rows);
}

void CenterBank::set(ClassId label, Vec center) {
  if (center.size() != dim_) throw Error(ErrorCode::DimensionMismatch, "center dimension != bank dimension");
  centers_[label] = std::move(center);
}

void CenterBank::update(const EmbeddingBatch& batch) {
  if (batch.x.rows() != batch.labels.size())
    throw Error(ErrorCode::DimensionMismatch, "batch rows and labels differ in length");
  if (batch.size() > 0 && batch.dim() != dim_)
    throw Error(ErrorCode::DimensionMismatch, "batch dimension != bank dimension");

  struct Accum {
    Vec diff_sum;
    std::size_t count = 0;
  };
  std::map<ClassId, Accum> acc;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const ClassId z = batch.labels[i];
    const Vec& c = at(z);
    Accum& a = acc[z];
    if (a.diff_sum.empty()) a.diff_sum.assign(dim_, 0.0);
    ConstRow x = batch.x.row(i);
    for (std::size_t k = 0; k < dim_; ++k) a.diff_sum[k] += c[k] - x[k];
    ++a.count;
  }
  for (auto& [z, a] : acc) {
    Vec& c = centers_.at(z);
    const double scale = alpha_ / (1.0 + static_cast<double>(a.count));
    for (std::size_t k = 0; k < dim_; ++k) c[k] -= scale * a.diff_sum[k];
  }
}

}  // namespace almn
