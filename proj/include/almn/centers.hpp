#ifndef ALMN_CENTERS_HPP
#define ALMN_CENTERS_HPP

#include <cstddef>
#include <map>
#include <vector>

#include "almn/batch.hpp"
#include "almn/linalg.hpp"

namespace almn {

/// Per-class anchor vectors, updated once per iteration from the mini-batch:
///
///   c_z <- c_z - alpha * sum_{i: y_i = z} (c_z - x_i) / (1 + #{i: y_i = z})
///
/// Centers are constants as far as the loss gradient is concerned.
class CenterBank {
public:
  CenterBank(std::size_t dim, double alpha);

  std::size_t dim() const noexcept { return dim_; }
  double alpha() const noexcept { return alpha_; }
  std::size_t size() const noexcept { return centers_.size(); }

  bool contains(ClassId label) const { return centers_.count(label) != 0; }

  /// Throws UninitializedCenter for unseen classes.
  const Vec& at(ClassId label) const;

  /// Returns the stored center, or initializes it to the mean of `samples`.
  const Vec& get_or_init(ClassId label, const std::vector<ConstRow>& samples);

  /// Initializes every unseen class present in `batch` from its batch mean.
  void init_missing(const EmbeddingBatch& batch);

  void set(ClassId label, Vec center);

  /// Simultaneous update of all classes present in `batch`; absent classes
  /// are untouched.
  void update(const EmbeddingBatch& batch);

  const std::map<ClassId, Vec>& centers() const noexcept { return centers_; }

  friend bool operator==(const CenterBank&, const CenterBank&) = default;

private:
  std::size_t dim_;
  double alpha_;
  std::map<ClassId, Vec> centers_;
};

}  // namespace almn

#endif  // ALMN_CENTERS_HPP
