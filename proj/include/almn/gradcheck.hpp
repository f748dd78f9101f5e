#ifndef ALMN_GRADCHECK_HPP
#define ALMN_GRADCHECK_HPP

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "almn/batch.hpp"
#include "almn/centers.hpp"
#include "almn/losses.hpp"

namespace almn {

struct GradCheckOptions {
  std::uint64_t seed = 1;
  std::size_t trials = 100;
  std::size_t dim = 8;
  double h = 1e-5;
  double tolerance = 1e-4;
  double lambda = 0.0005;
};

/// A 2 x 2 batch in which anchor 0 sits at exactly `theta_i` from its center
/// and the nearest negative of that center sits at exactly `theta_nn`.
struct GradCheckCase {
  EmbeddingBatch batch;
  CenterBank centers{1, 0.0};
  LossConfig config;
  double theta_i = 0.0;
  double theta_nn = 0.0;
};

/// Draws norms in [0.5, 2], theta_i in [10, 80] deg, theta_nn in
/// [theta_i + 5, 90] deg and beta from {0, 1, 2, 3}; redraws until every
/// anchor in the batch is away from the non-smooth points of the loss.
GradCheckCase make_grad_check_case(std::mt19937_64& engine, const GradCheckOptions& options);

/// max over coordinates of |a - ref| / max(|ref|, 1e-6)
double max_relative_error(std::span<const double> analytic, std::span<const double> reference);

struct GradCheckTrial {
  std::size_t index = 0;
  double beta = 0.0;
  double theta_i = 0.0;
  double theta_nn = 0.0;
  double max_rel_err = 0.0;
  double published_max_rel_err = 0.0;
  bool pass = false;
};

struct GradCheckReport {
  GradCheckOptions options;
  std::vector<GradCheckTrial> trials;
  double max_rel_err = 0.0;
  double mean_rel_err = 0.0;
  /// Same comparison for the published closed form (diagnostic only).
  double published_max_rel_err = 0.0;
  double seconds = 0.0;

  bool pass() const;
  std::string to_json() const;
};

GradCheckReport run_grad_check(const GradCheckOptions& options);

}  // namespace almn

#endif  // ALMN_GRADCHECK_HPP
