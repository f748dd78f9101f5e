#ifndef ALMN_LOSSES_HPP
#define ALMN_LOSSES_HPP

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "almn/batch.hpp"
#include "almn/centers.hpp"
#include "almn/geometry.hpp"
#include "almn/linalg.hpp"

namespace almn {

enum class MarginMode {
  baseline,      // center-anchored N-pair objective (ALMN with beta = 0)
  almn,          // virtual point generation with strength beta
  npair,         // classic N-pair with sample anchors
  fixed_margin,  // L-softmax style psi(theta) on the positive logit
};

std::string_view to_string(MarginMode mode);
MarginMode parse_margin_mode(std::string_view text);

struct LossConfig {
  double beta = 0.0;
  double lambda = 0.0005;
  MarginMode mode = MarginMode::almn;
  int m_angle = 1;
  /// When true the backward pass also routes d(loss)/d(theta_nn) into the
  /// nearest negative, making it the exact gradient of the forward pass.
  bool theta_nn_path = true;

  /// Throws InvalidArgument on violated invariants.
  void validate() const;
};

/// Cross-entropy of one softmax row whose first logit is the positive one.
struct SoftmaxRow {
  double loss = 0.0;
  double p_pos = 0.0;
  std::vector<double> p_neg;
};

/// -log(exp(z_pos) / (exp(z_pos) + sum_j exp(z_neg[j]))), max-shifted.
SoftmaxRow softmax_row(double z_pos, std::span<const double> z_neg);

/// One N-pair term: anchor x_{i+}, positive x_i, negatives x_j.
double npair_anchor_term(ConstRow anchor, ConstRow positive, const std::vector<ConstRow>& negatives);

/// Rows within each class are paired consecutively ((0,1), (2,3), ...); every
/// sample serves once as positive with its partner as anchor, so N terms are
/// averaged. Throws OddGroupSize when n is odd.
double npair_loss(const EmbeddingBatch& batch, double lambda);

/// Center-anchored N-pair objective; negatives are all rows of other classes.
double center_npair_loss(const EmbeddingBatch& batch, const CenterBank& bank, double lambda);

/// Forward state of the ALMN loss kept for the backward pass.
struct AlmnForward {
  double loss = 0.0;
  std::vector<VpgContext> contexts;
  /// Batch row index of each anchor's nearest negative.
  std::vector<std::size_t> nearest;
  Matrix x_g;
  std::vector<SoftmaxRow> rows;
};

AlmnForward almn_forward(const EmbeddingBatch& batch, const CenterBank& bank, double beta, double lambda);

/// Scalar ALMN loss (regularizer on the original x_i).
double almn_loss(const EmbeddingBatch& batch, const CenterBank& bank, const LossConfig& config);

/// psi(theta) = (-1)^k cos(m theta) - 2k, k = floor(m theta / pi) clamped to [0, m-1].
double psi(double theta, int m_angle);
int psi_branch(double theta, int m_angle);

double fixed_margin_loss(const EmbeddingBatch& batch, const CenterBank& bank, double lambda, int m_angle);

/// Dispatches on config.mode.
double evaluate_loss(const EmbeddingBatch& batch, const CenterBank& bank, const LossConfig& config);

/// (lambda / 2N) sum ||x_i||^2
double l2_regularizer(const Matrix& x, double lambda);

}  // namespace almn

#endif  // ALMN_LOSSES_HPP
