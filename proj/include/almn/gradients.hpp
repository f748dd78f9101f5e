#ifndef ALMN_GRADIENTS_HPP
#define ALMN_GRADIENTS_HPP

#include <cstddef>
#include <functional>
#include <vector>

#include "almn/batch.hpp"
#include "almn/centers.hpp"
#include "almn/geometry.hpp"
#include "almn/losses.hpp"

namespace almn {

struct GradientBundle {
  double loss = 0.0;
  /// Row i is dL/dx_i, summing the sample's anchor-role and negative-role terms.
  Matrix grads;
  /// Per-anchor softmax probability of the positive logit.
  std::vector<double> p_pos;
};

/// Which closed form to use for d(x_g . c)/d(x_i).
enum class VpgGradientForm {
  /// Chain rule through ||x_i||, theta_i and ||x_i - c|| inside M.
  exact,
  /// The published three-term expression, kept for diagnostics. It holds the
  /// chord factor of M fixed and does not match finite differences in general.
  published,
};

/// d(x_g . c)/d(x_i) with theta_nn held fixed. Reduces to c when ctx is inactive.
Vec vpg_dot_gradient(ConstRow x_i, ConstRow center, const VpgContext& ctx,
                     VpgGradientForm form = VpgGradientForm::exact);

/// d(x_g . c)/d(theta_nn); zero when ctx is inactive.
double vpg_dot_dtheta_nn(ConstRow x_i, ConstRow center, const VpgContext& ctx);

/// d(angle(a, b))/d(a). Zero when a is (anti)parallel to b.
Vec angle_gradient(ConstRow a, ConstRow b);

GradientBundle almn_backward(const EmbeddingBatch& batch, const CenterBank& bank, const LossConfig& config,
                             VpgGradientForm form = VpgGradientForm::exact);

/// Gradient of evaluate_loss for every margin mode.
GradientBundle loss_backward(const EmbeddingBatch& batch, const CenterBank& bank, const LossConfig& config);

using BatchLossFn = std::function<double(const EmbeddingBatch&)>;

/// Central differences (L(x + h e_k) - L(x - h e_k)) / 2h over the coordinates
/// of row `index`.
Vec finite_difference_oracle(const BatchLossFn& loss_fn, const EmbeddingBatch& batch, std::size_t index,
                             double h);

}  // namespace almn

#endif  // ALMN_GRADIENTS_HPP
