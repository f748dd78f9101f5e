#ifndef ALMN_GEOMETRY_HPP
#define ALMN_GEOMETRY_HPP

#include <cstddef>
#include <vector>

#include "almn/linalg.hpp"

namespace almn {

/// Guard for every norm used as a divisor.
inline constexpr double kNormEpsilon = 1e-8;

/// Angle in [0, pi] between two non-degenerate vectors.
/// Throws ErrorCode::DegenerateVector if either norm is <= kNormEpsilon.
double angle_between(ConstRow a, ConstRow b);

struct NearestNegative {
  double theta_nn = 0.0;
  std::size_t index = 0;
};

/// Smallest angle from `center` to any row of `negatives`; ties go to the
/// lowest index.
NearestNegative nearest_negative_angle(ConstRow center, const std::vector<ConstRow>& negatives);
NearestNegative nearest_negative_angle(ConstRow center, const Matrix& negatives);

/// Chord length between two points on the unit circle separated by `angle`:
/// sqrt(2 - 2 cos(angle)). Even in `angle`.
double unit_chord(double angle);

/// b_L: direction of (x_i - center), amplitude ||x_i|| * chord(theta_nn - theta_i).
Vec lower_bound_vector(ConstRow x_i, ConstRow center, double theta_nn);

/// Everything the virtual-point construction derived for one anchor. The
/// backward pass reuses it.
struct VpgContext {
  double theta_i = 0.0;
  double theta_nn = 0.0;
  double beta = 0.0;
  double M = 0.0;
  /// False when beta == 0 or x_i sits on its center; x_g == x_i then.
  bool active = false;
};

struct VirtualPoint {
  Vec x_g;
  VpgContext ctx;
};

/// x_g = ((M+1) x_i - M c) / ||(M+1) x_i - M c|| * ||x_i||
/// with M = beta ||x_i|| chord(theta_nn - theta_i) / ||x_i - c||.
///
/// theta_nn < theta_i is evaluated as written; the chord is even, so hard
/// patterns get a small M rather than a negative one.
VirtualPoint generate_virtual_point(ConstRow x_i, ConstRow center, double theta_nn, double beta);

}  // namespace almn

#endif  // ALMN_GEOMETRY_HPP
