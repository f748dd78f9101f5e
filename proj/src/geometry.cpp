#include "almn/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "almn/error.hpp"

namespace almn {

double angle_between(ConstRow a, ConstRow b) {
  if (a.size() != b.size()) throw Error(ErrorCode::DimensionMismatch, "angle_between");
  const double na = norm(a);
  const double nb = norm(b);
  if (!(na > kNormEpsilon) || !(nb > kNormEpsilon))
    throw Error(ErrorCode::DegenerateVector, "angle_between: vector norm below epsilon");
  const double cosine = std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
  return std::acos(cosine);
}

NearestNegative nearest_negative_angle(ConstRow center, const std::vector<ConstRow>& negatives) {
  if (negatives.empty()) throw Error(ErrorCode::EmptyNegativeSet, "no negatives in batch");
  NearestNegative best{angle_between(center, negatives[0]), 0};
  for (std::size_t j = 1; j < negatives.size(); ++j) {
    const double theta = angle_between(center, negatives[j]);
    if (theta < best.theta_nn) best = {theta, j};
  }
  return best;
}

NearestNegative nearest_negative_angle(ConstRow center, const Matrix& negatives) {
  std::vector<ConstRow> rows;
  rows.reserve(negatives.rows());
  for (std::size_t j = 0; j < negatives.rows(); ++j) rows.push_back(negatives.row(j));
  return nearest_negative_angle(center, rows);
}

double unit_chord(double angle) { return std::sqrt(std::max(0.0, 2.0 - 2.0 * std::cos(angle))); }

Vec lower_bound_vector(ConstRow x_i, ConstRow center, double theta_nn) {
  if (x_i.size() != center.size()) throw Error(ErrorCode::DimensionMismatch, "lower_bound_vector");
  const double r = norm(x_i);
  if (!(r > kNormEpsilon)) throw Error(ErrorCode::DegenerateVector, "lower_bound_vector: ||x_i|| <= eps");
  Vec u = difference(x_i, center);
  const double s = norm(u);
  if (!(s > kNormEpsilon))
    throw Error(ErrorCode::DegenerateGeometry, "lower_bound_vector: x_i coincides with its center");
  const double theta_i = angle_between(x_i, center);
  const double amplitude = r * unit_chord(theta_nn - theta_i);
  for (double& v : u) v *= amplitude / s;
  return u;
}

VirtualPoint generate_virtual_point(ConstRow x_i, ConstRow center, double theta_nn, double beta) {
  if (x_i.size() != center.size()) throw Error(ErrorCode::DimensionMismatch, "generate_virtual_point");
  if (!(beta >= 0.0)) throw Error(ErrorCode::InvalidArgument, "beta must be non-negative");
  const double r = norm(x_i);
  if (!(r > kNormEpsilon)) throw Error(ErrorCode::DegenerateVector, "generate_virtual_point: ||x_i|| <= eps");

  VirtualPoint out;
  out.ctx.theta_nn = theta_nn;
  out.ctx.beta = beta;
  out.ctx.theta_i = norm(center) > kNormEpsilon ? angle_between(x_i, center) : 0.0;

  const Vec u = difference(x_i, center);
  const double s = norm(u);
  if (beta == 0.0 || !(s > kNormEpsilon)) {
    out.x_g.assign(x_i.begin(), x_i.end());
    return out;
  }

  if (!(norm(center) > kNormEpsilon))
    throw Error(ErrorCode::DegenerateVector, "generate_virtual_point: center norm below epsilon");
  const double M = beta * r * unit_chord(theta_nn - out.ctx.theta_i) / s;
  // (M+1) x_i - M c == x_i + M (x_i - c)
  Vec v(x_i.begin(), x_i.end());
  axpy(M, u, v);
  const double nv = norm(v);
  if (!std::isfinite(M) || !std::isfinite(nv) || !(nv > 0.0))
    throw Error(ErrorCode::NonFiniteResult, "generate_virtual_point: non-finite intermediate");
  for (double& e : v) e *= r / nv;

  out.ctx.M = M;
  out.ctx.active = true;
  out.x_g = std::move(v);
  return out;
}

}  // namespace almn
