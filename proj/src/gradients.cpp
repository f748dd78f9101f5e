#include "almn/gradients.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "almn/error.hpp"

namespace almn {

namespace {

int sign(double v) { return (v > 0.0) - (v < 0.0); }

/// d/d(phi) of sqrt(2 - 2 cos phi) == 2 |sin(phi / 2)|.
double chord_derivative(double phi) { return sign(phi) * std::cos(0.5 * phi); }

/// Shared pieces of the virtual-point construction for one anchor.
struct VpgTerms {
  double r, s, M, nv, vc, uc, vu;
  Vec u, v;
};

VpgTerms vpg_terms(ConstRow x, ConstRow c, const VpgContext& ctx) {
  VpgTerms t;
  t.r = norm(x);
  t.u = difference(x, c);
  t.s = norm(t.u);
  t.M = ctx.M;
  t.v.assign(x.begin(), x.end());
  axpy(t.M, t.u, t.v);
  t.nv = norm(t.v);
  t.vc = dot(t.v, c);
  t.uc = dot(t.u, c);
  t.vu = dot(t.v, t.u);
  return t;
}

/// d(x_g . c)/dM
double dot_dM(const VpgTerms& t) { return t.r * (t.uc / t.nv - t.vc * t.vu / (t.nv * t.nv * t.nv)); }

Vec published_form(ConstRow x, ConstRow c, const VpgTerms& t) {
  const double M = t.M, r = t.r, s2 = t.s * t.s, nv = t.nv;
  const double xc = dot(x, c), cc = dot(c, c), ux = dot(t.u, x);
  Vec g(x.size(), 0.0);
  axpy(((M + 1.0) * xc - M * cc) / (nv * r), x, g);
  axpy((M + 1.0 + M * t.uc / s2) * r / nv, c, g);
  axpy(M * (s2 - r * r) * t.uc / (r * s2) / nv, x, g);
  axpy(-t.vc * (M * ux + r * r) / (nv * nv * nv * r), t.v, g);
  return g;
}

/// Accumulates dL/dx for the center-anchored softmax family. For anchor i:
/// anchor_grad row i is already scaled (including the regularizer); prob(i, j)
/// is the softmax weight of negative j under anchor i (zero for positives).
/// Extra per-anchor vectors (theta_nn path) are routed to `extra_target`.
Matrix accumulate_center_softmax(const EmbeddingBatch& batch, const CenterBank& bank, const Matrix& anchor_grad,
                                 const Matrix& prob, const Matrix& extra, const std::vector<std::size_t>& extra_target,
                                 bool use_extra) {
  const std::size_t N = batch.size();
  const double invN = 1.0 / static_cast<double>(N);
  std::vector<const Vec*> center_of(N);
  for (std::size_t i = 0; i < N; ++i) center_of[i] = &bank.at(batch.labels[i]);

  Matrix grads(N, batch.dim());
#pragma omp parallel for schedule(static)
  for (std::size_t j = 0; j < N; ++j) {
    Row g = grads.row(j);
    std::copy(anchor_grad.row(j).begin(), anchor_grad.row(j).end(), g.begin());
    for (std::size_t i = 0; i < N; ++i) {
      const double p = prob(i, j);
      if (p != 0.0) axpy(p * invN, *center_of[i], g);
      if (use_extra && extra_target[i] == j) axpy(1.0, extra.row(i), g);
    }
  }
  return grads;
}

void require_finite(const Matrix& grads) {
  if (!all_finite(grads.flat())) throw Error(ErrorCode::NonFiniteGradient, "non-finite gradient component");
}

GradientBundle fixed_margin_backward(const EmbeddingBatch& batch, const CenterBank& bank, double lambda,
                                     int m_angle) {
  GradientBundle out;
  out.loss = fixed_margin_loss(batch, bank, lambda, m_angle);
  const std::size_t N = batch.size();
  const double invN = 1.0 / static_cast<double>(N);
  Matrix anchor_grad(N, batch.dim());
  Matrix prob(N, N);
  out.p_pos.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    const Vec& c = bank.at(batch.labels[i]);
    ConstRow x = batch.x.row(i);
    const double r = norm(x), nc = norm(c);
    const double theta = angle_between(x, c);
    const int k = psi_branch(theta, m_angle);
    const double sgn = (k % 2 == 0) ? 1.0 : -1.0;
    const double psi_val = psi(theta, m_angle);
    const double dpsi = -sgn * m_angle * std::sin(m_angle * theta);

    const auto negs = negatives_of(batch, batch.labels[i]);
    std::vector<double> z(negs.size());
    for (std::size_t t = 0; t < negs.size(); ++t) z[t] = dot(batch.x.row(negs[t]), c);
    const SoftmaxRow row = softmax_row(r * nc * psi_val, z);
    out.p_pos[i] = row.p_pos;
    for (std::size_t t = 0; t < negs.size(); ++t) prob(i, negs[t]) = row.p_neg[t];

    Row g = anchor_grad.row(i);
    const double coef = (row.p_pos - 1.0) * invN;
    axpy(coef * nc * psi_val / r, x, g);
    axpy(coef * r * nc * dpsi, angle_gradient(x, c), g);
    axpy(lambda * invN, x, g);
  }
  out.grads = accumulate_center_softmax(batch, bank, anchor_grad, prob, Matrix{}, {}, false);
  require_finite(out.grads);
  return out;
}

GradientBundle npair_backward(const EmbeddingBatch& batch, double lambda) {
  GradientBundle out;
  out.loss = npair_loss(batch, lambda);
  const std::size_t N = batch.size();
  const double invN = 1.0 / static_cast<double>(N);
  std::vector<std::size_t> partner(N);
  std::map<ClassId, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < N; ++i) members[batch.labels[i]].push_back(i);
  for (const auto& [y, rows] : members)
    for (std::size_t t = 0; t + 1 < rows.size(); t += 2) {
      partner[rows[t]] = rows[t + 1];
      partner[rows[t + 1]] = rows[t];
    }

  out.grads = Matrix(N, batch.dim());
  out.p_pos.resize(N);
  for (std::size_t i = 0; i < N; ++i) axpy(lambda * invN, batch.x.row(i), out.grads.row(i));
  for (std::size_t i = 0; i < N; ++i) {
    const std::size_t a = partner[i];
    ConstRow anchor = batch.x.row(a);
    const auto negs = negatives_of(batch, batch.labels[i]);
    std::vector<double> z(negs.size());
    for (std::size_t t = 0; t < negs.size(); ++t) z[t] = dot(batch.x.row(negs[t]), anchor);
    const SoftmaxRow row = softmax_row(dot(batch.x.row(i), anchor), z);
    out.p_pos[i] = row.p_pos;
    const double coef = (row.p_pos - 1.0) * invN;
    axpy(coef, anchor, out.grads.row(i));
    axpy(coef, batch.x.row(i), out.grads.row(a));
    for (std::size_t t = 0; t < negs.size(); ++t) {
      axpy(row.p_neg[t] * invN, batch.x.row(negs[t]), out.grads.row(a));
      axpy(row.p_neg[t] * invN, anchor, out.grads.row(negs[t]));
    }
  }
  require_finite(out.grads);
  return out;
}

}  // namespace

Vec angle_gradient(ConstRow a, ConstRow b) {
  const double na = norm(a), nb = norm(b);
  Vec g(a.size(), 0.0);
  if (!(na > kNormEpsilon) || !(nb > kNormEpsilon)) return g;
  const double q = std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
  const double sin_theta = std::sqrt(std::max(0.0, 1.0 - q * q));
  if (sin_theta < 1e-12) return g;
  // d(theta)/da = -(b / (|a||b|) - q a / |a|^2) / sin(theta)
  axpy(-1.0 / (na * nb * sin_theta), b, g);
  axpy(q / (na * na * sin_theta), a, g);
  return g;
}

Vec vpg_dot_gradient(ConstRow x_i, ConstRow center, const VpgContext& ctx, VpgGradientForm form) {
  if (!ctx.active) return Vec(center.begin(), center.end());
  const VpgTerms t = vpg_terms(x_i, center, ctx);
  if (form == VpgGradientForm::published) return published_form(x_i, center, t);

  // Gradient with M frozen.
  Vec g(x_i.size(), 0.0);
  axpy(t.vc / (t.nv * t.r), x_i, g);
  axpy(t.r * (t.M + 1.0) / t.nv, center, g);
  axpy(-t.r * (t.M + 1.0) * t.vc / (t.nv * t.nv * t.nv), t.v, g);

  // Plus d(x_g.c)/dM * dM/dx_i, M = beta r chord(theta_nn - theta_i) / s.
  const double phi = ctx.theta_nn - ctx.theta_i;
  const double chord = unit_chord(phi);
  const double dchord = chord_derivative(phi);
  const double s3 = t.s * t.s * t.s;
  Vec grad_M(x_i.size(), 0.0);
  axpy(ctx.beta * chord / (t.r * t.s), x_i, grad_M);
  axpy(-ctx.beta * t.r * chord / s3, t.u, grad_M);
  axpy(-ctx.beta * t.r / t.s * dchord, angle_gradient(x_i, center), grad_M);
  axpy(dot_dM(t), grad_M, g);
  return g;
}

double vpg_dot_dtheta_nn(ConstRow x_i, ConstRow center, const VpgContext& ctx) {
  if (!ctx.active) return 0.0;
  const VpgTerms t = vpg_terms(x_i, center, ctx);
  return dot_dM(t) * ctx.beta * t.r / t.s * chord_derivative(ctx.theta_nn - ctx.theta_i);
}

GradientBundle almn_backward(const EmbeddingBatch& batch, const CenterBank& bank, const LossConfig& config,
                             VpgGradientForm form) {
  config.validate();
  const AlmnForward fwd = almn_forward(batch, bank, config.beta, config.lambda);
  const std::size_t N = batch.size();
  const double invN = 1.0 / static_cast<double>(N);
  const bool theta_path = config.theta_nn_path && form == VpgGradientForm::exact;

  Matrix anchor_grad(N, batch.dim());
  Matrix extra(N, batch.dim());
  Matrix prob(N, N);
  GradientBundle out;
  out.loss = fwd.loss;
  out.p_pos.resize(N);

#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < N; ++i) {
    const Vec& c = bank.at(batch.labels[i]);
    ConstRow x = batch.x.row(i);
    const VpgContext& ctx = fwd.contexts[i];
    const SoftmaxRow& row = fwd.rows[i];
    out.p_pos[i] = row.p_pos;
    const double coef = (row.p_pos - 1.0) * invN;

    Row g = anchor_grad.row(i);
    axpy(coef, vpg_dot_gradient(x, c, ctx, form), g);
    axpy(config.lambda * invN, x, g);

    std::size_t t = 0;
    for (std::size_t j = 0; j < N; ++j)
      if (batch.labels[j] != batch.labels[i]) prob(i, j) = row.p_neg[t++];

    if (theta_path && ctx.active) {
      const double d_theta = coef * vpg_dot_dtheta_nn(x, c, ctx);
      axpy(d_theta, angle_gradient(batch.x.row(fwd.nearest[i]), c), extra.row(i));
    }
  }

  out.grads = accumulate_center_softmax(batch, bank, anchor_grad, prob, extra, fwd.nearest, theta_path);
  require_finite(out.grads);
  return out;
}

GradientBundle loss_backward(const EmbeddingBatch& batch, const CenterBank& bank, const LossConfig& config) {
  config.validate();
  switch (config.mode) {
    case MarginMode::baseline: {
      LossConfig base = config;
      base.beta = 0.0;
      return almn_backward(batch, bank, base);
    }
    case MarginMode::almn: return almn_backward(batch, bank, config);
    case MarginMode::npair: return npair_backward(batch, config.lambda);
    case MarginMode::fixed_margin: return fixed_margin_backward(batch, bank, config.lambda, config.m_angle);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown margin mode");
}

Vec finite_difference_oracle(const BatchLossFn& loss_fn, const EmbeddingBatch& batch, std::size_t index,
                             double h) {
  if (index >= batch.size()) throw Error(ErrorCode::InvalidArgument, "perturb index out of range");
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "finite-difference step must be positive");
  EmbeddingBatch probe = batch;
  Vec g(batch.dim());
  for (std::size_t k = 0; k < batch.dim(); ++k) {
    const double x0 = batch.x(index, k);
    probe.x(index, k) = x0 + h;
    const double up = loss_fn(probe);
    probe.x(index, k) = x0 - h;
    const double down = loss_fn(probe);
    probe.x(index, k) = x0;
    g[k] = (up - down) / (2.0 * h);
  }
  return g;
}

}  // namespace almn
