#include "almn/losses.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <numbers>

#include "almn/error.hpp"

namespace almn {

std::string_view to_string(MarginMode mode) {
  switch (mode) {
    case MarginMode::baseline: return "baseline";
    case MarginMode::almn: return "almn";
    case MarginMode::npair: return "npair";
    case MarginMode::fixed_margin: return "fixed_margin";
  }
  return "unknown";
}

MarginMode parse_margin_mode(std::string_view text) {
  if (text == "baseline") return MarginMode::baseline;
  if (text == "almn") return MarginMode::almn;
  if (text == "npair") return MarginMode::npair;
  if (text == "fixed_margin") return MarginMode::fixed_margin;
  throw Error(ErrorCode::InvalidArgument, "unknown margin mode '" + std::string(text) + "'");
}

void LossConfig::validate() const {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw Error(ErrorCode::InvalidArgument, "beta must be >= 0");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw Error(ErrorCode::InvalidArgument, "lambda must be >= 0");
  if (m_angle < 1) throw Error(ErrorCode::InvalidArgument, "m_angle must be >= 1");
  if (mode == MarginMode::baseline && beta != 0.0)
    throw Error(ErrorCode::InvalidArgument, "baseline mode requires beta = 0");
}

SoftmaxRow softmax_row(double z_pos, std::span<const double> z_neg) {
  double shift = z_pos;
  for (double z : z_neg) shift = std::max(shift, z);
  const double e_pos = std::exp(z_pos - shift);
  double denom = e_pos;
  SoftmaxRow row;
  row.p_neg.resize(z_neg.size());
  for (std::size_t j = 0; j < z_neg.size(); ++j) {
    row.p_neg[j] = std::exp(z_neg[j] - shift);
    denom += row.p_neg[j];
  }
  row.loss = std::log(denom) - (z_pos - shift);
  row.p_pos = e_pos / denom;
  for (double& p : row.p_neg) p /= denom;
  return row;
}

double l2_regularizer(const Matrix& x, double lambda) {
  if (lambda == 0.0) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) s += squared_norm(x.row(i));
  return lambda / (2.0 * static_cast<double>(x.rows())) * s;
}

namespace {

double sum_in_order(const std::vector<double>& terms) {
  double s = 0.0;
  for (double t : terms) s += t;
  return s;
}

void require_centers(const EmbeddingBatch& batch, const CenterBank& bank) {
  if (batch.dim() != bank.dim()) throw Error(ErrorCode::DimensionMismatch, "batch and center dimensions differ");
  for (ClassId y : batch.labels) (void)bank.at(y);
}

/// Logits x_j . c for every negative j of the given anchor class.
std::vector<double> negative_logits(const EmbeddingBatch& batch, const std::vector<std::size_t>& negatives,
                                    ConstRow center) {
  std::vector<double> z(negatives.size());
  for (std::size_t t = 0; t < negatives.size(); ++t) z[t] = dot(batch.x.row(negatives[t]), center);
  return z;
}

using NegativeIndex = std::map<ClassId, std::vector<std::size_t>>;

NegativeIndex index_negatives(const EmbeddingBatch& batch, const BatchLayout& layout) {
  NegativeIndex idx;
  for (ClassId y : layout.classes) idx[y] = negatives_of(batch, y);
  return idx;
}

}  // namespace

double npair_anchor_term(ConstRow anchor, ConstRow positive, const std::vector<ConstRow>& negatives) {
  std::vector<double> z(negatives.size());
  for (std::size_t j = 0; j < negatives.size(); ++j) z[j] = dot(negatives[j], anchor);
  return softmax_row(dot(positive, anchor), z).loss;
}

double npair_loss(const EmbeddingBatch& batch, double lambda) {
  const BatchLayout layout = require_loss_layout(batch);
  if (layout.n % 2 != 0) throw Error(ErrorCode::OddGroupSize, "npair pairing needs an even group size");
  const std::size_t N = batch.size();

  // partner[i]: the other member of i's consecutive pair within its class
  std::vector<std::size_t> partner(N);
  std::map<ClassId, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < N; ++i) members[batch.labels[i]].push_back(i);
  for (const auto& [y, rows] : members)
    for (std::size_t t = 0; t + 1 < rows.size(); t += 2) {
      partner[rows[t]] = rows[t + 1];
      partner[rows[t + 1]] = rows[t];
    }
  const NegativeIndex neg = index_negatives(batch, layout);

  std::vector<double> terms(N);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < N; ++i) {
    ConstRow anchor = batch.x.row(partner[i]);
    const auto z = negative_logits(batch, neg.at(batch.labels[i]), anchor);
    terms[i] = softmax_row(dot(batch.x.row(i), anchor), z).loss;
  }
  return sum_in_order(terms) / static_cast<double>(N) + l2_regularizer(batch.x, lambda);
}

double center_npair_loss(const EmbeddingBatch& batch, const CenterBank& bank, double lambda) {
  const BatchLayout layout = require_loss_layout(batch);
  require_centers(batch, bank);
  const NegativeIndex neg = index_negatives(batch, layout);
  const std::size_t N = batch.size();
  std::vector<double> terms(N);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < N; ++i) {
    const Vec& c = bank.at(batch.labels[i]);
    const auto z = negative_logits(batch, neg.at(batch.labels[i]), c);
    terms[i] = softmax_row(dot(batch.x.row(i), c), z).loss;
  }
  return sum_in_order(terms) / static_cast<double>(N) + l2_regularizer(batch.x, lambda);
}

AlmnForward almn_forward(const EmbeddingBatch& batch, const CenterBank& bank, double beta, double lambda) {
  const BatchLayout layout = require_loss_layout(batch);
  require_centers(batch, bank);
  const NegativeIndex neg = index_negatives(batch, layout);
  const std::size_t N = batch.size();

  // theta_nn depends only on the anchor's class: its center vs. in-batch negatives.
  std::map<ClassId, std::pair<double, std::size_t>> nearest_by_class;
  for (ClassId y : layout.classes) {
    const auto& rows = neg.at(y);
    std::vector<ConstRow> negs;
    negs.reserve(rows.size());
    for (std::size_t j : rows) negs.push_back(batch.x.row(j));
    const NearestNegative nn = nearest_negative_angle(bank.at(y), negs);
    nearest_by_class[y] = {nn.theta_nn, rows[nn.index]};
  }

  AlmnForward fwd;
  fwd.contexts.resize(N);
  fwd.nearest.resize(N);
  fwd.rows.resize(N);
  fwd.x_g = Matrix(N, batch.dim());
  std::vector<double> terms(N);
  // Geometry errors are rethrown after the parallel region.
  std::vector<std::exception_ptr> failures(N);

#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < N; ++i) {
    try {
      const ClassId y = batch.labels[i];
      const Vec& c = bank.at(y);
      const auto [theta_nn, nn_row] = nearest_by_class.at(y);
      VirtualPoint vp = generate_virtual_point(batch.x.row(i), c, theta_nn, beta);
      std::copy(vp.x_g.begin(), vp.x_g.end(), fwd.x_g.row(i).begin());
      fwd.contexts[i] = vp.ctx;
      fwd.nearest[i] = nn_row;
      const auto z = negative_logits(batch, neg.at(y), c);
      fwd.rows[i] = softmax_row(dot(vp.x_g, c), z);
      terms[i] = fwd.rows[i].loss;
    } catch (...) {
      failures[i] = std::current_exception();
    }
  }
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);

  fwd.loss = sum_in_order(terms) / static_cast<double>(N) + l2_regularizer(batch.x, lambda);
  return fwd;
}

double almn_loss(const EmbeddingBatch& batch, const CenterBank& bank, const LossConfig& config) {
  config.validate();
  return almn_forward(batch, bank, config.beta, config.lambda).loss;
}

int psi_branch(double theta, int m_angle) {
  const int k = static_cast<int>(std::floor(theta * m_angle / std::numbers::pi));
  return std::clamp(k, 0, m_angle - 1);
}

double psi(double theta, int m_angle) {
  if (m_angle < 1) throw Error(ErrorCode::InvalidArgument, "m_angle must be >= 1");
  const int k = psi_branch(theta, m_angle);
  const double sign = (k % 2 == 0) ? 1.0 : -1.0;
  return sign * std::cos(m_angle * theta) - 2.0 * k;
}

double fixed_margin_loss(const EmbeddingBatch& batch, const CenterBank& bank, double lambda, int m_angle) {
  if (m_angle < 1) throw Error(ErrorCode::InvalidArgument, "m_angle must be >= 1");
  const BatchLayout layout = require_loss_layout(batch);
  require_centers(batch, bank);
  const NegativeIndex neg = index_negatives(batch, layout);
  const std::size_t N = batch.size();
  std::vector<double> terms(N);
  std::vector<std::exception_ptr> failures(N);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < N; ++i) {
    try {
      const Vec& c = bank.at(batch.labels[i]);
      ConstRow x = batch.x.row(i);
      const double theta = angle_between(x, c);
      const double z_pos = norm(x) * norm(c) * psi(theta, m_angle);
      const auto z = negative_logits(batch, neg.at(batch.labels[i]), c);
      terms[i] = softmax_row(z_pos, z).loss;
    } catch (...) {
      failures[i] = std::current_exception();
    }
  }
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);
  return sum_in_order(terms) / static_cast<double>(N) + l2_regularizer(batch.x, lambda);
}

double evaluate_loss(const EmbeddingBatch& batch, const CenterBank& bank, const LossConfig& config) {
  config.validate();
  switch (config.mode) {
    case MarginMode::baseline: return center_npair_loss(batch, bank, config.lambda);
    case MarginMode::almn: return almn_loss(batch, bank, config);
    case MarginMode::npair: return npair_loss(batch, config.lambda);
    case MarginMode::fixed_margin: return fixed_margin_loss(batch, bank, config.lambda, config.m_angle);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown margin mode");
}

}  // namespace almn
