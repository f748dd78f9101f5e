#include "almn/kernels.hpp"

#include <cmath>
#include <limits>

#include "almn/error.hpp"
#include "almn/geometry.hpp"

namespace almn::kernels {

void dense_forward(const Matrix& in, const Matrix& W, const Vec& b, Matrix& out) {
  if (in.cols() != W.cols() || b.size() != W.rows())
    throw Error(ErrorCode::DimensionMismatch, "dense_forward shapes");
  const std::size_t B = in.rows(), O = W.rows();
  out = Matrix(B, O);
#pragma omp parallel for collapse(2) schedule(static)
  for (std::size_t r = 0; r < B; ++r)
    for (std::size_t o = 0; o < O; ++o) out(r, o) = b[o] + dot(in.row(r), W.row(o));
}

void dense_weight_grad(const Matrix& delta, const Matrix& in, Matrix& dW, Vec& db) {
  const std::size_t B = delta.rows(), O = delta.cols(), I = in.cols();
  if (in.rows() != B) throw Error(ErrorCode::DimensionMismatch, "dense_weight_grad shapes");
  dW = Matrix(O, I);
  db.assign(O, 0.0);
#pragma omp parallel for schedule(static)
  for (std::size_t o = 0; o < O; ++o) {
    double bias = 0.0;
    for (std::size_t r = 0; r < B; ++r) {
      const double d = delta(r, o);
      bias += d;
      for (std::size_t k = 0; k < I; ++k) dW(o, k) += d * in(r, k);
    }
    db[o] = bias;
  }
}

void dense_input_grad(const Matrix& delta, const Matrix& W, Matrix& out) {
  const std::size_t B = delta.rows(), O = W.rows(), I = W.cols();
  if (delta.cols() != O) throw Error(ErrorCode::DimensionMismatch, "dense_input_grad shapes");
  out = Matrix(B, I);
#pragma omp parallel for schedule(static)
  for (std::size_t r = 0; r < B; ++r)
    for (std::size_t o = 0; o < O; ++o) axpy(delta(r, o), W.row(o), out.row(r));
}

Matrix normalize_rows(const Matrix& x) {
  Matrix out = x;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double n = norm(x.row(i));
    if (!(n > kNormEpsilon))
      throw Error(ErrorCode::DegenerateVector, "row " + std::to_string(i) + " has (near) zero norm");
    for (double& v : out.row(i)) v /= n;
  }
  return out;
}

std::vector<std::size_t> first_positive_rank(const Matrix& unit_rows, const std::vector<ClassId>& labels) {
  const std::size_t N = unit_rows.rows();
  std::vector<std::size_t> rank(N, N);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::size_t q = 0; q < N; ++q) {
    std::vector<double> sim(N);
    double best = -std::numeric_limits<double>::infinity();
    std::size_t best_idx = N;
    for (std::size_t j = 0; j < N; ++j) {
      if (j == q) continue;
      sim[j] = dot(unit_rows.row(q), unit_rows.row(j));
      if (labels[j] == labels[q] && sim[j] > best) {
        best = sim[j];
        best_idx = j;
      }
    }
    if (best_idx == N) continue;
    std::size_t ahead = 0;
    for (std::size_t j = 0; j < N; ++j) {
      if (j == q || labels[j] == labels[q]) continue;
      if (sim[j] > best || (sim[j] == best && j < best_idx)) ++ahead;
    }
    rank[q] = ahead;
  }
  return rank;
}

double assign_nearest(const Matrix& x, const Matrix& centers, std::vector<std::size_t>& assignment,
                      std::vector<double>& sq_dist) {
  const std::size_t N = x.rows(), K = centers.rows(), D = x.cols();
  assignment.assign(N, 0);
  sq_dist.assign(N, 0.0);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < N; ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t k = 0; k < K; ++k) {
      double d2 = 0.0;
      for (std::size_t t = 0; t < D; ++t) {
        const double diff = x(i, t) - centers(k, t);
        d2 += diff * diff;
      }
      if (d2 < best) {
        best = d2;
        arg = k;
      }
    }
    assignment[i] = arg;
    sq_dist[i] = best;
  }
  double total = 0.0;
  for (double d : sq_dist) total += d;
  return total;
}

}  // namespace almn::kernels
