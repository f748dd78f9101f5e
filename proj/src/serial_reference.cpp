#include "almn/serial_reference.hpp"

#include <limits>

#include "almn/error.hpp"

namespace almn::serial {

void dense_forward(const Matrix& in, const Matrix& W, const Vec& b, Matrix& out) {
  if (in.cols() != W.cols() || b.size() != W.rows())
    throw Error(ErrorCode::DimensionMismatch, "dense_forward shapes");
  out = Matrix(in.rows(), W.rows());
  for (std::size_t r = 0; r < in.rows(); ++r)
    for (std::size_t o = 0; o < W.rows(); ++o) {
      double acc = 0.0;
      for (std::size_t k = 0; k < in.cols(); ++k) acc += in(r, k) * W(o, k);
      out(r, o) = b[o] + acc;
    }
}

void dense_weight_grad(const Matrix& delta, const Matrix& in, Matrix& dW, Vec& db) {
  if (in.rows() != delta.rows()) throw Error(ErrorCode::DimensionMismatch, "dense_weight_grad shapes");
  dW = Matrix(delta.cols(), in.cols());
  db.assign(delta.cols(), 0.0);
  for (std::size_t o = 0; o < delta.cols(); ++o)
    for (std::size_t r = 0; r < delta.rows(); ++r) {
      db[o] += delta(r, o);
      for (std::size_t k = 0; k < in.cols(); ++k) dW(o, k) += delta(r, o) * in(r, k);
    }
}

void dense_input_grad(const Matrix& delta, const Matrix& W, Matrix& out) {
  if (delta.cols() != W.rows()) throw Error(ErrorCode::DimensionMismatch, "dense_input_grad shapes");
  out = Matrix(delta.rows(), W.cols());
  for (std::size_t r = 0; r < delta.rows(); ++r)
    for (std::size_t o = 0; o < W.rows(); ++o)
      for (std::size_t k = 0; k < W.cols(); ++k) out(r, k) += delta(r, o) * W(o, k);
}

std::vector<std::size_t> first_positive_rank(const Matrix& unit_rows, const std::vector<ClassId>& labels) {
  const std::size_t N = unit_rows.rows();
  std::vector<std::size_t> rank(N, N);
  for (std::size_t q = 0; q < N; ++q) {
    double best = -std::numeric_limits<double>::infinity();
    std::size_t best_idx = N;
    for (std::size_t j = 0; j < N; ++j) {
      if (j == q || labels[j] != labels[q]) continue;
      const double s = dot(unit_rows.row(q), unit_rows.row(j));
      if (s > best) {
        best = s;
        best_idx = j;
      }
    }
    if (best_idx == N) continue;
    std::size_t ahead = 0;
    for (std::size_t j = 0; j < N; ++j) {
      if (j == q || labels[j] == labels[q]) continue;
      const double s = dot(unit_rows.row(q), unit_rows.row(j));
      if (s > best || (s == best && j < best_idx)) ++ahead;
    }
    rank[q] = ahead;
  }
  return rank;
}

double assign_nearest(const Matrix& x, const Matrix& centers, std::vector<std::size_t>& assignment,
                      std::vector<double>& sq_dist) {
  assignment.assign(x.rows(), 0);
  sq_dist.assign(x.rows(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < centers.rows(); ++k) {
      double d2 = 0.0;
      for (std::size_t t = 0; t < x.cols(); ++t) {
        const double diff = x(i, t) - centers(k, t);
        d2 += diff * diff;
      }
      if (d2 < best) {
        best = d2;
        assignment[i] = k;
      }
    }
    sq_dist[i] = best;
    total += best;
  }
  return total;
}

}  // namespace almn::serial
