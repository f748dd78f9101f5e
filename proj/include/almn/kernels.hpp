#ifndef ALMN_KERNELS_HPP
#define ALMN_KERNELS_HPP

#include <cstddef>
#include <vector>

#include "almn/batch.hpp"
#include "almn/linalg.hpp"

/// Data-parallel inner loops. Every kernel writes each output element from a
/// single thread with a fixed summation order, so results are bit-identical to
/// the serial versions in serial_reference.hpp regardless of thread count.
namespace almn::kernels {

/// out = in * W^T + b   (in: B x I, W: O x I, out: B x O)
void dense_forward(const Matrix& in, const Matrix& W, const Vec& b, Matrix& out);

/// dW = delta^T * in, db = column sums of delta
void dense_weight_grad(const Matrix& delta, const Matrix& in, Matrix& dW, Vec& db);

/// out = delta * W   (delta: B x O, W: O x I, out: B x I)
void dense_input_grad(const Matrix& delta, const Matrix& W, Matrix& out);

/// Rows scaled to unit length. Throws DegenerateVector on a (near) zero row.
Matrix normalize_rows(const Matrix& x);

/// For each query row, the rank (0-based) of its best-ranked same-label item
/// when all other rows are sorted by cosine similarity descending, ties to the
/// lower index. Queries without any same-label item get `rows()`.
std::vector<std::size_t> first_positive_rank(const Matrix& unit_rows, const std::vector<ClassId>& labels);

/// Nearest-center assignment; returns the total squared distance (summed in
/// row order).
double assign_nearest(const Matrix& x, const Matrix& centers, std::vector<std::size_t>& assignment,
                      std::vector<double>& sq_dist);

}  // namespace almn::kernels

#endif  // ALMN_KERNELS_HPP
