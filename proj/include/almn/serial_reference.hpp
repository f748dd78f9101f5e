#ifndef ALMN_SERIAL_REFERENCE_HPP
#define ALMN_SERIAL_REFERENCE_HPP

#include <cstddef>
#include <vector>

#include "almn/batch.hpp"
#include "almn/linalg.hpp"

/// Single-threaded counterparts of almn::kernels, kept for tests and the
/// benchmark. Same signatures and semantics.
namespace almn::serial {

void dense_forward(const Matrix& in, const Matrix& W, const Vec& b, Matrix& out);
void dense_weight_grad(const Matrix& delta, const Matrix& in, Matrix& dW, Vec& db);
void dense_input_grad(const Matrix& delta, const Matrix& W, Matrix& out);
std::vector<std::size_t> first_positive_rank(const Matrix& unit_rows, const std::vector<ClassId>& labels);
double assign_nearest(const Matrix& x, const Matrix& centers, std::vector<std::size_t>& assignment,
                      std::vector<double>& sq_dist);

}  // namespace almn::serial

#endif  // ALMN_SERIAL_REFERENCE_HPP
