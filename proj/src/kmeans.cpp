#include "almn/kmeans.hpp"

#include <random>

#include "almn/error.hpp"
#include "almn/kernels.hpp"

namespace almn {

KMeansResult kmeans_lloyd(const Matrix& x, Matrix initial_centers, std::size_t max_iter) {
  const std::size_t N = x.rows(), K = initial_centers.rows(), D = x.cols();
  if (initial_centers.cols() != D) throw Error(ErrorCode::DimensionMismatch, "center width != data width");
  if (K == 0 || N < K) throw Error(ErrorCode::TooFewItems, "k-means needs at least k items");

  KMeansResult res;
  res.centers = std::move(initial_centers);
  std::vector<double> sq;
  res.inertia = kernels::assign_nearest(x, res.centers, res.assignment, sq);

  for (std::size_t it = 0; it < max_iter; ++it) {
    Matrix sums(K, D);
    std::vector<std::size_t> counts(K, 0);
    for (std::size_t i = 0; i < N; ++i) {
      axpy(1.0, x.row(i), sums.row(res.assignment[i]));
      ++counts[res.assignment[i]];
    }
    for (std::size_t k = 0; k < K; ++k) {
      if (counts[k] == 0) {
        // Re-seed from the point farthest from its assigned center.
        std::size_t far = 0;
        for (std::size_t i = 1; i < N; ++i)
          if (sq[i] > sq[far]) far = i;
        std::copy(x.row(far).begin(), x.row(far).end(), res.centers.row(k).begin());
        sq[far] = 0.0;
        continue;
      }
      for (std::size_t t = 0; t < D; ++t) res.centers(k, t) = sums(k, t) / static_cast<double>(counts[k]);
    }
    std::vector<std::size_t> previous = res.assignment;
    res.inertia = kernels::assign_nearest(x, res.centers, res.assignment, sq);
    res.iterations = it + 1;
    if (res.assignment == previous) break;
  }
  return res;
}

Matrix kmeans_plus_plus(const Matrix& x, std::size_t k, std::uint64_t seed) {
  const std::size_t N = x.rows();
  if (k == 0 || N < k) throw Error(ErrorCode::TooFewItems, "k-means++ needs at least k items");
  std::mt19937_64 engine(seed);
  Matrix centers(k, x.cols());
  std::uniform_int_distribution<std::size_t> first(0, N - 1);
  const std::size_t c0 = first(engine);
  std::copy(x.row(c0).begin(), x.row(c0).end(), centers.row(0).begin());

  std::vector<double> d2(N);
  for (std::size_t i = 0; i < N; ++i) d2[i] = squared_norm(difference(x.row(i), centers.row(0)));
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (double d : d2) total += d;
    std::size_t pick = 0;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double target = u(engine);
      for (pick = 0; pick + 1 < N; ++pick) {
        target -= d2[pick];
        if (target < 0.0 && d2[pick] > 0.0) break;
      }
    } else {
      std::uniform_int_distribution<std::size_t> any(0, N - 1);
      pick = any(engine);
    }
    std::copy(x.row(pick).begin(), x.row(pick).end(), centers.row(c).begin());
    for (std::size_t i = 0; i < N; ++i) d2[i] = std::min(d2[i], squared_norm(difference(x.row(i), centers.row(c))));
  }
  return centers;
}

KMeansResult kmeans(const Matrix& x, std::size_t k, std::uint64_t seed, std::size_t restarts, std::size_t max_iter) {
  if (restarts == 0) throw Error(ErrorCode::InvalidArgument, "k-means needs at least one restart");
  std::seed_seq seq{seed};
  std::vector<std::uint64_t> seeds(restarts);
  {
    std::vector<std::uint32_t> raw(2 * restarts);
    seq.generate(raw.begin(), raw.end());
    for (std::size_t r = 0; r < restarts; ++r) seeds[r] = (std::uint64_t{raw[2 * r]} << 32) | raw[2 * r + 1];
  }
  KMeansResult best;
  for (std::size_t r = 0; r < restarts; ++r) {
    KMeansResult run = kmeans_lloyd(x, kmeans_plus_plus(x, k, seeds[r]), max_iter);
    if (r == 0 || run.inertia < best.inertia) best = std::move(run);
  }
  return best;
}

}  // namespace almn
