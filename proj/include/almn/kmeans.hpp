#ifndef ALMN_KMEANS_HPP
#define ALMN_KMEANS_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

#include "almn/linalg.hpp"

namespace almn {

struct KMeansResult {
  std::vector<std::size_t> assignment;
  Matrix centers;
  double inertia = 0.0;
  std::size_t iterations = 0;
};

/// Lloyd iterations from the given initial centers until assignments stop
/// changing or `max_iter` is hit. An emptied cluster is re-seeded with the
/// point farthest from its current center.
KMeansResult kmeans_lloyd(const Matrix& x, Matrix initial_centers, std::size_t max_iter = 100);

/// k-means++ seeding.
Matrix kmeans_plus_plus(const Matrix& x, std::size_t k, std::uint64_t seed);

/// Best-inertia result over `restarts` seeded k-means++ runs.
KMeansResult kmeans(const Matrix& x, std::size_t k, std::uint64_t seed, std::size_t restarts = 20,
                    std::size_t max_iter = 100);

}  // namespace almn

#endif  // ALMN_KMEANS_HPP
