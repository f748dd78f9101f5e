#ifndef ALMN_METRICS_HPP
#define ALMN_METRICS_HPP

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "almn/batch.hpp"
#include "almn/linalg.hpp"

namespace almn {

/// Recall@K under cosine similarity, self excluded, ties to the lower index.
std::map<std::size_t, double> recall_at_k(const Matrix& embeddings, const std::vector<ClassId>& labels,
                                          const std::vector<std::size_t>& ks);

/// Mutual information normalized by the arithmetic mean of the two entropies.
/// Both partitions trivial (single block each) yields 1.
double normalized_mutual_information(const std::vector<std::size_t>& clusters, const std::vector<ClassId>& labels);

struct PairCounts {
  std::uint64_t true_positive = 0;   // same cluster, same label
  std::uint64_t same_cluster = 0;
  std::uint64_t same_label = 0;
};

PairCounts pair_counts(const std::vector<std::size_t>& clusters, const std::vector<ClassId>& labels);

/// Harmonic mean of pairwise precision and recall: 2TP / (same_cluster + same_label).
double pairwise_f1(const std::vector<std::size_t>& clusters, const std::vector<ClassId>& labels);

struct ClusterScore {
  double nmi = 0.0;
  double f1 = 0.0;
  std::vector<std::size_t> assignment;
};

/// k-means (k-means++ seeding, 20 restarts) on the unit-normalized embeddings,
/// then NMI and pairwise F1 against the labels.
ClusterScore cluster_and_score(const Matrix& embeddings, const std::vector<ClassId>& labels, std::size_t k_clusters,
                               std::uint64_t seed = 0);

struct RetrievalReport {
  std::map<std::size_t, double> recall_at;
  double nmi = 0.0;
  double f1 = 0.0;
  std::size_t num_queries = 0;
  std::size_t k_clusters = 0;

  /// Stable key order: recall@K ascending, then nmi, f1, num_queries, k_clusters.
  std::string to_json() const;
  std::string to_text() const;
};

/// k_clusters == 0 means "number of distinct labels".
RetrievalReport evaluate_embeddings(const Matrix& embeddings, const std::vector<ClassId>& labels,
                                    const std::vector<std::size_t>& ks, std::size_t k_clusters = 0,
                                    std::uint64_t seed = 0);

}  // namespace almn

#endif  // ALMN_METRICS_HPP
