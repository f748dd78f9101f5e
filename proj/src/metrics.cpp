#include "almn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "almn/error.hpp"
#include "almn/kernels.hpp"
#include "almn/kmeans.hpp"

namespace almn {

std::map<std::size_t, double> recall_at_k(const Matrix& embeddings, const std::vector<ClassId>& labels,
                                          const std::vector<std::size_t>& ks) {
  const std::size_t N = embeddings.rows();
  if (labels.size() != N) throw Error(ErrorCode::DimensionMismatch, "embeddings and labels differ in length");
  if (N < 2) throw Error(ErrorCode::TooFewItems, "recall needs at least two items");
  for (std::size_t k : ks)
    if (k == 0 || k >= N)
      throw Error(ErrorCode::KTooLarge, "K=" + std::to_string(k) + " must be in [1, " + std::to_string(N - 1) + "]");

  const auto rank = kernels::first_positive_rank(kernels::normalize_rows(embeddings), labels);
  std::map<std::size_t, double> out;
  for (std::size_t k : ks) {
    std::size_t hits = 0;
    for (std::size_t r : rank) hits += r < k ? 1 : 0;
    out[k] = static_cast<double>(hits) / static_cast<double>(N);
  }
  return out;
}

namespace {

/// -sum p log p over positive counts, accumulated in sorted order so equal
/// multisets of counts give bitwise-equal entropies.
double entropy(std::vector<std::uint64_t> counts, double total) {
  std::sort(counts.begin(), counts.end());
  double h = 0.0;
  for (std::uint64_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / total;
    h -= p * std::log(p);
  }
  return h;
}

}  // namespace

double normalized_mutual_information(const std::vector<std::size_t>& clusters, const std::vector<ClassId>& labels) {
  if (clusters.size() != labels.size()) throw Error(ErrorCode::DimensionMismatch, "partition sizes differ");
  if (clusters.empty()) throw Error(ErrorCode::TooFewItems, "NMI of an empty partition");
  std::map<std::size_t, std::uint64_t> a;
  std::map<ClassId, std::uint64_t> b;
  std::map<std::pair<std::size_t, ClassId>, std::uint64_t> joint;
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    ++a[clusters[i]];
    ++b[labels[i]];
    ++joint[{clusters[i], labels[i]}];
  }
  auto values = [](const auto& m) {
    std::vector<std::uint64_t> v;
    for (const auto& [_, c] : m) v.push_back(c);
    return v;
  };
  const double total = static_cast<double>(clusters.size());
  const double hc = entropy(values(a), total);
  const double hl = entropy(values(b), total);
  const double hj = entropy(values(joint), total);
  const double denom = hc + hl;
  if (denom <= 0.0) return 1.0;
  const double mi = hc + hl - hj;
  return std::clamp(2.0 * mi / denom, 0.0, 1.0);
}

PairCounts pair_counts(const std::vector<std::size_t>& clusters, const std::vector<ClassId>& labels) {
  if (clusters.size() != labels.size()) throw Error(ErrorCode::DimensionMismatch, "partition sizes differ");
  std::map<std::size_t, std::uint64_t> a;
  std::map<ClassId, std::uint64_t> b;
  std::map<std::pair<std::size_t, ClassId>, std::uint64_t> joint;
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    ++a[clusters[i]];
    ++b[labels[i]];
    ++joint[{clusters[i], labels[i]}];
  }
  auto pairs = [](std::uint64_t n) { return n * (n - 1) / 2; };
  PairCounts pc;
  for (const auto& [_, n] : joint) pc.true_positive += pairs(n);
  for (const auto& [_, n] : a) pc.same_cluster += pairs(n);
  for (const auto& [_, n] : b) pc.same_label += pairs(n);
  return pc;
}

double pairwise_f1(const std::vector<std::size_t>& clusters, const std::vector<ClassId>& labels) {
  const PairCounts pc = pair_counts(clusters, labels);
  const std::uint64_t denom = pc.same_cluster + pc.same_label;
  if (denom == 0) return 1.0;  // both partitions all singletons
  return static_cast<double>(2 * pc.true_positive) / static_cast<double>(denom);
}

ClusterScore cluster_and_score(const Matrix& embeddings, const std::vector<ClassId>& labels, std::size_t k_clusters,
                               std::uint64_t seed) {
  if (labels.size() != embeddings.rows()) throw Error(ErrorCode::DimensionMismatch, "embeddings and labels differ");
  if (k_clusters < 2) throw Error(ErrorCode::InvalidArgument, "k_clusters must be >= 2");
  if (embeddings.rows() < k_clusters)
    throw Error(ErrorCode::TooFewItems, "need at least k_clusters items for clustering");
  const KMeansResult km = kmeans(kernels::normalize_rows(embeddings), k_clusters, seed, 20);
  ClusterScore score;
  score.assignment = km.assignment;
  score.nmi = normalized_mutual_information(km.assignment, labels);
  score.f1 = pairwise_f1(km.assignment, labels);
  return score;
}

std::string RetrievalReport::to_json() const {
  // ordered_json keeps insertion order so reports are byte-stable.
  nlohmann::ordered_json j;
  for (const auto& [k, v] : recall_at) j["recall@" + std::to_string(k)] = v;
  j["nmi"] = nmi;
  j["f1"] = f1;
  j["num_queries"] = num_queries;
  j["k_clusters"] = k_clusters;
  return j.dump(2) + "\n";
}

std::string RetrievalReport::to_text() const {
  std::ostringstream os;
  char buf[96];
  for (const auto& [k, v] : recall_at) {
    std::snprintf(buf, sizeof(buf), "  Recall@%-4zu %8.4f\n", k, v);
    os << buf;
  }
  std::snprintf(buf, sizeof(buf), "  NMI         %8.4f\n  F1          %8.4f\n", nmi, f1);
  os << buf;
  std::snprintf(buf, sizeof(buf), "  queries     %8zu\n  clusters    %8zu\n", num_queries, k_clusters);
  os << buf;
  return os.str();
}

RetrievalReport evaluate_embeddings(const Matrix& embeddings, const std::vector<ClassId>& labels,
                                    const std::vector<std::size_t>& ks, std::size_t k_clusters, std::uint64_t seed) {
  RetrievalReport report;
  report.recall_at = recall_at_k(embeddings, labels, ks);
  report.num_queries = embeddings.rows();
  report.k_clusters = k_clusters != 0 ? k_clusters : std::set<ClassId>(labels.begin(), labels.end()).size();
  const ClusterScore cs = cluster_and_score(embeddings, labels, report.k_clusters, seed);
  report.nmi = cs.nmi;
  report.f1 = cs.f1;
  return report;
}

}  // namespace almn
