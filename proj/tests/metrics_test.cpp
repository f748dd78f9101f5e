#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "almn/error.hpp"
#include "almn/kmeans.hpp"
#include "almn/metrics.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace almn;
using namespace almn::testing;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidArgument;
}

Vec polar(double degrees) { return {std::cos(deg(degrees)), std::sin(deg(degrees)), 0.0}; }

}  // namespace

TEST(Recall, TwoItems) {
  const Matrix x = Matrix::from_rows({{1, 0}, {0, 1}});
  EXPECT_EQ(recall_at_k(x, {4, 4}, {1}).at(1), 1.0);
  EXPECT_EQ(recall_at_k(x, {4, 5}, {1}).at(1), 0.0);
}

TEST(Recall, FourOfSix) {
  // Classes 0 and 1 interleave on the plane, class 2 sits on the z-axis.
  const Matrix x = Matrix::from_rows({polar(0), polar(40), polar(42), polar(100), {0, 0, 1}, {0.1, 0, 1}});
  const std::vector<ClassId> labels{0, 0, 1, 1, 2, 2};
  EXPECT_DOUBLE_EQ(recall_at_k(x, labels, {1}).at(1), 4.0 / 6.0);
  EXPECT_EQ(exhaustive_recall(x, labels, {1}).at(1), 4.0 / 6.0);
}

TEST(Recall, TiesGoToLowerIndex) {
  // Items 1 and 2 tie for query 0; the lower index wins the single slot.
  const Matrix x = Matrix::from_rows({{1, 0}, {0, 1}, {0, 1}});
  EXPECT_EQ(recall_at_k(x, {0, 1, 0}, {1}).at(1), 0.0);
  EXPECT_DOUBLE_EQ(recall_at_k(x, {0, 0, 1}, {1}).at(1), 1.0 / 3.0);
}

TEST(Recall, Errors) {
  const Matrix x = Matrix::from_rows({{1, 0}, {0, 1}, {1, 1}});
  EXPECT_EQ(code_of([&] { recall_at_k(x, {0, 0, 1}, {3}); }), ErrorCode::KTooLarge);
  EXPECT_EQ(code_of([&] { recall_at_k(x, {0, 0, 1}, {0}); }), ErrorCode::KTooLarge);
  EXPECT_EQ(code_of([&] { recall_at_k(Matrix::from_rows({{1, 0}}), {0}, {1}); }), ErrorCode::TooFewItems);
  EXPECT_EQ(code_of([&] { recall_at_k(x, {0, 1}, {1}); }), ErrorCode::DimensionMismatch);
  const Matrix zero = Matrix::from_rows({{1, 0}, {0, 0}});
  EXPECT_EQ(code_of([&] { recall_at_k(zero, {0, 0}, {1}); }), ErrorCode::DegenerateVector);
}

TEST(RecallProperty, MatchesExhaustiveReference) {
  std::mt19937_64 eng(61);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 4 + (eng() % 47);
    const std::size_t d = 2 + t % 6;
    std::vector<Vec> rows;
    std::vector<ClassId> labels;
    for (std::size_t i = 0; i < n; ++i) {
      rows.push_back(random_gaussian(eng, d));
      labels.push_back(static_cast<ClassId>(eng() % 5));
    }
    const Matrix x = Matrix::from_rows(rows);
    std::vector<std::size_t> ks;
    for (std::size_t k = 1; k < n; k = k * 2 + 1) ks.push_back(k);
    ASSERT_EQ(recall_at_k(x, labels, ks), exhaustive_recall(x, labels, ks)) << "instance " << t;
  }
}

TEST(RecallProperty, MonotoneInK) {
  std::mt19937_64 eng(62);
  for (int t = 0; t < 30; ++t) {
    const EmbeddingBatch b = random_batch(eng, 6, 5, 4);
    std::vector<std::size_t> ks;
    for (std::size_t k = 1; k < b.size(); ++k) ks.push_back(k);
    const auto r = recall_at_k(b.x, b.labels, ks);
    for (std::size_t k = 2; k < b.size(); ++k) ASSERT_LE(r.at(k - 1), r.at(k));
    ASSERT_EQ(r.at(b.size() - 1), 1.0);
  }
}

TEST(RecallProperty, ScaleInvariant) {
  std::mt19937_64 eng(63);
  for (int t = 0; t < 20; ++t) {
    const EmbeddingBatch b = random_batch(eng, 5, 4, 6);
    Matrix scaled_x = b.x;
    for (double& v : scaled_x.flat()) v *= 3.5;
    ASSERT_EQ(recall_at_k(b.x, b.labels, {1, 2, 4, 8}), recall_at_k(scaled_x, b.labels, {1, 2, 4, 8}));
  }
}

TEST(PairwiseF1, MatchesEnumeration) {
  std::mt19937_64 eng(64);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 2 + eng() % 49;
    std::vector<std::size_t> clusters(n);
    std::vector<ClassId> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      clusters[i] = eng() % (1 + t % 6);
      labels[i] = static_cast<ClassId>(eng() % 4);
    }
    ASSERT_EQ(pairwise_f1(clusters, labels), enumerated_f1(clusters, labels)) << "instance " << t;
  }
}

TEST(PairwiseF1, CrossedPartition) {
  const std::vector<std::size_t> clusters{0, 1, 0, 1};
  const std::vector<ClassId> labels{7, 7, 8, 8};
  const PairCounts pc = pair_counts(clusters, labels);
  EXPECT_EQ(pc.true_positive, 0u);
  EXPECT_EQ(pc.same_cluster, 2u);
  EXPECT_EQ(pc.same_label, 2u);
  EXPECT_EQ(pairwise_f1(clusters, labels), 0.0);
}

TEST(Nmi, PerfectUnderRelabeling) {
  const std::vector<ClassId> labels{3, 3, 9, 9, 9, 1};
  EXPECT_EQ(normalized_mutual_information({2, 2, 0, 0, 0, 5}, labels), 1.0);
  EXPECT_EQ(pairwise_f1({2, 2, 0, 0, 0, 5}, labels), 1.0);
}

TEST(Nmi, OneBlockIsZero) {
  EXPECT_EQ(normalized_mutual_information({0, 0, 0, 0, 0}, {1, 2, 1, 3, 2}), 0.0);
}

TEST(Nmi, CrossedPartitionIsZero) {
  EXPECT_NEAR(normalized_mutual_information({0, 1, 0, 1}, {7, 7, 8, 8}), 0.0, 1e-15);
}

TEST(Nmi, BothTrivialIsOne) { EXPECT_EQ(normalized_mutual_information({4, 4, 4}, {0, 0, 0}), 1.0); }

TEST(Nmi, KnownValue) {
  // Contingency {(0,0):2, (1,0):1, (1,1):1}.
  const double hc = std::log(2.0);
  const double hl = -(0.75 * std::log(0.75) + 0.25 * std::log(0.25));
  const double hj = 1.5 * std::log(2.0);
  EXPECT_NEAR(normalized_mutual_information({0, 0, 1, 1}, {0, 0, 0, 1}), 2.0 * (hc + hl - hj) / (hc + hl), 1e-15);
}

TEST(Nmi, Bounds) {
  std::mt19937_64 eng(65);
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = 1 + eng() % 40;
    std::vector<std::size_t> clusters(n);
    std::vector<ClassId> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      clusters[i] = eng() % (1 + eng() % 8);
      labels[i] = static_cast<ClassId>(eng() % (1 + t % 8));
    }
    const double v = normalized_mutual_information(clusters, labels);
    ASSERT_GE(v, 0.0);
    ASSERT_LE(v, 1.0 + 1e-12);
  }
}

TEST(Nmi, Errors) {
  EXPECT_EQ(code_of([] { normalized_mutual_information({}, {}); }), ErrorCode::TooFewItems);
  EXPECT_EQ(code_of([] { normalized_mutual_information({0}, {0, 1}); }), ErrorCode::DimensionMismatch);
}

TEST(KMeans, ScalingDataAndCentersKeepsAssignment) {
  std::mt19937_64 eng(66);
  for (int t = 0; t < 20; ++t) {
    const EmbeddingBatch b = random_batch(eng, 4, 10, 3);
    const Matrix init = kmeans_plus_plus(b.x, 4, 100 + t);
    Matrix sx = b.x, sc = init;
    for (double& v : sx.flat()) v *= 4.0;
    for (double& v : sc.flat()) v *= 4.0;
    ASSERT_EQ(kmeans_lloyd(b.x, init).assignment, kmeans_lloyd(sx, sc).assignment);
  }
}

TEST(KMeans, RecoversSeparatedBlobs) {
  std::mt19937_64 eng(67);
  std::vector<Vec> rows;
  std::vector<ClassId> labels;
  const std::vector<Vec> anchors{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  for (std::size_t z = 0; z < 3; ++z)
    for (int i = 0; i < 15; ++i) {
      Vec v = anchors[z];
      axpy(0.05, random_gaussian(eng, 3), v);
      rows.push_back(v);
      labels.push_back(static_cast<ClassId>(z));
    }
  const ClusterScore s = cluster_and_score(Matrix::from_rows(rows), labels, 3, 1);
  EXPECT_EQ(s.nmi, 1.0);
  EXPECT_EQ(s.f1, 1.0);
  EXPECT_EQ(std::set<std::size_t>(s.assignment.begin(), s.assignment.end()).size(), 3u);
}

TEST(KMeans, Deterministic) {
  std::mt19937_64 eng(68);
  const EmbeddingBatch b = random_batch(eng, 5, 8, 4);
  const KMeansResult a = kmeans(b.x, 5, 9);
  const KMeansResult c = kmeans(b.x, 5, 9);
  EXPECT_EQ(a.assignment, c.assignment);
  EXPECT_EQ(a.inertia, c.inertia);
}

TEST(ClusterScore, Errors) {
  const Matrix x = Matrix::from_rows({{1, 0}, {0, 1}, {1, 1}});
  EXPECT_EQ(code_of([&] { cluster_and_score(x, {0, 1, 2}, 4); }), ErrorCode::TooFewItems);
  EXPECT_EQ(code_of([&] { cluster_and_score(x, {0, 1, 2}, 1); }), ErrorCode::InvalidArgument);
}

TEST(RetrievalReport, JsonKeysInOrder) {
  std::mt19937_64 eng(69);
  const EmbeddingBatch b = random_batch(eng, 4, 5, 3);
  const RetrievalReport r = evaluate_embeddings(b.x, b.labels, {8, 1, 2, 4});
  EXPECT_EQ(r.k_clusters, 4u);
  EXPECT_EQ(r.num_queries, 20u);
  const auto j = nlohmann::ordered_json::parse(r.to_json());
  std::vector<std::string> keys;
  for (const auto& [k, _] : j.items()) keys.push_back(k);
  EXPECT_EQ(keys, (std::vector<std::string>{"recall@1", "recall@2", "recall@4", "recall@8", "nmi", "f1", "num_queries",
                                            "k_clusters"}));
  EXPECT_NE(r.to_text().find("Recall@1"), std::string::npos);
}
