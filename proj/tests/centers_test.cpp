#include <gtest/gtest.h>

#include <functional>
#include <random>

#include "almn/centers.hpp"
#include "almn/error.hpp"
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

}  // namespace

TEST(CenterBank, InitializesToBatchMean) {
  CenterBank bank(2, 0.5);
  EXPECT_EQ(bank.get_or_init(3, {Vec{2, 0}, Vec{0, 2}}), (Vec{1, 1}));
  EXPECT_EQ(bank.get_or_init(4, {Vec{5, 1}}), (Vec{5, 1}));
}

TEST(CenterBank, SeenClassIgnoresBatch) {
  CenterBank bank(2, 0.5);
  bank.set(1, {3, 3});
  EXPECT_EQ(bank.get_or_init(1, {Vec{-7, 2}}), (Vec{3, 3}));
}

TEST(CenterBank, Errors) {
  CenterBank bank(2, 0.5);
  EXPECT_EQ(code_of([&] { bank.at(9); }), ErrorCode::UninitializedCenter);
  EXPECT_EQ(code_of([&] { bank.get_or_init(1, {Vec{1, 2, 3}}); }), ErrorCode::DimensionMismatch);
  EXPECT_EQ(code_of([&] { bank.set(1, {1, 2, 3}); }), ErrorCode::DimensionMismatch);
  const EmbeddingBatch batch = make_batch({{1, 0}, {0, 1}}, {0, 1});
  EXPECT_EQ(code_of([&] { bank.update(batch); }), ErrorCode::UninitializedCenter);
}

TEST(CenterBank, WorkedExample) {
  CenterBank bank(2, 1.0);
  bank.set(0, {0, 0});
  bank.set(1, {5, 5});
  bank.update(make_batch({{2, 0}, {0, 2}}, {0, 0}));
  EXPECT_NEAR(bank.at(0)[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(bank.at(0)[1], 2.0 / 3.0, 1e-15);
  EXPECT_EQ(bank.at(1), (Vec{5, 5}));
}

TEST(CenterBank, ZeroAlphaIsNoOp) {
  CenterBank bank(2, 0.0);
  bank.set(0, {1, 2});
  bank.set(1, {3, 4});
  const CenterBank before = bank;
  bank.update(make_batch({{9, 9}, {8, 8}}, {0, 1}));
  EXPECT_EQ(bank, before);
}

TEST(CenterBank, InitMissingCoversOnlyNewClasses) {
  CenterBank bank(2, 0.5);
  bank.set(0, {7, 7});
  bank.init_missing(make_batch({{1, 1}, {3, 1}, {0, 4}, {0, 6}}, {0, 0, 1, 1}));
  EXPECT_EQ(bank.at(0), (Vec{7, 7}));
  EXPECT_EQ(bank.at(1), (Vec{0, 5}));
}

TEST(CenterProperty, MatchesLiteralOracle) {
  std::mt19937_64 eng(21);
  std::uniform_real_distribution<double> alpha(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    const std::size_t d = 2 + t % 7;
    EmbeddingBatch batch = random_batch(eng, 3, 2 + t % 4, d);
    CenterBank bank(d, alpha(eng));
    for (ClassId z = 0; z < 5; ++z) bank.set(z, random_gaussian(eng, d));  // 3 and 4 are absent
    const auto expected = literal_update(bank.centers(), batch, bank.alpha());
    bank.update(batch);
    for (const auto& [z, c] : expected) ASSERT_LT(max_abs_diff(bank.at(z), c), 1e-12) << "class " << z;
  }
}

TEST(CenterProperty, UpdateIsSimultaneous) {
  // A sequential reading would move the center after the first sample.
  CenterBank bank(1, 1.0);
  bank.set(0, {0});
  bank.update(make_batch({{3}, {6}}, {0, 0}));
  EXPECT_NEAR(bank.at(0)[0], 3.0, 1e-15);
}

TEST(CenterProperty, StaysInConvexHull) {
  std::mt19937_64 eng(22);
  std::uniform_real_distribution<double> alpha(1e-3, 1.0);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + t % 5;
    EmbeddingBatch batch = random_batch(eng, 1, n, 3);
    const Vec old = random_gaussian(eng, 3);
    const double a = alpha(eng);
    CenterBank bank(3, a);
    bank.set(0, old);
    bank.update(batch);
    // new = (1 - a n/(1+n)) old + a/(1+n) sum x_i; the weights are
    // non-negative and sum to one.
    Vec rebuilt = scaled(old, 1.0 - a * n / (1.0 + n));
    for (std::size_t i = 0; i < n; ++i) axpy(a / (1.0 + n), batch.x.row(i), rebuilt);
    ASSERT_GE(1.0 - a * n / (1.0 + n), 0.0);
    ASSERT_LT(max_abs_diff(bank.at(0), rebuilt), 1e-12);
  }
}

TEST(CenterProperty, FixedPoint) {
  CenterBank bank(3, 0.7);
  const Vec c{0.25, -1.5, 4.0};
  bank.set(2, c);
  bank.update(make_batch({c, c, c}, {2, 2, 2}));
  EXPECT_EQ(bank.at(2), c);
}
