#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include <nlohmann/json.hpp>

#include "almn/error.hpp"
#include "almn/geometry.hpp"
#include "almn/gradcheck.hpp"
#include "almn/gradients.hpp"
#include "almn/losses.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace almn;
using namespace almn::testing;

namespace {

struct Scene {
  EmbeddingBatch batch;
  CenterBank bank{1, 0.5};
};

Scene clustered_scene(std::mt19937_64& eng, std::size_t m, std::size_t n, std::size_t d, double noise) {
  std::normal_distribution<double> g(0.0, noise);
  std::uniform_real_distribution<double> radius(0.5, 2.0);
  Scene s;
  s.bank = CenterBank(d, 0.5);
  std::vector<Vec> rows;
  std::vector<ClassId> labels;
  for (std::size_t z = 0; z < m; ++z) {
    const Vec mean = scaled(random_unit(eng, d), radius(eng));
    Vec c = mean;
    for (double& v : c) v += g(eng) * 0.3;
    s.bank.set(static_cast<ClassId>(z), c);
    for (std::size_t i = 0; i < n; ++i) {
      Vec x = mean;
      for (double& v : x) v += g(eng);
      rows.push_back(x);
      labels.push_back(static_cast<ClassId>(z));
    }
  }
  s.batch = make_batch(rows, labels);
  return s;
}

Matrix fd_all_rows(const BatchLossFn& fn, const EmbeddingBatch& b, double h = 1e-5) {
  Matrix out(b.size(), b.dim());
  for (std::size_t i = 0; i < b.size(); ++i) {
    const Vec g = finite_difference_oracle(fn, b, i, h);
    std::copy(g.begin(), g.end(), out.row(i).begin());
  }
  return out;
}

// ALMN loss with every anchor's theta_nn pinned to `frozen`.
double frozen_theta_loss(const EmbeddingBatch& b, const CenterBank& bank, double beta, double lambda,
                         const std::vector<double>& frozen) {
  const std::size_t N = b.size();
  double total = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const Vec& c = bank.at(b.labels[i]);
    const Vec xg = generate_virtual_point(b.x.row(i), c, frozen[i], beta).x_g;
    std::vector<double> neg;
    for (std::size_t j = 0; j < N; ++j)
      if (b.labels[j] != b.labels[i]) neg.push_back(dot(b.x.row(j), c));
    total += softmax_row(dot(xg, c), neg).loss;
  }
  double sq = 0.0;
  for (std::size_t i = 0; i < N; ++i) sq += squared_norm(b.x.row(i));
  return total / N + lambda / (2.0 * N) * sq;
}

double max_rel(const Matrix& a, const Matrix& ref) { return max_relative_error(a.flat(), ref.flat()); }

}  // namespace

TEST(FiniteDifference, Examples) {
  const EmbeddingBatch b = make_batch({{3, 4}}, {0});
  const Vec g = finite_difference_oracle([](const EmbeddingBatch& e) { return 0.5 * squared_norm(e.x.row(0)); }, b, 0,
                                         1e-4);
  EXPECT_NEAR(g[0], 3.0, 1e-9);
  EXPECT_NEAR(g[1], 4.0, 1e-9);
  const Vec z = finite_difference_oracle([](const EmbeddingBatch&) { return 7.0; }, b, 0, 1e-5);
  EXPECT_EQ(z, (Vec{0.0, 0.0}));
  EXPECT_THROW(finite_difference_oracle([](const EmbeddingBatch&) { return 0.0; }, b, 1, 1e-5), Error);
  EXPECT_THROW(finite_difference_oracle([](const EmbeddingBatch&) { return 0.0; }, b, 0, 0.0), Error);
}

TEST(VpgGradient, InactiveReducesToCenter) {
  const Vec c{0.3, -0.2, 1.0};
  VpgContext ctx;
  EXPECT_EQ(vpg_dot_gradient(Vec{1, 2, 3}, c, ctx), c);
  EXPECT_EQ(vpg_dot_dtheta_nn(Vec{1, 2, 3}, c, ctx), 0.0);
}

TEST(VpgGradient, MatchesDirectDifferences) {
  std::mt19937_64 eng(41);
  for (int t = 0; t < 50; ++t) {
    const Plane p = random_plane(eng, 8);
    const Vec c = p.point(1.1, 0.0);
    Vec x = p.point(0.9, deg(20 + t));
    axpy(0.05, random_gaussian(eng, 8), x);
    const double theta_nn = angle_between(x, c) + deg(10);
    const double beta = 1.0 + t % 3;
    const VirtualPoint vp = generate_virtual_point(x, c, theta_nn, beta);
    const Vec analytic = vpg_dot_gradient(x, c, vp.ctx);
    Vec numeric(8);
    for (std::size_t k = 0; k < 8; ++k) {
      Vec up = x, dn = x;
      up[k] += 1e-6;
      dn[k] -= 1e-6;
      numeric[k] = (dot(generate_virtual_point(up, c, theta_nn, beta).x_g, c) -
                    dot(generate_virtual_point(dn, c, theta_nn, beta).x_g, c)) /
                   2e-6;
    }
    ASSERT_LT(max_relative_error(analytic, numeric), 1e-5);

    const double dtheta = vpg_dot_dtheta_nn(x, c, vp.ctx);
    const double numeric_theta = (dot(generate_virtual_point(x, c, theta_nn + 1e-6, beta).x_g, c) -
                                  dot(generate_virtual_point(x, c, theta_nn - 1e-6, beta).x_g, c)) /
                                 2e-6;
    ASSERT_NEAR(dtheta, numeric_theta, 1e-6 * std::max(1.0, std::abs(numeric_theta)));
  }
}

TEST(AngleGradient, MatchesDirectDifferences) {
  std::mt19937_64 eng(42);
  for (int t = 0; t < 50; ++t) {
    const Vec a = random_gaussian(eng, 5), b = random_gaussian(eng, 5);
    const Vec g = angle_gradient(a, b);
    for (std::size_t k = 0; k < 5; ++k) {
      Vec up = a, dn = a;
      up[k] += 1e-6;
      dn[k] -= 1e-6;
      ASSERT_NEAR(g[k], (angle_between(up, b) - angle_between(dn, b)) / 2e-6, 1e-6);
    }
  }
  EXPECT_EQ(angle_gradient(Vec{1, 0}, Vec{2, 0}), (Vec{0, 0}));
}

TEST(AlmnBackward, BetaZeroAnchorTerm) {
  const EmbeddingBatch b = make_batch({{1, 0}, {0, 1}}, {0, 1});
  CenterBank bank(2, 0.5);
  bank.set(0, {1, 0});
  bank.set(1, {0, 1});
  LossConfig cfg;
  cfg.beta = 0.0;
  cfg.lambda = 0.0;
  const GradientBundle g = almn_backward(b, bank, cfg);
  const double p = std::exp(1.0) / (std::exp(1.0) + 1.0);
  // Row 0: anchor role (p - 1)/2 c_0 plus negative role (1 - p)/2 c_1.
  EXPECT_NEAR(g.grads(0, 0), (p - 1.0) / 2.0, 1e-15);
  EXPECT_NEAR(g.grads(0, 1), (1.0 - p) / 2.0, 1e-15);
  EXPECT_NEAR(g.p_pos[0], p, 1e-15);
  EXPECT_NEAR(g.loss, 0.31326168751822286, 1e-15);
}

TEST(AlmnBackward, BetaZeroMatchesCenterObjective) {
  std::mt19937_64 eng(43);
  for (int t = 0; t < 50; ++t) {
    Scene s = clustered_scene(eng, 2 + t % 3, 1 + t % 4, 6, 0.7);
    LossConfig cfg;
    cfg.beta = 0.0;
    const GradientBundle g = almn_backward(s.batch, s.bank, cfg);
    const Matrix ref = center_objective_gradient(s.batch, s.bank, cfg.lambda);
    ASSERT_LT(max_abs_diff(g.grads.flat(), ref.flat()), 1e-10);
    ASSERT_NEAR(g.loss, center_npair_loss(s.batch, s.bank, cfg.lambda), 1e-12);
  }
}

TEST(AlmnBackward, WorkedConfigMatchesFiniteDifferences) {
  std::mt19937_64 eng(44);
  const Plane p = random_plane(eng, 8);
  const Plane q = random_plane(eng, 8);
  CenterBank bank(8, 0.5);
  bank.set(0, p.point(1.0, 0.0));
  // Class-1 rows: the nearest sits at 70 deg from c_0.
  const Vec neg0 = p.point(1.3, -deg(70));
  Vec neg1 = q.point(0.8, deg(10));
  axpy(1.0, p.point(-1.5, 0.0), neg1);
  Vec c1 = neg1;
  axpy(0.2, neg0, c1);
  bank.set(1, c1);
  const EmbeddingBatch b = make_batch({p.point(0.9, deg(40)), p.point(1.2, deg(25)), neg0, neg1}, {0, 0, 1, 1});
  const AlmnForward f = almn_forward(b, bank, 2.0, 0.0005);
  ASSERT_NEAR(f.contexts[0].theta_i, deg(40), 1e-12);
  ASSERT_NEAR(f.contexts[0].theta_nn, deg(70), 1e-12);

  LossConfig cfg;
  cfg.beta = 2.0;
  const GradientBundle g = almn_backward(b, bank, cfg);
  const Matrix fd = fd_all_rows([&](const EmbeddingBatch& e) { return almn_loss(e, bank, cfg); }, b);
  EXPECT_LT(max_rel(g.grads, fd), 1e-4);
}

TEST(AlmnBackward, FrozenThetaMatchesFrozenOracle) {
  std::mt19937_64 eng(45);
  int checked = 0;
  while (checked < 30) {
    Scene s = clustered_scene(eng, 3, 2, 6, 0.5);
    LossConfig cfg;
    cfg.beta = 1.0 + checked % 3;
    cfg.theta_nn_path = false;
    const AlmnForward f = almn_forward(s.batch, s.bank, cfg.beta, cfg.lambda);
    bool smooth = true;
    std::vector<double> frozen;
    for (const VpgContext& ctx : f.contexts) {
      frozen.push_back(ctx.theta_nn);
      if (std::abs(ctx.theta_nn - ctx.theta_i) < deg(2) || ctx.theta_i < deg(2)) smooth = false;
    }
    if (!smooth) continue;
    ++checked;
    const GradientBundle g = almn_backward(s.batch, s.bank, cfg);
    const Matrix fd = fd_all_rows(
        [&](const EmbeddingBatch& e) { return frozen_theta_loss(e, s.bank, cfg.beta, cfg.lambda, frozen); },
        s.batch);
    ASSERT_LT(max_rel(g.grads, fd), 1e-4);
  }
}

TEST(AlmnBackward, NegativeRoleIsCollinearWithCenter) {
  std::mt19937_64 eng(46);
  for (int t = 0; t < 30; ++t) {
    Scene s = clustered_scene(eng, 2, 2, 5, 0.5);
    LossConfig cfg;
    cfg.beta = 1.0 + t % 3;
    cfg.theta_nn_path = false;
    const GradientBundle g = almn_backward(s.batch, s.bank, cfg);
    const AlmnForward f = almn_forward(s.batch, s.bank, cfg.beta, cfg.lambda);
    const double N = static_cast<double>(s.batch.size());
    for (std::size_t j = 0; j < s.batch.size(); ++j) {
      const ClassId own = s.batch.labels[j];
      Vec residual(g.grads.row(j).begin(), g.grads.row(j).end());
      axpy(-(g.p_pos[j] - 1.0) / N, vpg_dot_gradient(s.batch.x.row(j), s.bank.at(own), f.contexts[j]), residual);
      axpy(-cfg.lambda / N, s.batch.x.row(j), residual);
      const Vec& other = s.bank.at(1 - own);
      const double along = dot(residual, other) / squared_norm(other);
      ASSERT_GE(along, 0.0);
      Vec off = residual;
      axpy(-along, other, off);
      ASSERT_LT(norm(off), 1e-12);
    }
  }
}

TEST(AlmnBackward, ZeroAtOptimum) {
  // Logit gaps of several thousand saturate every softmax exactly.
  for (double beta : {0.0, 1.0, 3.0}) {
    const EmbeddingBatch b = make_batch({{60, 0}, {60, 0}, {0, 60}, {0, 60}}, {0, 0, 1, 1});
    CenterBank bank(2, 0.5);
    bank.set(0, {60, 0});
    bank.set(1, {0, 60});
    LossConfig cfg;
    cfg.beta = beta;
    cfg.lambda = 0.0;
    const GradientBundle g = almn_backward(b, bank, cfg);
    for (double p : g.p_pos) ASSERT_EQ(p, 1.0);
    for (double v : g.grads.flat()) ASSERT_EQ(v, 0.0);
  }
  const EmbeddingBatch b = make_batch({{60, 1}, {58, -2}, {1, 60}, {-2, 59}}, {0, 0, 1, 1});
  CenterBank bank(2, 0.5);
  bank.set(0, {60, 0});
  bank.set(1, {0, 60});
  LossConfig cfg;
  cfg.lambda = 0.0;
  const GradientBundle g = almn_backward(b, bank, cfg);
  for (double v : g.grads.flat()) ASSERT_EQ(v, 0.0);
}

TEST(AlmnBackward, DescentStep) {
  std::mt19937_64 eng(47);
  for (int t = 0; t < 50; ++t) {
    Scene s = clustered_scene(eng, 3, 2, 6, 0.6);
    for (bool path : {true, false}) {
      LossConfig cfg;
      cfg.beta = t % 4;
      cfg.theta_nn_path = path;
      const GradientBundle g = almn_backward(s.batch, s.bank, cfg);
      EmbeddingBatch moved = s.batch;
      axpy(-1e-4, g.grads.flat(), moved.x.flat());
      ASSERT_LT(almn_loss(moved, s.bank, cfg), g.loss) << "trial " << t << " path " << path;
    }
  }
}

TEST(AlmnBackward, CentersReceiveNoGradient) {
  std::mt19937_64 eng(48);
  Scene s = clustered_scene(eng, 2, 2, 4, 0.5);
  const CenterBank before = s.bank;
  LossConfig cfg;
  cfg.beta = 2.0;
  almn_backward(s.batch, s.bank, cfg);
  EXPECT_EQ(s.bank, before);
}

TEST(OtherModes, BackwardMatchesFiniteDifferences) {
  std::mt19937_64 eng(49);
  for (int t = 0; t < 20; ++t) {
    Scene s = clustered_scene(eng, 3, 2, 5, 0.6);
    for (MarginMode mode : {MarginMode::baseline, MarginMode::npair, MarginMode::fixed_margin}) {
      LossConfig cfg;
      cfg.mode = mode;
      cfg.m_angle = 1 + t % 3;
      const GradientBundle g = loss_backward(s.batch, s.bank, cfg);
      const Matrix fd = fd_all_rows([&](const EmbeddingBatch& e) { return evaluate_loss(e, s.bank, cfg); }, s.batch);
      ASSERT_LT(max_rel(g.grads, fd), 1e-4) << to_string(mode) << " trial " << t;
      ASSERT_NEAR(g.loss, evaluate_loss(s.batch, s.bank, cfg), 1e-12);
    }
  }
}

TEST(GradCheck, CasesHitRequestedAngles) {
  std::mt19937_64 eng(5);
  GradCheckOptions opt;
  for (int t = 0; t < 50; ++t) {
    const GradCheckCase c = make_grad_check_case(eng, opt);
    const AlmnForward f = almn_forward(c.batch, c.centers, c.config.beta, c.config.lambda);
    ASSERT_NEAR(f.contexts[0].theta_i, c.theta_i, 1e-9);
    ASSERT_NEAR(f.contexts[0].theta_nn, c.theta_nn, 1e-9);
    ASSERT_GE(c.theta_i, deg(10) - 1e-12);
    ASSERT_LE(c.theta_i, deg(80) + 1e-12);
    ASSERT_GE(c.theta_nn, c.theta_i + deg(5) - 1e-12);
    ASSERT_LE(c.theta_nn, deg(90) + 1e-12);
    for (std::size_t i = 0; i < c.batch.size(); ++i) {
      const double r = norm(c.batch.x.row(i));
      ASSERT_GE(r, 0.5 - 1e-12);
      ASSERT_LE(r, 2.0 + 1e-12);
    }
  }
}

TEST(GradCheck, DefaultRunPasses) {
  const GradCheckReport r = run_grad_check({});
  EXPECT_TRUE(r.pass());
  EXPECT_EQ(r.trials.size(), 100u);
  EXPECT_LE(r.max_rel_err, 1e-4);
  // The published closed form is far off.
  EXPECT_GT(r.published_max_rel_err, 1e-2);

  const auto j = nlohmann::json::parse(r.to_json());
  for (const char* key : {"pass", "trials", "seed", "dim", "h", "tolerance", "max_rel_err", "mean_rel_err",
                          "published_form_max_rel_err", "failing"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(run_grad_check({}).to_json(), r.to_json());
}

TEST(GradCheck, RelativeErrorDenominator) {
  const Vec a{1.0, 2e-7}, ref{1.0, 1e-7};
  EXPECT_NEAR(max_relative_error(a, ref), 0.1, 1e-12);
  const Vec b{1.1, 0.0};
  EXPECT_NEAR(max_relative_error(b, ref), 0.1, 1e-12);
}
