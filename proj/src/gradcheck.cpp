#include "almn/gradcheck.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

#include "almn/error.hpp"
#include "almn/geometry.hpp"
#include "almn/gradients.hpp"

namespace almn {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

Vec random_unit(std::mt19937_64& engine, std::size_t dim) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vec v(dim);
  do {
    for (double& e : v) e = g(engine);
  } while (norm(v) < 1e-3);
  for (double& e : v) e /= norm(v);
  return v;
}

/// A vector of length `length` at exactly `angle` from `axis`, in a random plane.
Vec at_angle(std::mt19937_64& engine, ConstRow axis, double angle, double length) {
  const Vec a = scaled(axis, 1.0 / norm(axis));
  Vec perp;
  do {
    perp = random_unit(engine, axis.size());
    axpy(-dot(perp, a), a, perp);
  } while (norm(perp) < 1e-3);
  perp = scaled(perp, 1.0 / norm(perp));
  Vec out(axis.size(), 0.0);
  axpy(length * std::cos(angle), a, out);
  axpy(length * std::sin(angle), perp, out);
  return out;
}

/// Every anchor must be away from the kinks of the forward pass: the chord at
/// theta_nn == theta_i, ties in the nearest-negative argmin, x_i == c and the
/// arccos poles.
bool well_conditioned(const EmbeddingBatch& batch, const CenterBank& centers) {
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Vec& c = centers.at(batch.labels[i]);
    ConstRow x = batch.x.row(i);
    const double theta_i = angle_between(x, c);
    if (theta_i < 2.0 * kDeg || theta_i > 178.0 * kDeg) return false;
    if (norm(difference(x, c)) < 0.05) return false;
    std::vector<double> angles;
    for (std::size_t j : negatives_of(batch, batch.labels[i])) angles.push_back(angle_between(batch.x.row(j), c));
    std::sort(angles.begin(), angles.end());
    if (angles[0] < 2.0 * kDeg || angles[0] > 178.0 * kDeg) return false;
    if (angles.size() > 1 && angles[1] - angles[0] < 1.0 * kDeg) return false;
    if (std::abs(angles[0] - theta_i) < 2.0 * kDeg) return false;
  }
  return true;
}

}  // namespace

GradCheckCase make_grad_check_case(std::mt19937_64& engine, const GradCheckOptions& options) {
  std::uniform_real_distribution<double> norm_dist(0.5, 2.0);
  std::uniform_int_distribution<int> beta_pick(0, 3);
  const std::size_t d = options.dim;
  while (true) {
    GradCheckCase cs;
    cs.theta_i = std::uniform_real_distribution<double>(10.0, 80.0)(engine) * kDeg;
    cs.theta_nn = std::uniform_real_distribution<double>(cs.theta_i / kDeg + 5.0, 90.0)(engine) * kDeg;
    cs.config.mode = MarginMode::almn;
    cs.config.beta = beta_pick(engine);
    cs.config.lambda = options.lambda;

    const Vec c0 = scaled(random_unit(engine, d), norm_dist(engine));
    const Vec x0 = at_angle(engine, c0, cs.theta_i, norm_dist(engine));
    const double theta_b = std::uniform_real_distribution<double>(10.0, 80.0)(engine) * kDeg;
    const Vec x1 = at_angle(engine, c0, std::min(theta_b, cs.theta_nn - 3.0 * kDeg), norm_dist(engine));
    const Vec n0 = at_angle(engine, c0, cs.theta_nn, norm_dist(engine));
    const double extra = std::uniform_real_distribution<double>(5.0, 30.0)(engine) * kDeg;
    const Vec n1 = at_angle(engine, c0, cs.theta_nn + extra, norm_dist(engine));

    Vec mean1 = n0;
    axpy(1.0, n1, mean1);
    if (norm(mean1) < 1e-3) continue;
    const Vec c1 = at_angle(engine, mean1, std::uniform_real_distribution<double>(5.0, 25.0)(engine) * kDeg,
                            norm_dist(engine));

    cs.batch.x = Matrix::from_rows({x0, x1, n0, n1});
    cs.batch.labels = {0, 0, 1, 1};
    cs.centers = CenterBank(d, 0.5);
    cs.centers.set(0, c0);
    cs.centers.set(1, c1);
    if (well_conditioned(cs.batch, cs.centers)) return cs;
  }
}

double max_relative_error(std::span<const double> analytic, std::span<const double> reference) {
  double worst = 0.0;
  for (std::size_t k = 0; k < analytic.size(); ++k)
    worst = std::max(worst, std::abs(analytic[k] - reference[k]) / std::max(std::abs(reference[k]), 1e-6));
  return worst;
}

bool GradCheckReport::pass() const {
  return !trials.empty() && std::all_of(trials.begin(), trials.end(), [](const auto& t) { return t.pass; });
}

GradCheckReport run_grad_check(const GradCheckOptions& options) {
  if (options.trials == 0) throw Error(ErrorCode::InvalidArgument, "grad-check needs at least one trial");
  if (!(options.h >= 1e-7 && options.h <= 1e-3)) throw Error(ErrorCode::InvalidArgument, "h must be in [1e-7, 1e-3]");
  if (options.dim < 2) throw Error(ErrorCode::InvalidArgument, "dimension must be >= 2");
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 engine(options.seed);
  GradCheckReport report;
  report.options = options;
  double sum = 0.0;
  for (std::size_t t = 0; t < options.trials; ++t) {
    const GradCheckCase cs = make_grad_check_case(engine, options);
    const BatchLossFn loss = [&](const EmbeddingBatch& b) { return almn_loss(b, cs.centers, cs.config); };
    const GradientBundle exact = almn_backward(cs.batch, cs.centers, cs.config);
    const GradientBundle published = almn_backward(cs.batch, cs.centers, cs.config, VpgGradientForm::published);

    GradCheckTrial trial{t, cs.config.beta, cs.theta_i, cs.theta_nn, 0.0, 0.0, false};
    for (std::size_t i = 0; i < cs.batch.size(); ++i) {
      const Vec fd = finite_difference_oracle(loss, cs.batch, i, options.h);
      trial.max_rel_err = std::max(trial.max_rel_err, max_relative_error(exact.grads.row(i), fd));
      trial.published_max_rel_err =
          std::max(trial.published_max_rel_err, max_relative_error(published.grads.row(i), fd));
    }
    trial.pass = trial.max_rel_err <= options.tolerance;
    report.max_rel_err = std::max(report.max_rel_err, trial.max_rel_err);
    report.published_max_rel_err = std::max(report.published_max_rel_err, trial.published_max_rel_err);
    sum += trial.max_rel_err;
    report.trials.push_back(trial);
  }
  report.mean_rel_err = sum / static_cast<double>(options.trials);
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::string GradCheckReport::to_json() const {
  nlohmann::ordered_json j;
  j["pass"] = pass();
  j["trials"] = options.trials;
  j["seed"] = options.seed;
  j["dim"] = options.dim;
  j["h"] = options.h;
  j["tolerance"] = options.tolerance;
  j["max_rel_err"] = max_rel_err;
  j["mean_rel_err"] = mean_rel_err;
  j["published_form_max_rel_err"] = published_max_rel_err;
  nlohmann::ordered_json failing = nlohmann::ordered_json::array();
  for (const auto& t : trials)
    if (!t.pass)
      failing.push_back({{"trial", t.index},
                         {"beta", t.beta},
                         {"theta_i_deg", t.theta_i / kDeg},
                         {"theta_nn_deg", t.theta_nn / kDeg},
                         {"max_rel_err", t.max_rel_err}});
  j["failing"] = std::move(failing);
  return j.dump(2) + "\n";
}

}  // namespace almn
