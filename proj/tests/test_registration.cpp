#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "tcd/registration.hpp"
#include "tcd/synth.hpp"
#include "tcd/warp.hpp"
#include "test_util.hpp"

using namespace tcd;

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

double mean_abs_mu(const VariationalField& q) {
  double acc = 0.0;
  for (double m : q.mu) acc += std::abs(m);
  return acc / q.mu.size();
}

double residual_energy(const FeatureMap& f_moving, const FeatureMap& f_target,
                       const DisplacementField& field) {
  const Image w = warp(f_moving, field);
  double acc = 0.0;
  for (std::size_t i = 0; i < w.data.size(); ++i) {
    const double r = f_target.data[i] - w.data[i];
    acc += r * r;
  }
  return acc;
}

RegistrationConfig fast_config(std::uint64_t seed) {
  RegistrationConfig cfg;
  cfg.iterations = 80;
  cfg.pyramid_levels = 2;
  cfg.epoch_iters = 20;
  cfg.seed = seed;
  return cfg;
}

// Full-budget configuration for the precision-sensitive cases.
RegistrationConfig precise_config(std::uint64_t seed) {
  RegistrationConfig cfg;
  cfg.pyramid_levels = 2;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("elbo is finite for finite inputs") {
  Rng data_rng(3), rng(4);
  const Image a = testing::random_image(8, 8, 1, data_rng);
  const Image b = testing::random_image(8, 8, 1, data_rng);
  const VariationalField q = testing::random_variational(8, 8, data_rng);
  PriorParams prior;
  NoiseParams noise(1);
  CHECK(std::isfinite(elbo(q, a, b, prior, noise, 3, rng)));
}

TEST_CASE("monte-carlo bound approaches the deterministic value as v shrinks") {
  const Image a = testing::textured_image(16, 16, 21);
  const Image b = testing::textured_image(16, 16, 22);
  VariationalField q(16, 16, -8.0);
  PriorParams prior;
  NoiseParams noise(1);
  Rng rng(5);
  const double stochastic = elbo(q, a, b, prior, noise, 256, rng);
  const std::vector<std::vector<double>> zero_eps(1, std::vector<double>(q.mu.size(), 0.0));
  const double deterministic = elbo_with_samples(q, a, b, prior, noise, zero_eps);
  CHECK(std::abs(stochastic - deterministic) < std::max(1.0, 0.02 * std::abs(deterministic)));
}

TEST_CASE("identical images decompose into the analytic bound") {
  const Image img = testing::textured_image(12, 12, 31);
  VariationalField q(12, 12, -8.0);
  PriorParams prior;
  NoiseParams noise(1);
  const NeighborGraph graph(12, 12);
  const std::vector<std::vector<double>> zero_eps(1, std::vector<double>(q.mu.size(), 0.0));
  const double bound = elbo_with_samples(q, img, img, prior, noise, zero_eps);
  const double expected = -img.pixels() * kHalfLog2Pi - 0.5 * kl_closed_form(q, prior, graph);
  CHECK(bound == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("elbo gradients match central finite differences") {
  Rng rng(7);
  const Image fi = smooth_noise(8, 8, 2.0, 101);
  const Image fj = smooth_noise(8, 8, 2.0, 102);
  VariationalField q(8, 8);
  for (double& m : q.mu) {
    const double mag = rng.uniform(0.1, 0.35);
    m = rng.uniform(0.0, 1.0) < 0.5 ? -mag : mag;
  }
  for (double& lv : q.log_v) lv = rng.uniform(-4.0, -2.0);
  PriorParams prior;
  prior.alpha = 0.8;
  prior.beta = 1.2;
  NoiseParams noise(1);
  noise.log_var[0] = std::log(0.5);

  std::vector<std::vector<double>> eps(2, std::vector<double>(q.mu.size()));
  Rng eps_rng(8);
  for (auto& e : eps)
    for (double& x : e) x = eps_rng.gaussian();

  std::vector<double> grad_mu, grad_lv;
  elbo_with_samples(q, fi, fj, prior, noise, eps, &grad_mu, &grad_lv);

  auto objective_mu = [&]() { return elbo_with_samples(q, fi, fj, prior, noise, eps); };
  double worst_mu = 0.0, worst_lv = 0.0, scale_mu = 0.0, scale_lv = 0.0;
  std::vector<double> fd_mu(q.mu.size()), fd_lv(q.log_v.size());
  for (std::size_t i = 0; i < q.mu.size(); ++i) {
    fd_mu[i] = testing::central_diff(q.mu, i, objective_mu, 1e-5);
    scale_mu = std::max(scale_mu, std::abs(fd_mu[i]));
  }
  for (std::size_t i = 0; i < q.log_v.size(); ++i) {
    fd_lv[i] = testing::central_diff(q.log_v, i, objective_mu, 1e-5);
    scale_lv = std::max(scale_lv, std::abs(fd_lv[i]));
  }
  for (std::size_t i = 0; i < q.mu.size(); ++i)
    worst_mu = std::max(worst_mu, std::abs(grad_mu[i] - fd_mu[i]));
  for (std::size_t i = 0; i < q.log_v.size(); ++i)
    worst_lv = std::max(worst_lv, std::abs(grad_lv[i] - fd_lv[i]));
  CHECK(worst_mu / std::max(1.0, scale_mu) < 1e-3);
  CHECK(worst_lv / std::max(1.0, scale_lv) < 1e-3);
}

TEST_CASE("self-registration stays near the identity") {
  const Image img = testing::textured_image(32, 32, 41);
  PriorParams prior;
  NoiseParams noise;
  const RegistrationResult r = register_pair(img, img, img, img, precise_config(1), prior, noise);
  CHECK(mean_abs_mu(r.q) < 0.1);
}

TEST_CASE("an integer translation is recovered in the interior") {
  const Image base = testing::textured_image(40, 40, 43);
  const Image moving = testing::crop(base, 4, 4, 32, 32);
  const Image target = testing::crop(base, 4, 2, 32, 32);  // target(x) = moving(x - 2)
  PriorParams prior;
  NoiseParams noise;
  const RegistrationResult r =
      register_pair(moving, target, moving, target, precise_config(2), prior, noise);
  double worst = 0.0;
  for (int y = 6; y < 26; ++y)
    for (int x = 6; x < 26; ++x) {
      worst = std::max(worst, std::abs(r.q.mu[r.q.index(0, y, x)] - (-2.0)));
      worst = std::max(worst, std::abs(r.q.mu[r.q.index(1, y, x)]));
    }
  CHECK(worst < 0.25);
}

TEST_CASE("registration halves the residual on smooth deformations") {
  SynthSpec spec;
  spec.size = 48;
  spec.deform_amplitude_px = 2.5;
  spec.blob_count = 0;
  spec.seed = 6;
  const SynthPair pair = generate_pair(spec);
  PriorParams prior;
  NoiseParams noise;
  const RegistrationResult r = register_pair(pair.image_a, pair.image_b, pair.image_a,
                                             pair.image_b, fast_config(3), prior, noise);
  const double before =
      residual_energy(pair.image_a, pair.image_b, DisplacementField(48, 48));
  const double after = residual_energy(pair.image_a, pair.image_b, r.q.mean_field());
  CHECK(after <= 0.5 * before);
}

TEST_CASE("the bound trends upward within the finest level") {
  SynthSpec spec;
  spec.size = 32;
  spec.deform_amplitude_px = 2.0;
  spec.blob_count = 0;
  spec.seed = 9;
  const SynthPair pair = generate_pair(spec);
  PriorParams prior;
  NoiseParams noise;
  const RegistrationResult r = register_pair(pair.image_a, pair.image_b, pair.image_a,
                                             pair.image_b, fast_config(4), prior, noise);
  const std::vector<double> trace = r.finest_trace();
  const std::vector<double> first(trace.begin(), trace.begin() + trace.size() / 2);
  const std::vector<double> second(trace.begin() + trace.size() / 2, trace.end());
  CHECK(median(second) > median(first));

  // The last tenth of the trace must not fall below the tenth before it,
  // beyond sampling noise.
  const std::size_t tenth = std::max<std::size_t>(1, trace.size() / 10);
  const std::vector<double> tail(trace.end() - tenth, trace.end());
  const std::vector<double> before(trace.end() - 2 * tenth, trace.end() - tenth);
  const double med_tail = median(tail), med_before = median(before);
  CHECK(med_tail >= med_before - 0.05 * std::abs(med_before));
}

TEST_CASE("fixed seeds reproduce the trace bitwise") {
  const Image a = testing::textured_image(16, 16, 51);
  const Image b = testing::textured_image(16, 16, 52);
  RegistrationConfig cfg = fast_config(7);
  cfg.iterations = 30;
  PriorParams p1, p2;
  NoiseParams n1, n2;
  const RegistrationResult r1 = register_pair(a, b, a, b, cfg, p1, n1);
  const RegistrationResult r2 = register_pair(a, b, a, b, cfg, p2, n2);
  REQUIRE(r1.elbo_trace.size() == r2.elbo_trace.size());
  for (std::size_t i = 0; i < r1.elbo_trace.size(); ++i)
    CHECK(r1.elbo_trace[i] == r2.elbo_trace[i]);
  CHECK(r1.q.mu == r2.q.mu);
  CHECK(r1.q.log_v == r2.q.log_v);
}

TEST_CASE("unit variance turns the data term into half squared error") {
  const Image fi = testing::textured_image(12, 12, 61);
  const Image fj = testing::textured_image(12, 12, 62);
  Rng rng(13);
  VariationalField q = testing::random_variational(12, 12, rng, 0.5, -3.0, -1.0);
  PriorParams prior;
  NoiseParams unit(1);
  const NeighborGraph graph(12, 12);
  const std::vector<std::vector<double>> zero_eps(1, std::vector<double>(q.mu.size(), 0.0));
  const double bound = elbo_with_samples(q, fi, fj, prior, unit, zero_eps);
  const double data = bound + 0.5 * kl_closed_form(q, prior, graph);
  const double sq = residual_energy(fi, fj, q.mean_field());
  CHECK(data == doctest::Approx(-(fi.pixels() * kHalfLog2Pi + 0.5 * sq)).epsilon(1e-10));
}

TEST_CASE("bidirectional registration is inverse-consistent on translations") {
  const Image base = testing::textured_image(40, 40, 71);
  const Image moving = testing::crop(base, 4, 4, 32, 32);
  const Image target = testing::crop(base, 4, 2, 32, 32);
  PriorParams prior;
  NoiseParams noise;
  RegistrationConfig cfg = precise_config(11);
  cfg.iterations = 500;
  const auto [fwd, rev] =
      register_bidirectional(moving, target, moving, target, cfg, prior, noise);
  double worst = 0.0;
  for (int d = 0; d < 2; ++d)
    for (int y = 6; y < 26; ++y)
      for (int x = 6; x < 26; ++x)
        worst = std::max(worst, std::abs(fwd.q.mu[fwd.q.index(d, y, x)] +
                                         rev.q.mu[rev.q.index(d, y, x)]));
  CHECK(worst < 0.3);
  CHECK(prior.eval_alpha() > 0.0);
  CHECK(prior.eval_beta() > 0.0);
}

TEST_CASE("identical images register to near identity in both directions") {
  const Image img = testing::textured_image(24, 24, 81);
  PriorParams prior;
  NoiseParams noise;
  const auto [fwd, rev] =
      register_bidirectional(img, img, img, img, precise_config(13), prior, noise);
  CHECK(mean_abs_mu(fwd.q) < 0.1);
  CHECK(mean_abs_mu(rev.q) < 0.1);
}

TEST_CASE("divergence raises a numeric error with the iteration index") {
  const Image a = testing::textured_image(16, 16, 91);
  RegistrationConfig cfg = fast_config(17);
  cfg.init_log_v = 800.0;  // exp overflows
  PriorParams prior;
  NoiseParams noise;
  CHECK_THROWS_AS(register_pair(a, a, a, a, cfg, prior, noise), NumericError);
}
