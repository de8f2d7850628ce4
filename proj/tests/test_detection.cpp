#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "tcd/detection.hpp"
#include "tcd/synth.hpp"
#include "tcd/warp.hpp"
#include "test_util.hpp"

using namespace tcd;

namespace {

RegistrationConfig fast_config(std::uint64_t seed) {
  RegistrationConfig cfg;
  cfg.iterations = 60;
  cfg.pyramid_levels = 2;
  cfg.epoch_iters = 20;
  cfg.seed = seed;
  return cfg;
}

VariationalField constant_proposal(int h, int w, double dx, double dy, double log_v) {
  VariationalField q(h, w, log_v);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      q.mu[q.index(0, y, x)] = dx;
      q.mu[q.index(1, y, x)] = dy;
    }
  return q;
}

double sum(const ScoreMap& m) {
  double acc = 0.0;
  for (double v : m.data) acc += v;
  return acc;
}

}  // namespace

TEST_CASE("per-pixel scores sum to the bound terms that depend on q") {
  Rng rng(3);
  const NeighborGraph graph(6, 7);
  const FeatureMap fi = testing::random_image(6, 7, 2, rng);
  const FeatureMap fj = testing::random_image(6, 7, 2, rng);
  const VariationalField q = testing::random_variational(6, 7, rng);
  PriorParams prior;
  prior.alpha = 1.4;
  prior.beta = 0.6;
  NoiseParams noise(2);
  noise.log_var = {0.2, -0.3};

  const ScoreMap score = score_L(q, fi, fj, prior, noise, graph);
  const double total = sum(score);

  const double nll = nll_total(fj, warp(fi, q.mean_field()), noise);
  const int n = graph.pixels();
  const double constant_terms =
      -(n - 1.0) * kDims * std::log(prior.alpha) - kDims * std::log(prior.beta);
  const double expected = nll + kl_closed_form(q, prior, graph) - constant_terms;
  CHECK(total == doctest::Approx(expected).epsilon(1e-10));
  CHECK(std::abs(total - expected) < 1e-8);
}

TEST_CASE("scores use the running-average prior when available") {
  Rng rng(5);
  const NeighborGraph graph(4, 4);
  const FeatureMap f = testing::random_image(4, 4, 1, rng);
  const VariationalField q = testing::random_variational(4, 4, rng);
  NoiseParams noise(1);
  PriorParams fresh;
  fresh.alpha = 2.0;
  fresh.beta = 2.0;
  PriorParams averaged = fresh;
  update_running(averaged, 0.5, 0.25);
  const ScoreMap with_fresh = score_L(q, f, f, fresh, noise, graph);
  PriorParams direct;
  direct.alpha = 0.5;
  direct.beta = 0.25;
  const ScoreMap with_running = score_L(q, f, f, averaged, noise, graph);
  const ScoreMap reference = score_L(q, f, f, direct, noise, graph);
  CHECK(with_running.data == reference.data);
  CHECK(with_running.data != with_fresh.data);
}

TEST_CASE("inflating one pixel's variance raises only that pixel's score") {
  Rng rng(7);
  const NeighborGraph graph(5, 5);
  const FeatureMap f = testing::random_image(5, 5, 1, rng);
  VariationalField q = testing::random_variational(5, 5, rng, 0.5, -0.5, 0.5);
  PriorParams prior;
  NoiseParams noise(1);

  const int y = 2, x = 3;
  const double coeff = prior.alpha * graph.degree(y, x) +
                       prior.beta / (25.0 * 25.0);
  q.log_v[q.index(0, y, x)] = std::log(1.5 / coeff);  // beyond the minimum 1/coeff
  const ScoreMap mid = score_L(q, f, f, prior, noise, graph);
  q.log_v[q.index(0, y, x)] = std::log(3.0 / coeff);
  const ScoreMap after = score_L(q, f, f, prior, noise, graph);
  CHECK(after.at(y, x) > mid.at(y, x));
  for (int yy = 0; yy < 5; ++yy)
    for (int xx = 0; xx < 5; ++xx)
      if (yy != y || xx != x) CHECK(after.at(yy, xx) == mid.at(yy, xx));
}

TEST_CASE("bidirectional score is shift-equivariant for integer translations") {
  // With exact constant proposals the identity holds exactly on the interior
  // that no clamped sample touches.
  const int h = 12, w = 12, shift = 2;
  const Image base = testing::textured_image(h, w + 8, 17);
  const Image img_i = testing::crop(base, 0, 4, h, w);
  const Image img_j = testing::crop(base, 0, 4 - shift, h, w);  // J(x) = I(x - shift)
  PriorParams prior;
  NoiseParams noise(1);
  const VariationalField q_ji = constant_proposal(h, w, -shift, 0.0, -1.0);
  const VariationalField q_ij = constant_proposal(h, w, shift, 0.0, -1.0);

  const ScoreMap lsym_j = l_sym_from(q_ji, q_ij, img_i, img_j, prior, noise);
  const ScoreMap lsym_i = l_sym_from(q_ij, q_ji, img_j, img_i, prior, noise);
  for (int y = 0; y < h; ++y)
    for (int x = shift; x < w - shift; ++x)
      CHECK(lsym_i.at(y, x) == lsym_j.at(y, x + shift));
}

TEST_CASE("identical images give a near-doubled forward map") {
  const Image img = testing::textured_image(24, 24, 19);
  PriorParams prior;
  NoiseParams noise;
  RegistrationConfig cfg = fast_config(23);
  cfg.update_noise_variance = false;  // keep unit variance so scores stay positive
  const LsymResult r = score_L_sym(img, img, img, img, cfg, prior, noise);
  for (int y = 4; y < 20; ++y)
    for (int x = 4; x < 20; ++x) {
      const double ratio = r.lsym.at(y, x) / (2.0 * r.l_forward.at(y, x));
      CHECK(ratio > 0.9);
      CHECK(ratio < 1.1);
    }
}

TEST_CASE("an inserted disk lights up the bidirectional score") {
  SynthSpec spec;
  spec.size = 48;
  spec.deform_amplitude_px = 2.0;
  spec.blob_radius_px = 5.0;
  spec.blob_count = 1;
  spec.seed = 29;
  const SynthPair pair = generate_pair(spec);
  PriorParams prior;
  NoiseParams noise;
  const LsymResult r = score_L_sym(pair.image_a, pair.image_b, pair.image_a, pair.image_b,
                                   fast_config(31), prior, noise);
  double inside = 0.0, outside = 0.0;
  int n_in = 0, n_out = 0;
  for (int y = 0; y < 48; ++y)
    for (int x = 0; x < 48; ++x) {
      if (pair.mask.at(y, x) > 0.5) {
        inside += r.lsym.at(y, x);
        ++n_in;
      } else {
        outside += r.lsym.at(y, x);
        ++n_out;
      }
    }
  REQUIRE(n_in > 0);
  CHECK(inside / n_in >= 2.0 * (outside / n_out));
}

TEST_CASE("outlier score with a single mocked control reduces to the pair score") {
  Rng rng(37);
  ScoreMap lsym(6, 6);
  for (double& v : lsym.data) v = rng.uniform(0.0, 3.0);
  const ScoreMap zero_inner(6, 6);
  const DisplacementField identity(6, 6);
  const ScoreMap q = q_combine({lsym}, {zero_inner}, {identity});
  CHECK(q.data == lsym.data);
}

TEST_CASE("outlier score is invariant to a shared offset pattern") {
  Rng rng(41);
  std::vector<ScoreMap> lsym(3, ScoreMap(5, 5));
  std::vector<ScoreMap> inner(3, ScoreMap(5, 5));
  std::vector<DisplacementField> fields(3, DisplacementField(5, 5));
  for (auto& m : lsym)
    for (double& v : m.data) v = rng.uniform(0.0, 2.0);
  for (auto& m : inner)
    for (double& v : m.data) v = rng.uniform(0.0, 2.0);
  ScoreMap offset(5, 5);
  for (double& v : offset.data) v = rng.uniform(-1.0, 1.0);

  const ScoreMap base = q_combine(lsym, inner, fields);
  for (int i = 0; i < 3; ++i)
    for (std::size_t p = 0; p < offset.data.size(); ++p) {
      lsym[i].data[p] += offset.data[p];
      inner[i].data[p] += offset.data[p];
    }
  const ScoreMap shifted = q_combine(lsym, inner, fields);
  for (std::size_t p = 0; p < base.data.size(); ++p)
    CHECK(shifted.data[p] == doctest::Approx(base.data[p]).epsilon(1e-12));
}

TEST_CASE("outlier scoring rejects undersized control sets") {
  ControlSet controls;
  controls.members.resize(1);
  controls.members[0].image = Image(8, 8, 1);
  controls.members[0].features = controls.members[0].image;
  PriorParams prior;
  NoiseParams noise;
  const std::vector<ScoreMap> inner(1, ScoreMap(8, 8));
  CHECK_THROWS_AS(score_Q(Image(8, 8, 1), Image(8, 8, 1), controls, inner,
                          fast_config(43), prior, noise),
                  UsageError);
}

TEST_CASE("atlas mean of a degenerate population is flat and lives on the atlas grid") {
  const Image img = testing::textured_image(24, 24, 47);
  ControlSet controls;
  for (int i = 0; i < 2; ++i) {
    ControlSet::Member m;
    m.image = img;
    m.features = img;
    m.id = "c" + std::to_string(i);
    controls.members.push_back(std::move(m));
  }
  PriorParams prior;
  NoiseParams noise;
  RegistrationConfig cfg = fast_config(53);
  cfg.update_noise_variance = false;
  const ScoreMap mean = atlas_mean(controls, img, img, cfg, prior, noise);
  CHECK(mean.height == img.height);
  CHECK(mean.width == img.width);
  double acc = 0.0;
  int count = 0;
  for (int y = 4; y < 20; ++y)
    for (int x = 4; x < 20; ++x) {
      acc += mean.at(y, x);
      ++count;
    }
  const double avg = acc / count;
  double var = 0.0;
  for (int y = 4; y < 20; ++y)
    for (int x = 4; x < 20; ++x) var += (mean.at(y, x) - avg) * (mean.at(y, x) - avg);
  const double cv = std::sqrt(var / count) / std::abs(avg);
  CHECK(cv < 0.5);
}

TEST_CASE("atlas mean is higher where the population varies") {
  // Controls agree outside a square patch and carry independent noise inside.
  const Image base = testing::textured_image(32, 32, 59);
  ControlSet controls;
  Rng rng(61);
  for (int i = 0; i < 3; ++i) {
    Image img = base;
    for (int y = 10; y < 22; ++y)
      for (int x = 10; x < 22; ++x) img.at(0, y, x) = rng.uniform(0.0, 1.0);
    ControlSet::Member m;
    m.image = img;
    m.features = img;
    m.id = "c" + std::to_string(i);
    controls.members.push_back(std::move(m));
  }
  PriorParams prior;
  NoiseParams noise;
  const ScoreMap mean = atlas_mean(controls, base, base, fast_config(67), prior, noise);
  double inside = 0.0, outside = 0.0;
  int n_in = 0, n_out = 0;
  for (int y = 2; y < 30; ++y)
    for (int x = 2; x < 30; ++x) {
      if (y >= 10 && y < 22 && x >= 10 && x < 22) {
        inside += mean.at(y, x);
        ++n_in;
      } else {
        outside += mean.at(y, x);
        ++n_out;
      }
    }
  CHECK(inside / n_in >= 2.0 * (outside / n_out));
}
