#include "tcd/registration.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tcd/warp.hpp"

namespace tcd {

namespace {

// Adam state for one parameter vector, gradient-ascent orientation.
struct Adam {
  std::vector<double> m, u;
  double lr;
  int t = 0;
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

  Adam(std::size_t size, double learning_rate) : m(size, 0.0), u(size, 0.0), lr(learning_rate) {}

  void step(std::vector<double>& param, const std::vector<double>& grad) {
    ++t;
    const double c1 = 1.0 - std::pow(kBeta1, t);
    const double c2 = 1.0 - std::pow(kBeta2, t);
    for (std::size_t i = 0; i < param.size(); ++i) {
      m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * grad[i];
      u[i] = kBeta2 * u[i] + (1.0 - kBeta2) * grad[i] * grad[i];
      param[i] += lr * (m[i] / c1) / (std::sqrt(u[i] / c2) + kEps);
    }
  }
};

DisplacementField sample_field(const VariationalField& q, const std::vector<double>& eps) {
  DisplacementField phi(q.height, q.width);
  for (std::size_t i = 0; i < phi.data.size(); ++i)
    phi.data[i] = q.mu[i] + std::exp(0.5 * q.log_v[i]) * eps[i];
  return phi;
}

}  // namespace

double elbo_with_samples(const VariationalField& q, const FeatureMap& f_moving,
                         const FeatureMap& f_target, const PriorParams& prior,
                         const NoiseParams& noise,
                         const std::vector<std::vector<double>>& eps,
                         std::vector<double>* grad_mu, std::vector<double>* grad_log_v) {
  require(!eps.empty(), "at least one sample is required");
  require(q.height == f_target.height && q.width == f_target.width,
          "proposal must live on the target grid");
  const NeighborGraph graph(q.height, q.width);
  const int h = q.height, w = q.width;
  const int n = q.pixels();
  const int samples = static_cast<int>(eps.size());
  const double inv_s = 1.0 / samples;

  if (grad_mu) grad_mu->assign(q.mu.size(), 0.0);
  if (grad_log_v) grad_log_v->assign(q.log_v.size(), 0.0);

  std::vector<double> inv_var(noise.log_var.size());
  for (std::size_t c = 0; c < inv_var.size(); ++c) inv_var[c] = std::exp(-noise.log_var[c]);

  double data_term = 0.0;
  Image upstream(h, w, f_moving.channels);
  for (const std::vector<double>& e : eps) {
    const DisplacementField phi = sample_field(q, e);
    const Image warped = warp(f_moving, phi);
    data_term -= inv_s * nll_total(f_target, warped, noise);
    if (!grad_mu && !grad_log_v) continue;
    for (int c = 0; c < f_moving.channels; ++c)
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
          upstream.at(c, y, x) =
              inv_s * (f_target.at(c, y, x) - warped.at(c, y, x)) * inv_var[c];
    const DisplacementField g = warp_gradient(f_moving, phi, upstream);
    if (grad_mu)
      for (std::size_t i = 0; i < g.data.size(); ++i) (*grad_mu)[i] += g.data[i];
    if (grad_log_v)
      for (std::size_t i = 0; i < g.data.size(); ++i)
        (*grad_log_v)[i] += g.data[i] * 0.5 * std::exp(0.5 * q.log_v[i]) * e[i];
  }

  const double kl2 = kl_closed_form(q, prior, graph);

  if (grad_mu || grad_log_v) {
    const double alpha = prior.alpha, beta = prior.beta;
    for (int d = 0; d < kDims; ++d) {
      double mean = 0.0;
      for (int i = 0; i < n; ++i) mean += q.mu[static_cast<std::size_t>(d) * n + i];
      mean /= n;
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          const std::size_t idx = q.index(d, y, x);
          if (grad_mu) {
            double lap = graph.degree(y, x) * q.mu[idx];
            graph.for_each_neighbor(y, x, [&](int ny, int nx) {
              lap -= q.mu[q.index(d, ny, nx)];
            });
            (*grad_mu)[idx] -= alpha * lap + beta * mean / n;
          }
          if (grad_log_v) {
            const double v = std::exp(q.log_v[idx]);
            const double coeff = alpha * graph.degree(y, x) + beta / (static_cast<double>(n) * n);
            (*grad_log_v)[idx] -= 0.5 * (coeff * v - 1.0);
          }
        }
      }
    }
  }
  return data_term - 0.5 * kl2;
}

double elbo(const VariationalField& q, const FeatureMap& f_moving, const FeatureMap& f_target,
            const PriorParams& prior, const NoiseParams& noise, int samples, Rng& rng) {
  require(samples >= 1, "samples must be >= 1");
  std::vector<std::vector<double>> eps(samples, std::vector<double>(q.mu.size()));
  for (auto& e : eps)
    for (double& x : e) x = rng.gaussian();
  return elbo_with_samples(q, f_moving, f_target, prior, noise, eps);
}

RegistrationResult register_pair(const Image& moving, const Image& target,
                                 const FeatureMap& f_moving, const FeatureMap& f_target,
                                 const RegistrationConfig& cfg, PriorParams& prior,
                                 NoiseParams& noise) {
  cfg.validate();
  require(moving.channels == target.channels, "image channel counts must match");
  require(f_moving.height == moving.height && f_moving.width == moving.width,
          "moving features must live on the moving image grid");
  require(f_target.height == target.height && f_target.width == target.width,
          "target features must live on the target image grid");
  require(f_moving.channels == f_target.channels, "feature dimensions must match");
  prior.decay = cfg.decay;
  if (noise.log_var.empty()) noise = NoiseParams(f_moving.channels);
  require(noise.feature_dim() == f_moving.channels,
          "noise parameters must match the feature dimension");

  // Feature pyramids, finest first. Levels stop once a grid gets too small
  // for a useful neighborhood structure.
  std::vector<FeatureMap> pyr_moving{f_moving}, pyr_target{f_target};
  for (int l = 1; l < cfg.pyramid_levels; ++l) {
    const FeatureMap& prev = pyr_target.back();
    if (std::min(prev.height, prev.width) < 8) break;
    pyr_target.push_back(downsample2(prev));
    pyr_moving.push_back(downsample2(pyr_moving.back()));
  }
  const int levels = static_cast<int>(pyr_target.size());

  Rng rng(cfg.seed);
  RegistrationResult result;
  VariationalField q(pyr_target.back().height, pyr_target.back().width, cfg.init_log_v);

  for (int level = levels - 1; level >= 0; --level) {
    const FeatureMap& fm = pyr_moving[level];
    const FeatureMap& ft = pyr_target[level];
    if (q.height != ft.height || q.width != ft.width) q = upsample_field(q, ft.height, ft.width);
    const NeighborGraph graph(ft.height, ft.width);

    Adam adam_mu(q.mu.size(), cfg.learning_rate_mu);
    Adam adam_lv(q.log_v.size(), cfg.learning_rate_logv);
    result.level_offsets.push_back(result.elbo_trace.size());

    std::vector<std::vector<double>> eps(cfg.samples_per_step,
                                         std::vector<double>(q.mu.size()));
    std::vector<double> grad_mu, grad_lv;
    const double lv_floor = std::log(cfg.min_noise_var);
    for (int iter = 0; iter < cfg.iterations; ++iter) {
      if (iter % cfg.epoch_iters == 0) {
        if (cfg.update_prior) {
          const auto [a, b] = estimate_prior({q}, graph);
          prior.alpha = a;
          prior.beta = b;
          update_running(prior, a, b);
        }
        if (cfg.update_noise_variance) {
          // The variance that maximizes the bound is the expected squared
          // residual under q, so the residual is taken at a sampled field
          // rather than at the mean.
          for (double& x : eps.front()) x = rng.gaussian();
          const Image warped = warp(fm, sample_field(q, eps.front()));
          noise = update_noise({{&ft, &warped}});
          for (double& lv : noise.log_var) lv = std::max(lv, lv_floor);
        }
      }

      for (auto& e : eps)
        for (double& x : e) x = rng.gaussian();
      const double bound =
          elbo_with_samples(q, fm, ft, prior, noise, eps, &grad_mu, &grad_lv);
      if (!std::isfinite(bound))
        throw NumericError("registration diverged at iteration " + std::to_string(iter) +
                           " of level " + std::to_string(level));
      result.elbo_trace.push_back(bound);
      // Linear step-size decay to a hundredth of the initial rate; the
      // noise-dominated tail of the run would otherwise random-walk mu at a
      // constant step size.
      const double anneal =
          1.0 - 0.99 * static_cast<double>(iter) / std::max(1, cfg.iterations - 1);
      adam_mu.lr = cfg.learning_rate_mu * anneal;
      adam_lv.lr = cfg.learning_rate_logv * anneal;
      adam_mu.step(q.mu, grad_mu);
      adam_lv.step(q.log_v, grad_lv);
    }
  }

  result.q = std::move(q);
  result.prior = prior;
  result.noise = noise;
  return result;
}

std::pair<RegistrationResult, RegistrationResult> register_bidirectional(
    const Image& moving, const Image& target, const FeatureMap& f_moving,
    const FeatureMap& f_target, const RegistrationConfig& cfg, PriorParams& prior,
    NoiseParams& noise) {
  RegistrationResult forward = register_pair(moving, target, f_moving, f_target, cfg, prior, noise);
  RegistrationConfig cfg_rev = cfg;
  cfg_rev.seed = cfg.seed + 1;
  RegistrationResult reverse = register_pair(target, moving, f_target, f_moving, cfg_rev, prior, noise);
  return {std::move(forward), std::move(reverse)};
}

}  // namespace tcd
