// Per-pair variational alignment. A diagonal-Gaussian proposal over the
// displacement field is optimized directly by adaptive gradient ascent on the
// evidence lower bound: a Monte-Carlo feature reconstruction term with
// reparameterized draws minus the divergence from the learnable prior.
// Prior parameters and the noise variance are re-estimated in closed form on
// a fixed epoch schedule, with running averages kept for evaluation.
#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "tcd/noise.hpp"
#include "tcd/prior.hpp"
#include "tcd/rng.hpp"
#include "tcd/types.hpp"

namespace tcd {

struct RegistrationConfig {
  int iterations = 400;  // per pyramid level
  int samples_per_step = 1;
  double learning_rate_mu = 0.05;
  double learning_rate_logv = 0.05;
  int pyramid_levels = 3;
  double init_log_v = 0.0;
  std::uint64_t seed = 0;
  double decay = 0.99;  // running-average decay for the prior
  int epoch_iters = 25;
  bool update_prior = true;
  bool update_noise_variance = true;
  // Lower bound on the re-estimated noise variance inside the optimization
  // loop; a zero-residual pair would otherwise collapse the variance and turn
  // the stochastic data gradient into pure noise.
  double min_noise_var = 1e-4;

  void validate() const {
    require(iterations >= 1, "iterations must be >= 1");
    require(samples_per_step >= 1, "samples_per_step must be >= 1");
    require(pyramid_levels >= 1, "pyramid_levels must be >= 1");
    require(epoch_iters >= 1, "epoch_iters must be >= 1");
    require(decay > 0.0 && decay < 1.0, "decay must lie in (0, 1)");
    require(learning_rate_mu > 0.0 && learning_rate_logv > 0.0,
            "learning rates must be positive");
    require(min_noise_var > 0.0, "min_noise_var must be positive");
  }
};

struct RegistrationResult {
  VariationalField q;  // proposal for the field on the target grid
  std::vector<double> elbo_trace;          // all iterations, coarse to fine
  std::vector<std::size_t> level_offsets;  // start of each level's segment
  PriorParams prior;
  NoiseParams noise;

  // Trace segment of the finest pyramid level.
  std::vector<double> finest_trace() const {
    if (level_offsets.empty()) return elbo_trace;
    return {elbo_trace.begin() + static_cast<std::ptrdiff_t>(level_offsets.back()),
            elbo_trace.end()};
  }
};

// Monte-Carlo evidence lower bound with fresh reparameterized draws.
double elbo(const VariationalField& q, const FeatureMap& f_moving, const FeatureMap& f_target,
            const PriorParams& prior, const NoiseParams& noise, int samples, Rng& rng);

// Same bound for fixed standard-normal draws (samples x 2 h w, matching the
// field layout). When grad_mu / grad_log_v are non-null the analytic
// gradients of the bound are accumulated into them.
double elbo_with_samples(const VariationalField& q, const FeatureMap& f_moving,
                         const FeatureMap& f_target, const PriorParams& prior,
                         const NoiseParams& noise,
                         const std::vector<std::vector<double>>& eps,
                         std::vector<double>* grad_mu = nullptr,
                         std::vector<double>* grad_log_v = nullptr);

// Optimizes the proposal for the field that samples `moving` onto the grid of
// `target` (the J->I field when called with I = moving, J = target). The
// shared prior/noise state is updated in place.
RegistrationResult register_pair(const Image& moving, const Image& target,
                                 const FeatureMap& f_moving, const FeatureMap& f_target,
                                 const RegistrationConfig& cfg, PriorParams& prior,
                                 NoiseParams& noise);

// Runs both directions with the same prior/noise state. Returns
// (target<-moving, moving<-target): first the field on the target grid, then
// the field on the moving grid.
std::pair<RegistrationResult, RegistrationResult> register_bidirectional(
    const Image& moving, const Image& target, const FeatureMap& f_moving,
    const FeatureMap& f_target, const RegistrationConfig& cfg, PriorParams& prior,
    NoiseParams& noise);

}  // namespace tcd
