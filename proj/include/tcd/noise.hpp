// Feature-space Gaussian reconstruction likelihood with a learned diagonal
// covariance. Identity features reproduce plain squared-error matching;
// externally computed semantic feature maps plug in through the same surface.
#pragma once

#include <vector>

#include "tcd/types.hpp"

namespace tcd {

struct NoiseParams {
  std::vector<double> log_var;  // per feature channel

  NoiseParams() = default;
  explicit NoiseParams(int feature_dim, double init_log_var = 0.0)
      : log_var(feature_dim, init_log_var) {}

  int feature_dim() const { return static_cast<int>(log_var.size()); }
};

enum class FeatureMode { kIdentity, kExternal };

// Identity mode returns the image's own channels as features; external mode
// validates and passes through a precomputed feature map on the same grid.
FeatureMap extract_features(const Image& img, FeatureMode mode,
                            const FeatureMap* external = nullptr);

// Per-pixel negative log likelihood:
//   0.5 * sum_c [ log(2 pi sigma_c^2) + (fJ - fI_warped)_c^2 / sigma_c^2 ].
ScoreMap nll_per_pixel(const FeatureMap& f_target, const FeatureMap& f_warped,
                       const NoiseParams& noise);

double nll_total(const FeatureMap& f_target, const FeatureMap& f_warped,
                 const NoiseParams& noise);

// Closed-form Gaussian maximum-likelihood update of the per-channel variance
// over a batch of residual pairs, floored at 1e-8.
NoiseParams update_noise(const std::vector<std::pair<const FeatureMap*, const FeatureMap*>>& batch);

inline constexpr double kVarianceFloor = 1e-8;

}  // namespace tcd
