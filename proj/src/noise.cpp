#include "tcd/noise.hpp"

#include <cmath>

namespace tcd {

namespace {
constexpr double kLog2Pi = 1.8378770664093454835606594728112;
}

FeatureMap extract_features(const Image& img, FeatureMode mode, const FeatureMap* external) {
  if (mode == FeatureMode::kIdentity) return img;
  require(external != nullptr, "external feature mode requires a feature map");
  require(external->height == img.height && external->width == img.width,
          "feature map grid must match the image grid");
  return *external;
}

ScoreMap nll_per_pixel(const FeatureMap& f_target, const FeatureMap& f_warped,
                       const NoiseParams& noise) {
  require(f_target.height == f_warped.height && f_target.width == f_warped.width &&
              f_target.channels == f_warped.channels,
          "feature maps must share grid and feature dimension");
  require(noise.feature_dim() == f_target.channels,
          "noise parameters must match the feature dimension");
  const int h = f_target.height, w = f_target.width, fdim = f_target.channels;
  ScoreMap out(h, w);
  for (int c = 0; c < fdim; ++c) {
    const double lv = noise.log_var[c];
    const double inv_var = std::exp(-lv);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double r = f_target.at(c, y, x) - f_warped.at(c, y, x);
        out.at(y, x) += 0.5 * (kLog2Pi + lv + r * r * inv_var);
      }
    }
  }
  return out;
}

double nll_total(const FeatureMap& f_target, const FeatureMap& f_warped,
                 const NoiseParams& noise) {
  const ScoreMap per_pixel = nll_per_pixel(f_target, f_warped, noise);
  double acc = 0.0;
  for (double v : per_pixel.data) acc += v;
  return acc;
}

NoiseParams update_noise(const std::vector<std::pair<const FeatureMap*, const FeatureMap*>>& batch) {
  require(!batch.empty(), "update_noise requires a nonempty batch");
  const int fdim = batch.front().first->channels;
  std::vector<double> sum_sq(fdim, 0.0);
  std::vector<std::size_t> count(fdim, 0);
  for (const auto& [target, warped] : batch) {
    require(target->channels == fdim && warped->channels == fdim,
            "residual batch feature dimensions must agree");
    require(target->height == warped->height && target->width == warped->width,
            "residual batch grids must agree");
    for (int c = 0; c < fdim; ++c) {
      for (int y = 0; y < target->height; ++y) {
        for (int x = 0; x < target->width; ++x) {
          const double r = target->at(c, y, x) - warped->at(c, y, x);
          sum_sq[c] += r * r;
          ++count[c];
        }
      }
    }
  }
  NoiseParams noise(fdim);
  for (int c = 0; c < fdim; ++c) {
    const double var = std::max(sum_sq[c] / count[c], kVarianceFloor);
    noise.log_var[c] = std::log(var);
  }
  return noise;
}

}  // namespace tcd
