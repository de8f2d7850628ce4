#include "tcd/baselines.hpp"

#include <cmath>
#include <vector>

#include "tcd/warp.hpp"

namespace tcd {

namespace {

// Reflection about the border pixel: index -1 maps to 1, index n to n - 2.
inline int reflect(int i, int n) {
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * n - 2 - i;
  }
  return i;
}

struct Kernels {
  std::vector<double> smooth;  // sums to 1
  std::vector<double> deriv;   // unit ramp response
  int radius;
};

Kernels gaussian_kernels(double sigma) {
  Kernels k;
  k.radius = std::max(1, static_cast<int>(std::ceil(4.0 * sigma)));
  k.smooth.resize(2 * k.radius + 1);
  k.deriv.resize(2 * k.radius + 1);
  double norm = 0.0;
  for (int i = -k.radius; i <= k.radius; ++i) {
    const double g = std::exp(-0.5 * i * i / (sigma * sigma));
    k.smooth[i + k.radius] = g;
    norm += g;
  }
  for (double& v : k.smooth) v /= norm;
  double ramp = 0.0;
  for (int i = -k.radius; i <= k.radius; ++i) {
    k.deriv[i + k.radius] = -(i / (sigma * sigma)) * k.smooth[i + k.radius];
    ramp += -static_cast<double>(i) * k.deriv[i + k.radius];
  }
  for (double& v : k.deriv) v /= ramp;
  return k;
}

// Convolution along one axis (kernel flipped), reflected borders.
ScoreMap convolve_axis(const ScoreMap& in, const std::vector<double>& kernel, int radius,
                       bool along_x) {
  ScoreMap out(in.height, in.width);
  for (int y = 0; y < in.height; ++y) {
    for (int x = 0; x < in.width; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const int sx = along_x ? reflect(x - i, in.width) : x;
        const int sy = along_x ? y : reflect(y - i, in.height);
        acc += in.at(sy, sx) * kernel[i + radius];
      }
      out.at(y, x) = acc;
    }
  }
  return out;
}

}  // namespace

ScoreMap gaussian_gradient_magnitude(const Image& img, double sigma) {
  require(img.channels == 1, "gradient magnitude expects a single-channel image");
  if (!(sigma > 0.0)) throw UsageError("sigma must be positive");
  const Kernels k = gaussian_kernels(sigma);
  ScoreMap plane(img.height, img.width);
  plane.data = img.data;
  const ScoreMap gx = convolve_axis(convolve_axis(plane, k.deriv, k.radius, true),
                                    k.smooth, k.radius, false);
  const ScoreMap gy = convolve_axis(convolve_axis(plane, k.smooth, k.radius, true),
                                    k.deriv, k.radius, false);
  ScoreMap mag(img.height, img.width);
  for (std::size_t i = 0; i < mag.data.size(); ++i)
    mag.data[i] = std::hypot(gx.data[i], gy.data[i]);
  return mag;
}

ScoreMap score_li_wyatt(const Image& moving, const Image& target,
                        const DisplacementField& field, double sigma, double K) {
  require(moving.channels == 1 && target.channels == 1,
          "intensity/gradient score expects single-channel images");
  if (!(sigma > 0.0)) throw UsageError("sigma must be positive");
  const Image warped = warp(moving, field);
  require(warped.height == target.height && warped.width == target.width,
          "field grid must match the target grid");
  const ScoreMap grad = gaussian_gradient_magnitude(warped, sigma);
  ScoreMap out(target.height, target.width);
  for (int y = 0; y < target.height; ++y) {
    for (int x = 0; x < target.width; ++x) {
      const double r = target.at(0, y, x) - warped.at(0, y, x);
      const double g = grad.at(y, x);
      out.at(y, x) = r * r / (1.0 + K * g * g);
    }
  }
  return out;
}

ScoreMap score_jacdet(const DisplacementField& field) {
  ScoreMap det = jacobian_determinant(field);
  for (double& v : det.data) {
    const double l = std::log(std::max(std::abs(v), 1e-6));
    v = l * l;
  }
  return det;
}

}  // namespace tcd
