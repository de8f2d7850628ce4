#include "tcd/io/heatmap.hpp"

#include <algorithm>
#include <cmath>

namespace tcd {

double percentile(std::vector<double> values, double p) {
  require(!values.empty(), "percentile of empty data");
  require(p >= 0.0 && p <= 100.0, "percentile must lie in [0, 100]");
  std::sort(values.begin(), values.end());
  const std::size_t rank = static_cast<std::size_t>(
      std::ceil(p / 100.0 * static_cast<double>(values.size())));
  return values[rank == 0 ? 0 : rank - 1];
}

Image render_heatmap(const ScoreMap& score, const Image& background) {
  require(background.channels == 1, "heatmap background must be single-channel");
  require(score.height == background.height && score.width == background.width,
          "heatmap score and background grids must match");
  const double p99 = percentile(score.data, 99.0);
  const double scale = p99 > 0.0 ? 1.0 / p99 : 0.0;
  Image out(score.height, score.width, 3);
  for (int y = 0; y < score.height; ++y) {
    for (int x = 0; x < score.width; ++x) {
      const double t = std::clamp(score.at(y, x) * scale, 0.0, 1.0);
      const double gray = std::clamp(background.at(0, y, x), 0.0, 1.0);
      const double ramp_r = std::min(2.0 * t, 1.0);
      const double ramp_g = std::max(2.0 * t - 1.0, 0.0);
      const double a = 0.6 * t;
      out.at(0, y, x) = (1.0 - a) * gray + a * ramp_r;
      out.at(1, y, x) = (1.0 - a) * gray + a * ramp_g;
      out.at(2, y, x) = (1.0 - a) * gray;
    }
  }
  return out;
}

}  // namespace tcd
