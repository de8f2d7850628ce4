// Heatmap rendering: scores normalized to [0, 1] by their 99th percentile
// and blended over the grayscale background with a fixed black-red-yellow
// ramp (r = min(2t, 1), g = max(2t - 1, 0), b = 0; blend weight 0.6 t).
#pragma once

#include <vector>

#include "tcd/types.hpp"

namespace tcd {

// Nearest-rank percentile, p in [0, 100].
double percentile(std::vector<double> values, double p);

// RGB overlay of the score map on a single-channel background of the same
// grid. Background values are clamped into [0, 1].
Image render_heatmap(const ScoreMap& score, const Image& background);

}  // namespace tcd
