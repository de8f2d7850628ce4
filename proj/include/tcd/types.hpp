// Pixel-grid containers. All grids are rectangular, row-major within a
// channel and channel-major across channels. Coordinates are (x, y) with
// x the column index and y the row index; displacement component 0 is the
// x offset and component 1 the y offset, both in pixel units.
#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "tcd/errors.hpp"

namespace tcd {

// Number of spatial dimensions of the grid layer.
inline constexpr int kDims = 2;

struct Image {
  int height = 0;
  int width = 0;
  int channels = 1;
  std::vector<double> data;  // size = channels * height * width

  Image() = default;
  Image(int h, int w, int c = 1, double fill = 0.0)
      : height(h), width(w), channels(c),
        data(static_cast<std::size_t>(h) * w * c, fill) {}

  int pixels() const { return height * width; }
  std::size_t index(int c, int y, int x) const {
    return (static_cast<std::size_t>(c) * height + y) * width + x;
  }
  double& at(int c, int y, int x) { return data[index(c, y, x)]; }
  double at(int c, int y, int x) const { return data[index(c, y, x)]; }
};

// Feature maps share the container of images; the channel count is the
// feature dimension F.
using FeatureMap = Image;

struct ScoreMap {
  int height = 0;
  int width = 0;
  std::vector<double> data;  // size = height * width

  ScoreMap() = default;
  ScoreMap(int h, int w, double fill = 0.0)
      : height(h), width(w), data(static_cast<std::size_t>(h) * w, fill) {}

  int pixels() const { return height * width; }
  double& at(int y, int x) { return data[static_cast<std::size_t>(y) * width + x]; }
  double at(int y, int x) const { return data[static_cast<std::size_t>(y) * width + x]; }
};

// Per-pixel displacement vectors, stored dimension-major: plane 0 holds the
// x offsets, plane 1 the y offsets. The field lives on the grid of the image
// it transforms into (domain of J for a J->I field).
struct DisplacementField {
  int height = 0;
  int width = 0;
  std::vector<double> data;  // size = 2 * height * width

  DisplacementField() = default;
  DisplacementField(int h, int w, double fill = 0.0)
      : height(h), width(w), data(static_cast<std::size_t>(2) * h * w, fill) {}

  int pixels() const { return height * width; }
  std::size_t index(int d, int y, int x) const {
    return (static_cast<std::size_t>(d) * height + y) * width + x;
  }
  double& at(int d, int y, int x) { return data[index(d, y, x)]; }
  double at(int d, int y, int x) const { return data[index(d, y, x)]; }
};

// Diagonal-Gaussian proposal over displacements: per pixel and dimension a
// mean mu (pixels) and a log variance log_v. Layout matches
// DisplacementField.
struct VariationalField {
  int height = 0;
  int width = 0;
  std::vector<double> mu;
  std::vector<double> log_v;

  VariationalField() = default;
  VariationalField(int h, int w, double init_log_v = 0.0)
      : height(h), width(w),
        mu(static_cast<std::size_t>(2) * h * w, 0.0),
        log_v(static_cast<std::size_t>(2) * h * w, init_log_v) {}

  int pixels() const { return height * width; }
  std::size_t index(int d, int y, int x) const {
    return (static_cast<std::size_t>(d) * height + y) * width + x;
  }

  DisplacementField mean_field() const {
    DisplacementField f(height, width);
    f.data = mu;
    return f;
  }
};

// Implicit 4-neighborhood graph of a h x w pixel grid. Degrees are 2, 3 or 4;
// the implied graph Laplacian has row sums zero.
struct NeighborGraph {
  int height = 0;
  int width = 0;

  NeighborGraph() = default;
  NeighborGraph(int h, int w) : height(h), width(w) {
    if (h < 2 || w < 2) throw UsageError("neighbor graph requires a grid of at least 2x2");
  }

  int pixels() const { return height * width; }

  int degree(int y, int x) const {
    int d = 0;
    if (y > 0) ++d;
    if (y + 1 < height) ++d;
    if (x > 0) ++d;
    if (x + 1 < width) ++d;
    return d;
  }

  // Calls f(ny, nx) for each 4-neighbor of (y, x).
  template <class F>
  void for_each_neighbor(int y, int x, F&& f) const {
    if (y > 0) f(y - 1, x);
    if (y + 1 < height) f(y + 1, x);
    if (x > 0) f(y, x - 1);
    if (x + 1 < width) f(y, x + 1);
  }
};

inline bool all_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw UsageError(msg);
}

}  // namespace tcd
