#include "tcd/warp.hpp"

#include <algorithm>
#include <cmath>

namespace tcd {

void validate_field(const DisplacementField& field) {
  if (!all_finite(field.data)) throw NumericError("invalid field");
}

namespace {

struct Sample {
  int x0, y0, x1, y1;
  double fx, fy;
  bool open_x, open_y;  // raw position inside [0, size-1): derivative passes
};

inline Sample locate(double raw_x, double raw_y, int w, int h) {
  Sample s;
  s.open_x = raw_x >= 0.0 && raw_x < static_cast<double>(w - 1);
  s.open_y = raw_y >= 0.0 && raw_y < static_cast<double>(h - 1);
  const double sx = std::clamp(raw_x, 0.0, static_cast<double>(w - 1));
  const double sy = std::clamp(raw_y, 0.0, static_cast<double>(h - 1));
  s.x0 = static_cast<int>(std::floor(sx));
  s.y0 = static_cast<int>(std::floor(sy));
  s.x1 = std::min(s.x0 + 1, w - 1);
  s.y1 = std::min(s.y0 + 1, h - 1);
  s.fx = sx - s.x0;
  s.fy = sy - s.y0;
  return s;
}

}  // namespace

Image warp(const Image& img, const DisplacementField& field) {
  validate_field(field);
  const int h = field.height, w = field.width;
  Image out(h, w, img.channels);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Sample s = locate(x + field.at(0, y, x), y + field.at(1, y, x),
                              img.width, img.height);
      for (int c = 0; c < img.channels; ++c) {
        const double v00 = img.at(c, s.y0, s.x0);
        const double v01 = img.at(c, s.y0, s.x1);
        const double v10 = img.at(c, s.y1, s.x0);
        const double v11 = img.at(c, s.y1, s.x1);
        out.at(c, y, x) = (1.0 - s.fy) * ((1.0 - s.fx) * v00 + s.fx * v01) +
                          s.fy * ((1.0 - s.fx) * v10 + s.fx * v11);
      }
    }
  }
  return out;
}

Image warp_nearest(const Image& labels, const DisplacementField& field) {
  validate_field(field);
  const int h = field.height, w = field.width;
  Image out(h, w, labels.channels);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double sx = std::clamp(x + field.at(0, y, x), 0.0, static_cast<double>(labels.width - 1));
      const double sy = std::clamp(y + field.at(1, y, x), 0.0, static_cast<double>(labels.height - 1));
      const int ix = static_cast<int>(std::lround(sx));
      const int iy = static_cast<int>(std::lround(sy));
      for (int c = 0; c < labels.channels; ++c) out.at(c, y, x) = labels.at(c, iy, ix);
    }
  }
  return out;
}

DisplacementField warp_gradient(const Image& img, const DisplacementField& field,
                                const Image& upstream) {
  validate_field(field);
  require(upstream.height == field.height && upstream.width == field.width &&
              upstream.channels == img.channels,
          "upstream adjoint shape must match the warp output");
  const int h = field.height, w = field.width;
  DisplacementField grad(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Sample s = locate(x + field.at(0, y, x), y + field.at(1, y, x),
                              img.width, img.height);
      double gx = 0.0, gy = 0.0;
      for (int c = 0; c < img.channels; ++c) {
        const double v00 = img.at(c, s.y0, s.x0);
        const double v01 = img.at(c, s.y0, s.x1);
        const double v10 = img.at(c, s.y1, s.x0);
        const double v11 = img.at(c, s.y1, s.x1);
        const double u = upstream.at(c, y, x);
        gx += u * ((1.0 - s.fy) * (v01 - v00) + s.fy * (v11 - v10));
        gy += u * ((1.0 - s.fx) * (v10 - v00) + s.fx * (v11 - v01));
      }
      grad.at(0, y, x) = s.open_x ? gx : 0.0;
      grad.at(1, y, x) = s.open_y ? gy : 0.0;
    }
  }
  return grad;
}

ScoreMap compose_scoremap(const ScoreMap& map_on_source, const DisplacementField& field) {
  Image as_img(map_on_source.height, map_on_source.width, 1);
  as_img.data = map_on_source.data;
  const Image pulled = warp(as_img, field);
  ScoreMap out(field.height, field.width);
  out.data = pulled.data;
  return out;
}

ScoreMap jacobian_determinant(const DisplacementField& field) {
  validate_field(field);
  const int h = field.height, w = field.width;
  require(h >= 2 && w >= 2, "jacobian requires a grid of at least 2x2");
  ScoreMap det(h, w);
  auto dx = [&](int d, int y, int x) {
    if (x == 0) return field.at(d, y, 1) - field.at(d, y, 0);
    if (x == w - 1) return field.at(d, y, w - 1) - field.at(d, y, w - 2);
    return 0.5 * (field.at(d, y, x + 1) - field.at(d, y, x - 1));
  };
  auto dy = [&](int d, int y, int x) {
    if (y == 0) return field.at(d, 1, x) - field.at(d, 0, x);
    if (y == h - 1) return field.at(d, h - 1, x) - field.at(d, h - 2, x);
    return 0.5 * (field.at(d, y + 1, x) - field.at(d, y - 1, x));
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double a = 1.0 + dx(0, y, x);  // d(x + phi_x)/dx
      const double b = dy(0, y, x);        // d(x + phi_x)/dy
      const double c = dx(1, y, x);        // d(y + phi_y)/dx
      const double d = 1.0 + dy(1, y, x);  // d(y + phi_y)/dy
      det.at(y, x) = a * d - b * c;
    }
  }
  return det;
}

Image resize_bilinear(const Image& img, int out_h, int out_w) {
  require(out_h >= 1 && out_w >= 1, "resize target must be positive");
  Image out(out_h, out_w, img.channels);
  const double sy = out_h > 1 ? static_cast<double>(img.height - 1) / (out_h - 1) : 0.0;
  const double sx = out_w > 1 ? static_cast<double>(img.width - 1) / (out_w - 1) : 0.0;
  for (int y = 0; y < out_h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      const Sample s = locate(x * sx, y * sy, img.width, img.height);
      for (int c = 0; c < img.channels; ++c) {
        const double v00 = img.at(c, s.y0, s.x0);
        const double v01 = img.at(c, s.y0, s.x1);
        const double v10 = img.at(c, s.y1, s.x0);
        const double v11 = img.at(c, s.y1, s.x1);
        out.at(c, y, x) = (1.0 - s.fy) * ((1.0 - s.fx) * v00 + s.fx * v01) +
                          s.fy * ((1.0 - s.fx) * v10 + s.fx * v11);
      }
    }
  }
  return out;
}

Image downsample2(const Image& img) {
  const int oh = (img.height + 1) / 2;
  const int ow = (img.width + 1) / 2;
  Image out(oh, ow, img.channels);
  for (int c = 0; c < img.channels; ++c) {
    for (int y = 0; y < oh; ++y) {
      for (int x = 0; x < ow; ++x) {
        double acc = 0.0;
        int count = 0;
        for (int yy = 2 * y; yy < std::min(2 * y + 2, img.height); ++yy) {
          for (int xx = 2 * x; xx < std::min(2 * x + 2, img.width); ++xx) {
            acc += img.at(c, yy, xx);
            ++count;
          }
        }
        out.at(c, y, x) = acc / count;
      }
    }
  }
  return out;
}

VariationalField upsample_field(const VariationalField& q, int out_h, int out_w) {
  VariationalField up(out_h, out_w);
  Image mu(q.height, q.width, 2), lv(q.height, q.width, 2);
  mu.data = q.mu;
  lv.data = q.log_v;
  Image mu_up = resize_bilinear(mu, out_h, out_w);
  Image lv_up = resize_bilinear(lv, out_h, out_w);
  const double scale_x = q.width > 1 ? static_cast<double>(out_w - 1) / (q.width - 1) : 1.0;
  const double scale_y = q.height > 1 ? static_cast<double>(out_h - 1) / (q.height - 1) : 1.0;
  for (int y = 0; y < out_h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      up.mu[up.index(0, y, x)] = mu_up.at(0, y, x) * scale_x;
      up.mu[up.index(1, y, x)] = mu_up.at(1, y, x) * scale_y;
      up.log_v[up.index(0, y, x)] = lv_up.at(0, y, x);
      up.log_v[up.index(1, y, x)] = lv_up.at(1, y, x);
    }
  }
  return up;
}

}  // namespace tcd
