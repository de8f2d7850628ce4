#include "tcd/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "tcd/rng.hpp"
#include "tcd/warp.hpp"

namespace tcd {

namespace {

constexpr std::uint64_t kStreamDeform = 0x9E3779B97F4A7C15ull;
constexpr std::uint64_t kStreamBlob = 0xC2B2AE3D27D4EB4Full;
constexpr std::uint64_t kStreamItem = 0x165667B19E3779F9ull;

Image texture_base(const SynthSpec& spec) {
  // Piecewise regions from a coarse smooth field, plus fine band-limited
  // noise so that identity features carry signal.
  const int s = spec.size;
  const Image regions = smooth_noise(s, s, std::max(8.0, s / 4.0), spec.seed);
  std::vector<double> sorted = regions.data;
  std::sort(sorted.begin(), sorted.end());
  const double t1 = sorted[sorted.size() / 3];
  const double t2 = sorted[2 * sorted.size() / 3];
  const Image noise = smooth_noise(s, s, spec.texture_corr_px, spec.seed ^ 0xA5A5A5A5ull);
  Image img(s, s, 1);
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    const double r = regions.data[i];
    const double base = r < t1 ? 0.25 : (r < t2 ? 0.5 : 0.75);
    img.data[i] = base + 0.5 * spec.texture_contrast * noise.data[i];
  }
  return img;
}

DisplacementField smooth_deformation(const SynthSpec& spec, std::uint64_t seed) {
  const int s = spec.size;
  DisplacementField field(s, s);
  for (int d = 0; d < kDims; ++d) {
    const Image plane = smooth_noise(s, s, spec.deform_smoothness_px,
                                     seed + static_cast<std::uint64_t>(d) * 77);
    for (int y = 0; y < s; ++y)
      for (int x = 0; x < s; ++x)
        field.at(d, y, x) = spec.deform_amplitude_px * plane.at(0, y, x);
  }
  return field;
}

void add_blobs(const SynthSpec& spec, std::uint64_t seed, Image& img, ScoreMap& mask) {
  Rng rng(seed);
  const double margin = spec.blob_radius_px + spec.deform_amplitude_px + 3.0;
  for (int b = 0; b < spec.blob_count; ++b) {
    const double cx = rng.uniform(margin, spec.size - 1 - margin);
    const double cy = rng.uniform(margin, spec.size - 1 - margin);
    const double sign = (b % 2 == 0) ? 1.0 : -1.0;
    const double r2 = spec.blob_radius_px * spec.blob_radius_px;
    for (int y = 0; y < spec.size; ++y) {
      for (int x = 0; x < spec.size; ++x) {
        const double dx = x - cx, dy = y - cy;
        if (dx * dx + dy * dy <= r2) {
          img.at(0, y, x) += sign * spec.blob_delta;
          mask.at(y, x) = 1.0;
        }
      }
    }
  }
}

}  // namespace

Image smooth_noise(int height, int width, double spacing_px, std::uint64_t seed) {
  require(spacing_px >= 1.0, "node spacing must be at least 1 px");
  const int ch = std::max(2, static_cast<int>(std::ceil(height / spacing_px)) + 1);
  const int cw = std::max(2, static_cast<int>(std::ceil(width / spacing_px)) + 1);
  Rng rng(seed);
  Image coarse(ch, cw, 1);
  for (double& v : coarse.data) v = rng.uniform(-1.0, 1.0);
  return resize_bilinear(coarse, height, width);
}

SynthPair generate_pair(const SynthSpec& spec) {
  spec.validate();
  SynthPair pair;
  pair.image_a = texture_base(spec);
  pair.true_field = smooth_deformation(spec, spec.seed ^ kStreamDeform);
  pair.image_b = warp(pair.image_a, pair.true_field);
  pair.mask = ScoreMap(spec.size, spec.size);
  if (spec.blob_count > 0) add_blobs(spec, spec.seed ^ kStreamBlob, pair.image_b, pair.mask);
  return pair;
}

SynthPopulation generate_population(const SynthSpec& spec, int control_count,
                                    int changed_count) {
  spec.validate();
  require(control_count >= 3, "population requires at least 3 controls");
  require(changed_count >= 0, "changed count must be nonnegative");
  const Image base = texture_base(spec);

  SynthPopulation pop;
  char id[32];
  for (int i = 0; i < control_count; ++i) {
    const std::uint64_t item_seed = spec.seed ^ (kStreamItem * static_cast<std::uint64_t>(i + 1));
    const DisplacementField field = smooth_deformation(spec, item_seed);
    ControlSet::Member member;
    member.image = warp(base, field);
    member.features = member.image;
    std::snprintf(id, sizeof(id), "control_%03d", i);
    member.id = id;
    pop.controls.members.push_back(std::move(member));
  }
  for (int j = 0; j < changed_count; ++j) {
    const std::uint64_t item_seed =
        spec.seed ^ (kStreamItem * static_cast<std::uint64_t>(control_count + j + 1));
    const DisplacementField field = smooth_deformation(spec, item_seed);
    SynthPopulation::ChangedItem item;
    item.image = warp(base, field);
    item.mask = ScoreMap(spec.size, spec.size);
    add_blobs(spec, item_seed ^ kStreamBlob, item.image, item.mask);
    item.features = item.image;
    std::snprintf(id, sizeof(id), "changed_%03d", j);
    item.id = id;
    pop.changed.push_back(std::move(item));
  }
  return pop;
}

}  // namespace tcd
