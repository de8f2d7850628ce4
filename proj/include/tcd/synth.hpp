// Synthetic benchmark pairs: piecewise-regional noise textures deformed by
// smooth random fields, with optional intensity blobs and exact ground-truth
// change masks. Deterministic under the spec seed.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tcd/detection.hpp"
#include "tcd/types.hpp"

namespace tcd {

struct SynthSpec {
  int size = 64;
  double texture_corr_px = 4.0;     // correlation length of the fine texture
  double texture_contrast = 0.25;   // peak-to-peak amplitude of the texture
  double deform_amplitude_px = 3.0; // max displacement per axis
  double deform_smoothness_px = 16.0;
  double blob_radius_px = 6.0;
  double blob_delta = 0.5;          // intensity change inside a blob
  int blob_count = 1;
  std::uint64_t seed = 1;

  void validate() const {
    require(size >= 16, "grid size must be at least 16");
    require(blob_count >= 0, "blob count must be nonnegative");
    require(deform_amplitude_px >= 0.0 && deform_amplitude_px < size / 8.0,
            "deformation amplitude must be below size/8");
    if (blob_count > 0) {
      require(blob_radius_px >= 2.0, "blob radius must be at least 2 px");
      require(2.0 * (blob_radius_px + deform_amplitude_px + 3.0) < size,
              "blobs do not fit inside the grid");
    }
  }
};

struct SynthPair {
  Image image_a;  // undeformed texture
  Image image_b;  // warped texture plus blobs
  ScoreMap mask;  // union of blob supports, on image_b's grid
  DisplacementField true_field;  // field on image_b's grid sampling image_a
};

SynthPair generate_pair(const SynthSpec& spec);

struct SynthPopulation {
  ControlSet controls;  // shared structure, independent deformations, no blobs
  struct ChangedItem {
    Image image;
    FeatureMap features;
    ScoreMap mask;
    std::string id;
  };
  std::vector<ChangedItem> changed;
};

SynthPopulation generate_population(const SynthSpec& spec, int control_count,
                                    int changed_count);

// Smooth random per-pixel image built by bilinear upsampling of a coarse
// uniform(-1, 1) grid with the given node spacing.
Image smooth_noise(int height, int width, double spacing_px, std::uint64_t seed);

}  // namespace tcd
