#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "tcd/synth.hpp"
#include "tcd/warp.hpp"

using namespace tcd;

TEST_CASE("no changes means the pair is a pure warp") {
  SynthSpec spec;
  spec.size = 32;
  spec.blob_count = 0;
  spec.seed = 3;
  const SynthPair pair = generate_pair(spec);
  for (double v : pair.mask.data) CHECK(v == 0.0);
  const Image rewarped = warp(pair.image_a, pair.true_field);
  CHECK(rewarped.data == pair.image_b.data);
}

TEST_CASE("pure insertion changes only the disk") {
  SynthSpec spec;
  spec.size = 32;
  spec.deform_amplitude_px = 0.0;
  spec.blob_count = 1;
  spec.blob_radius_px = 4.0;
  spec.seed = 5;
  const SynthPair pair = generate_pair(spec);
  int positives = 0;
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) {
      const double diff = std::abs(pair.image_b.at(0, y, x) - pair.image_a.at(0, y, x));
      if (pair.mask.at(y, x) > 0.5) {
        CHECK(diff == doctest::Approx(spec.blob_delta));
        ++positives;
      } else {
        CHECK(diff == 0.0);
      }
    }
  CHECK(positives > 30);  // roughly pi r^2
}

TEST_CASE("fixed seeds reproduce pairs bitwise") {
  SynthSpec spec;
  spec.size = 24;
  spec.seed = 7;
  spec.deform_amplitude_px = 2.0;
  spec.blob_radius_px = 4.0;
  const SynthPair a = generate_pair(spec);
  const SynthPair b = generate_pair(spec);
  CHECK(a.image_a.data == b.image_a.data);
  CHECK(a.image_b.data == b.image_b.data);
  CHECK(a.mask.data == b.mask.data);
  CHECK(a.true_field.data == b.true_field.data);
}

TEST_CASE("mask pixels carry at least half the blob delta") {
  SynthSpec spec;
  spec.size = 48;
  spec.blob_count = 2;
  spec.blob_radius_px = 5.0;
  spec.seed = 11;
  const SynthPair pair = generate_pair(spec);
  const Image rewarped = warp(pair.image_a, pair.true_field);
  int positives = 0;
  for (int y = 0; y < 48; ++y)
    for (int x = 0; x < 48; ++x) {
      const double diff = std::abs(pair.image_b.at(0, y, x) - rewarped.at(0, y, x));
      if (pair.mask.at(y, x) > 0.5) {
        CHECK(diff >= spec.blob_delta / 2.0);
        ++positives;
      } else {
        CHECK(diff <= 1e-12);
      }
    }
  CHECK(positives > 0);
}

TEST_CASE("population shares structure but not deformations") {
  SynthSpec spec;
  spec.size = 32;
  spec.blob_radius_px = 4.0;
  spec.seed = 13;
  const SynthPopulation pop = generate_population(spec, 3, 2);
  REQUIRE(pop.controls.size() == 3);
  REQUIRE(pop.changed.size() == 2);
  CHECK(pop.controls.members[0].image.data != pop.controls.members[1].image.data);
  CHECK(pop.controls.members[1].image.data != pop.controls.members[2].image.data);
  for (const auto& item : pop.changed) {
    double mask_sum = 0.0;
    for (double v : item.mask.data) mask_sum += v;
    CHECK(mask_sum > 0.0);
  }
  CHECK(pop.controls.members[0].id == "control_000");
  CHECK(pop.changed[1].id == "changed_001");
}

TEST_CASE("invalid specs are rejected") {
  SynthSpec spec;
  spec.size = 32;
  spec.deform_amplitude_px = 10.0;  // >= size / 8
  CHECK_THROWS_AS(generate_pair(spec), UsageError);
  SynthSpec tiny_blob;
  tiny_blob.size = 32;
  tiny_blob.blob_radius_px = 1.0;
  CHECK_THROWS_AS(generate_pair(tiny_blob), UsageError);
  SynthSpec ok;
  ok.size = 32;
  ok.blob_count = 0;
  ok.blob_radius_px = 1.0;  // irrelevant without blobs
  CHECK_NOTHROW(generate_pair(ok));
}
