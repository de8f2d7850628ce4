// Differentiable warping of pixel grids: bilinear resampling, its analytic
// adjoint with respect to the displacement field, score-map composition,
// nearest-neighbor label warping and Jacobian determinants.
#pragma once

#include "tcd/types.hpp"

namespace tcd {

// Resamples img at position (x, y) + field(x, y) for every pixel of the
// field's grid. Sample positions are clamped to the image border; values are
// bilinearly interpolated. The output grid equals the field grid.
Image warp(const Image& img, const DisplacementField& field);

// Nearest-neighbor variant for label maps (rounds the clamped sample
// position).
Image warp_nearest(const Image& labels, const DisplacementField& field);

// Adjoint of warp with respect to the field: returns
// d(sum_{k,c} upstream(c,k) * warp(img, field)(c,k)) / d field.
// The upstream adjoint must have the shape of the warp output. At clamped
// samples the derivative in the clamped direction is zero; at integer sample
// positions the right-sided cell convention applies.
DisplacementField warp_gradient(const Image& img, const DisplacementField& field,
                                const Image& upstream);

// Pulls a score map living on the source grid onto the field's grid
// (single-channel warp).
ScoreMap compose_scoremap(const ScoreMap& map_on_source, const DisplacementField& field);

// Per-pixel determinant of the Jacobian of x -> x + field(x). Spatial
// derivatives use central differences in the interior and one-sided
// differences at the borders.
ScoreMap jacobian_determinant(const DisplacementField& field);

// Bilinear resize with align-corners sampling (used by the coarse-to-fine
// schedule and the synthetic generator).
Image resize_bilinear(const Image& img, int out_h, int out_w);

// 2x average-pool downsample; odd trailing rows/columns fold into the last
// output cell.
Image downsample2(const Image& img);

// Upsamples a variational field to a new grid and rescales the displacement
// means by the grid-size ratio.
VariationalField upsample_field(const VariationalField& q, int out_h, int out_w);

void validate_field(const DisplacementField& field);

}  // namespace tcd
