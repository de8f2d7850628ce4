// Unsupervised reference scores computed from a registered pair: the
// intensity-difference score attenuated by local image gradients, and the
// squared log Jacobian determinant of the transformation.
#pragma once

#include "tcd/types.hpp"

namespace tcd {

// Gradient magnitude from separable Gaussian-derivative filters at scale
// sigma, truncated at 4 sigma, with reflected borders. The derivative kernel
// is normalized to unit response on a linear ramp.
ScoreMap gaussian_gradient_magnitude(const Image& img, double sigma);

// Intensity/gradient score for single-channel images:
//   r_k^2 / (1 + K * g_k^2)
// with r = target - warp(moving, field) and g the Gaussian-derivative
// gradient magnitude of the warped moving image. This is a reconstruction of
// the classic intensity-difference approach; defaults sigma = 6, K = 2.
ScoreMap score_li_wyatt(const Image& moving, const Image& target,
                        const DisplacementField& field, double sigma = 6.0, double K = 2.0);

// Squared log absolute Jacobian determinant, |det| floored at 1e-6.
ScoreMap score_jacdet(const DisplacementField& field);

}  // namespace tcd
