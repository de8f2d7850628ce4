// ROC/AUC evaluation with subject-level bootstrap, plus registration-quality
// metrics (Dice overlap, label accuracy, log-Jacobian variance, folding).
#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "tcd/types.hpp"

namespace tcd {

struct RocCurve {
  std::vector<std::pair<double, double>> points;  // (fpr, tpr), threshold-sorted
  double auc = 0.0;
};

struct SubjectScores {
  std::vector<double> scores;
  std::vector<int> labels;  // 0 or 1
};

// Pooled ROC over flat score/label arrays. Thresholds sweep all distinct
// score values; tied scores collapse into one sweep step, so the trapezoidal
// AUC equals the Mann-Whitney statistic with ties counted 1/2.
RocCurve compute_roc_flat(const std::vector<double>& scores, const std::vector<int>& labels);

// Pools all pixels of the paired score maps and binary masks.
RocCurve compute_roc(const std::vector<ScoreMap>& scores, const std::vector<ScoreMap>& masks);

SubjectScores pool_subject(const ScoreMap& score, const ScoreMap& mask);

struct BootstrapEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  int resamples = 0;
};

// Resamples whole subjects with replacement and recomputes the pooled AUC per
// resample. Resamples without both label classes are redrawn (at most 100
// retries each). Returns the mean and standard deviation of the resampled
// AUC values.
BootstrapEstimate bootstrap_auc(const std::vector<SubjectScores>& subjects, int resamples,
                                std::uint64_t seed);

struct RegistrationMetrics {
  std::vector<std::pair<int, double>> dice_per_class;  // nonzero classes
  double mean_dice = 0.0;   // over nonzero classes present in the target
  double accuracy = 0.0;    // fraction of matching labels
  double var_log_jac = 0.0; // variance of log |det J|, floored at 1e-6
  double fold_pct = 0.0;    // percentage of pixels with det < 0
};

// Label maps must share a grid; labels are rounded to integers. The warped
// map is expected to come from nearest-neighbor warping.
RegistrationMetrics registration_metrics(const Image& warped_seg, const Image& target_seg,
                                         const DisplacementField& field);

}  // namespace tcd
