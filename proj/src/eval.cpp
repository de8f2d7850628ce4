#include "tcd/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "tcd/rng.hpp"
#include "tcd/warp.hpp"

namespace tcd {

RocCurve compute_roc_flat(const std::vector<double>& scores, const std::vector<int>& labels) {
  require(scores.size() == labels.size(), "scores and labels must align");
  require(!scores.empty(), "roc requires data");
  std::size_t pos = 0;
  for (int l : labels) pos += l != 0 ? 1 : 0;
  const std::size_t neg = scores.size() - pos;
  if (pos == 0 || neg == 0)
    throw NumericError("roc requires at least one positive and one negative label");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve roc;
  roc.points.emplace_back(0.0, 0.0);
  std::size_t tp = 0, fp = 0;
  std::size_t i = 0;
  double auc = 0.0;
  double prev_fpr = 0.0, prev_tpr = 0.0;
  while (i < order.size()) {
    const double threshold = scores[order[i]];
    while (i < order.size() && scores[order[i]] == threshold) {
      if (labels[order[i]] != 0)
        ++tp;
      else
        ++fp;
      ++i;
    }
    const double fpr = static_cast<double>(fp) / neg;
    const double tpr = static_cast<double>(tp) / pos;
    auc += 0.5 * (fpr - prev_fpr) * (tpr + prev_tpr);
    roc.points.emplace_back(fpr, tpr);
    prev_fpr = fpr;
    prev_tpr = tpr;
  }
  roc.auc = auc;
  return roc;
}

SubjectScores pool_subject(const ScoreMap& score, const ScoreMap& mask) {
  require(score.height == mask.height && score.width == mask.width,
          "score map and mask grids must match");
  SubjectScores s;
  s.scores = score.data;
  s.labels.reserve(mask.data.size());
  for (double m : mask.data) s.labels.push_back(m > 0.5 ? 1 : 0);
  return s;
}

RocCurve compute_roc(const std::vector<ScoreMap>& scores, const std::vector<ScoreMap>& masks) {
  require(scores.size() == masks.size() && !scores.empty(),
          "roc requires matching score/mask lists");
  std::vector<double> flat_scores;
  std::vector<int> flat_labels;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const SubjectScores s = pool_subject(scores[i], masks[i]);
    flat_scores.insert(flat_scores.end(), s.scores.begin(), s.scores.end());
    flat_labels.insert(flat_labels.end(), s.labels.begin(), s.labels.end());
  }
  return compute_roc_flat(flat_scores, flat_labels);
}

BootstrapEstimate bootstrap_auc(const std::vector<SubjectScores>& subjects, int resamples,
                                std::uint64_t seed) {
  require(subjects.size() >= 2, "bootstrap requires at least 2 subjects");
  require(resamples >= 1, "bootstrap requires at least 1 resample");
  std::vector<double> aucs;
  aucs.reserve(resamples);
  for (int r = 0; r < resamples; ++r) {
    Rng rng(seed + static_cast<std::uint64_t>(r));
    bool done = false;
    for (int attempt = 0; attempt < 100 && !done; ++attempt) {
      std::vector<double> scores;
      std::vector<int> labels;
      for (std::size_t s = 0; s < subjects.size(); ++s) {
        const SubjectScores& sub = subjects[rng.index(subjects.size())];
        scores.insert(scores.end(), sub.scores.begin(), sub.scores.end());
        labels.insert(labels.end(), sub.labels.begin(), sub.labels.end());
      }
      const bool has_pos = std::find(labels.begin(), labels.end(), 1) != labels.end();
      const bool has_neg = std::find(labels.begin(), labels.end(), 0) != labels.end();
      if (!has_pos || !has_neg) continue;
      aucs.push_back(compute_roc_flat(scores, labels).auc);
      done = true;
    }
    if (!done) throw NumericError("bootstrap resample never drew both label classes");
  }
  BootstrapEstimate est;
  est.resamples = resamples;
  est.mean = std::accumulate(aucs.begin(), aucs.end(), 0.0) / aucs.size();
  double var = 0.0;
  for (double a : aucs) var += (a - est.mean) * (a - est.mean);
  est.stderr_ = std::sqrt(var / aucs.size());
  return est;
}

RegistrationMetrics registration_metrics(const Image& warped_seg, const Image& target_seg,
                                         const DisplacementField& field) {
  require(warped_seg.channels == 1 && target_seg.channels == 1,
          "label maps must be single-channel");
  require(warped_seg.height == target_seg.height && warped_seg.width == target_seg.width,
          "label maps must share a grid");
  RegistrationMetrics m;

  std::map<int, std::size_t> inter, count_a, count_b;
  std::size_t matches = 0;
  for (std::size_t i = 0; i < warped_seg.data.size(); ++i) {
    const int a = static_cast<int>(std::lround(warped_seg.data[i]));
    const int b = static_cast<int>(std::lround(target_seg.data[i]));
    if (a == b) ++matches;
    if (a != 0) ++count_a[a];
    if (b != 0) ++count_b[b];
    if (a == b && a != 0) ++inter[a];
  }
  m.accuracy = static_cast<double>(matches) / warped_seg.data.size();

  double dice_sum = 0.0;
  int dice_terms = 0;
  std::map<int, bool> seen;
  for (const auto& [cls, _] : count_a) seen[cls] = true;
  for (const auto& [cls, _] : count_b) seen[cls] = true;
  for (const auto& [cls, _] : seen) {
    const std::size_t a = count_a.count(cls) ? count_a[cls] : 0;
    const std::size_t b = count_b.count(cls) ? count_b[cls] : 0;
    if (a + b == 0) continue;
    const std::size_t i = inter.count(cls) ? inter[cls] : 0;
    const double dice = 2.0 * static_cast<double>(i) / static_cast<double>(a + b);
    m.dice_per_class.emplace_back(cls, dice);
    if (b > 0) {  // mean over classes present in the target
      dice_sum += dice;
      ++dice_terms;
    }
  }
  m.mean_dice = dice_terms > 0 ? dice_sum / dice_terms : 0.0;

  const ScoreMap det = jacobian_determinant(field);
  double mean_log = 0.0;
  std::size_t folds = 0;
  std::vector<double> logs(det.data.size());
  for (std::size_t i = 0; i < det.data.size(); ++i) {
    if (det.data[i] < 0.0) ++folds;
    logs[i] = std::log(std::max(std::abs(det.data[i]), 1e-6));
    mean_log += logs[i];
  }
  mean_log /= logs.size();
  double var = 0.0;
  for (double l : logs) var += (l - mean_log) * (l - mean_log);
  m.var_log_jac = var / logs.size();
  m.fold_pct = 100.0 * static_cast<double>(folds) / det.data.size();
  return m;
}

}  // namespace tcd
