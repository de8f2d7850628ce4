#include "tcd/detection.hpp"

#include <cmath>

#include "tcd/noise.hpp"
#include "tcd/warp.hpp"

namespace tcd {

ScoreMap score_L(const VariationalField& q, const FeatureMap& f_moving,
                 const FeatureMap& f_target, const PriorParams& prior,
                 const NoiseParams& noise, const NeighborGraph& graph) {
  require(q.height == graph.height && q.width == graph.width,
          "proposal and graph grids must match");
  require(f_target.height == q.height && f_target.width == q.width,
          "target features must live on the proposal grid");
  const int h = q.height, w = q.width;
  const int n = q.pixels();
  const double alpha = prior.eval_alpha();
  const double beta = prior.eval_beta();
  if (!(alpha > 0.0) || !(beta > 0.0)) throw NumericError("prior parameters must be positive");

  const Image warped = warp(f_moving, q.mean_field());
  ScoreMap score = nll_per_pixel(f_target, warped, noise);

  for (int d = 0; d < kDims; ++d) {
    double mu_sum = 0.0;
    for (int i = 0; i < n; ++i) mu_sum += q.mu[static_cast<std::size_t>(d) * n + i];
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const std::size_t idx = q.index(d, y, x);
        const double mu = q.mu[idx];
        const double lv = q.log_v[idx];
        const double v = std::exp(lv);
        double neighbor_sq = 0.0;
        graph.for_each_neighbor(y, x, [&](int ny, int nx) {
          const double diff = mu - q.mu[q.index(d, ny, nx)];
          neighbor_sq += diff * diff;
        });
        score.at(y, x) += beta / (static_cast<double>(n) * n) * mu * mu_sum - lv +
                          (alpha * graph.degree(y, x) + beta / (static_cast<double>(n) * n)) * v +
                          0.5 * alpha * neighbor_sq;
      }
    }
  }
  return score;
}

ScoreMap l_sym_from(const VariationalField& q_forward, const VariationalField& q_reverse,
                    const FeatureMap& f_moving, const FeatureMap& f_target,
                    const PriorParams& prior, const NoiseParams& noise) {
  const NeighborGraph graph_fwd(q_forward.height, q_forward.width);
  const NeighborGraph graph_rev(q_reverse.height, q_reverse.width);
  const ScoreMap l_fwd = score_L(q_forward, f_moving, f_target, prior, noise, graph_fwd);
  const ScoreMap l_rev = score_L(q_reverse, f_target, f_moving, prior, noise, graph_rev);
  const ScoreMap pulled = compose_scoremap(l_rev, q_forward.mean_field());
  ScoreMap out = l_fwd;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += pulled.data[i];
  return out;
}

LsymResult score_L_sym(const Image& moving, const Image& target, const FeatureMap& f_moving,
                       const FeatureMap& f_target, const RegistrationConfig& cfg,
                       PriorParams& prior, NoiseParams& noise) {
  LsymResult result;
  auto [fwd, rev] = register_bidirectional(moving, target, f_moving, f_target, cfg, prior, noise);
  result.forward = std::move(fwd);
  result.reverse = std::move(rev);
  const NeighborGraph graph_fwd(target.height, target.width);
  const NeighborGraph graph_rev(moving.height, moving.width);
  result.l_forward =
      score_L(result.forward.q, f_moving, f_target, prior, noise, graph_fwd);
  result.l_reverse =
      score_L(result.reverse.q, f_target, f_moving, prior, noise, graph_rev);
  const ScoreMap pulled = compose_scoremap(result.l_reverse, result.forward.q.mean_field());
  result.lsym = result.l_forward;
  for (std::size_t i = 0; i < result.lsym.data.size(); ++i)
    result.lsym.data[i] += pulled.data[i];
  return result;
}

ScoreMap q_combine(const std::vector<ScoreMap>& lsym_per_control,
                   const std::vector<ScoreMap>& inner_mean_per_control,
                   const std::vector<DisplacementField>& field_per_control) {
  require(!lsym_per_control.empty(), "q_combine requires at least one control");
  require(lsym_per_control.size() == inner_mean_per_control.size() &&
              lsym_per_control.size() == field_per_control.size(),
          "q_combine inputs must align");
  ScoreMap out(lsym_per_control.front().height, lsym_per_control.front().width);
  for (std::size_t i = 0; i < lsym_per_control.size(); ++i) {
    const ScoreMap pulled = compose_scoremap(inner_mean_per_control[i], field_per_control[i]);
    require(pulled.height == out.height && pulled.width == out.width,
            "control maps must share the target grid");
    for (std::size_t k = 0; k < out.data.size(); ++k)
      out.data[k] += lsym_per_control[i].data[k] - pulled.data[k];
  }
  const double inv = 1.0 / static_cast<double>(lsym_per_control.size());
  for (double& v : out.data) v *= inv;
  return out;
}

std::vector<ScoreMap> control_inner_means(const ControlSet& controls,
                                          const RegistrationConfig& cfg, PriorParams& prior,
                                          NoiseParams& noise) {
  const int count = controls.size();
  require(count >= 2, "control set needs at least 2 members");
  std::vector<ScoreMap> means(count);
  for (int i = 0; i < count; ++i)
    means[i] = ScoreMap(controls.members[i].image.height, controls.members[i].image.width);

  RegistrationConfig pair_cfg = cfg;
  for (int i = 0; i < count; ++i) {
    for (int k = i + 1; k < count; ++k) {
      // One bidirectional run covers both ordered pairs (i, k) and (k, i).
      pair_cfg.seed = cfg.seed + 1000003ull * static_cast<std::uint64_t>(i * count + k);
      const LsymResult r =
          score_L_sym(controls.members[k].image, controls.members[i].image,
                      controls.members[k].features, controls.members[i].features, pair_cfg,
                      prior, noise);
      for (std::size_t p = 0; p < means[i].data.size(); ++p) means[i].data[p] += r.lsym.data[p];
      const ScoreMap pulled = compose_scoremap(r.l_forward, r.reverse.q.mean_field());
      for (std::size_t p = 0; p < means[k].data.size(); ++p)
        means[k].data[p] += r.l_reverse.data[p] + pulled.data[p];
    }
  }
  const double inv = 1.0 / static_cast<double>(count - 1);
  for (ScoreMap& m : means)
    for (double& v : m.data) v *= inv;
  return means;
}

OutlierResult score_q_detail(const Image& target, const FeatureMap& f_target,
                             const ControlSet& controls,
                             const std::vector<ScoreMap>& inner_means,
                             const RegistrationConfig& cfg, PriorParams& prior,
                             NoiseParams& noise) {
  const int count = controls.size();
  require(count >= 2, "outlier scoring needs at least 2 controls");
  require(static_cast<int>(inner_means.size()) == count,
          "inner means must match the control set");

  std::vector<ScoreMap> lsym(count);
  std::vector<DisplacementField> fields(count);
  RegistrationConfig pair_cfg = cfg;
  for (int i = 0; i < count; ++i) {
    pair_cfg.seed = cfg.seed + 2000003ull * static_cast<std::uint64_t>(i + 1);
    LsymResult r = score_L_sym(controls.members[i].image, target, controls.members[i].features,
                               f_target, pair_cfg, prior, noise);
    lsym[i] = std::move(r.lsym);
    fields[i] = r.forward.q.mean_field();
  }

  OutlierResult result;
  result.q = q_combine(lsym, inner_means, fields);
  result.mean_lsym = ScoreMap(target.height, target.width);
  for (int i = 0; i < count; ++i)
    for (std::size_t p = 0; p < result.mean_lsym.data.size(); ++p)
      result.mean_lsym.data[p] += lsym[i].data[p] / count;
  return result;
}

ScoreMap score_Q(const Image& target, const FeatureMap& f_target, const ControlSet& controls,
                 const std::vector<ScoreMap>& inner_means, const RegistrationConfig& cfg,
                 PriorParams& prior, NoiseParams& noise) {
  return score_q_detail(target, f_target, controls, inner_means, cfg, prior, noise).q;
}

ScoreMap atlas_mean(const ControlSet& controls, const Image& atlas,
                    const FeatureMap& f_atlas, const RegistrationConfig& cfg,
                    PriorParams& prior, NoiseParams& noise) {
  const int count = controls.size();
  require(count >= 2, "atlas aggregation needs at least 2 controls");

  // Field on the atlas grid per control, sampling that control.
  std::vector<DisplacementField> to_atlas(count);
  RegistrationConfig reg_cfg = cfg;
  for (int i = 0; i < count; ++i) {
    reg_cfg.seed = cfg.seed + 3000017ull * static_cast<std::uint64_t>(i + 1);
    const RegistrationResult r = register_pair(controls.members[i].image, atlas,
                                                controls.members[i].features, f_atlas,
                                                reg_cfg, prior, noise);
    to_atlas[i] = r.q.mean_field();
  }

  ScoreMap acc(atlas.height, atlas.width);
  int terms = 0;
  for (int i = 0; i < count; ++i) {
    for (int k = i + 1; k < count; ++k) {
      reg_cfg.seed = cfg.seed + 4000037ull * static_cast<std::uint64_t>(i * count + k);
      const LsymResult r =
          score_L_sym(controls.members[k].image, controls.members[i].image,
                      controls.members[k].features, controls.members[i].features, reg_cfg,
                      prior, noise);
      const ScoreMap on_atlas_i = compose_scoremap(r.lsym, to_atlas[i]);
      ScoreMap lsym_k = r.l_reverse;
      const ScoreMap pulled = compose_scoremap(r.l_forward, r.reverse.q.mean_field());
      for (std::size_t p = 0; p < lsym_k.data.size(); ++p) lsym_k.data[p] += pulled.data[p];
      const ScoreMap on_atlas_k = compose_scoremap(lsym_k, to_atlas[k]);
      for (std::size_t p = 0; p < acc.data.size(); ++p)
        acc.data[p] += on_atlas_i.data[p] + on_atlas_k.data[p];
      terms += 2;
    }
  }
  for (double& v : acc.data) v /= terms;
  return acc;
}

}  // namespace tcd
