// Topological-change scores. The negative bound of a registered pair is
// decomposed into per-pixel terms (feature reconstruction error plus each
// pixel's share of the divergence from the prior), symmetrized across both
// registration directions, and contrasted against a control population for
// outlier scoring.
#pragma once

#include <string>
#include <vector>

#include "tcd/registration.hpp"
#include "tcd/types.hpp"

namespace tcd {

struct ControlSet {
  struct Member {
    Image image;
    FeatureMap features;
    std::string id;
  };
  std::vector<Member> members;

  int size() const { return static_cast<int>(members.size()); }
};

// Per-pixel decomposed score for a registered pair, evaluated at the proposal
// mean. q is the field proposal on the target grid (the J->I result for
// L(J|I)); f_moving/f_target are the feature maps of the two images. Uses the
// prior's evaluation-time (running-average) parameters.
ScoreMap score_L(const VariationalField& q, const FeatureMap& f_moving,
                 const FeatureMap& f_target, const PriorParams& prior,
                 const NoiseParams& noise, const NeighborGraph& graph);

struct LsymResult {
  ScoreMap lsym;        // on the target grid
  ScoreMap l_forward;   // L(target | moving), on the target grid
  ScoreMap l_reverse;   // L(moving | target), on the moving grid
  RegistrationResult forward;  // field on the target grid, sampling moving
  RegistrationResult reverse;  // field on the moving grid, sampling target
};

// Bidirectional score from precomputed proposals: the forward map plus the
// reverse map pulled through the forward mean field.
ScoreMap l_sym_from(const VariationalField& q_forward, const VariationalField& q_reverse,
                    const FeatureMap& f_moving, const FeatureMap& f_target,
                    const PriorParams& prior, const NoiseParams& noise);

// Registers both directions and symmetrizes. The result lives on the grid of
// `target` (L_sym(target | moving)).
LsymResult score_L_sym(const Image& moving, const Image& target, const FeatureMap& f_moving,
                       const FeatureMap& f_target, const RegistrationConfig& cfg,
                       PriorParams& prior, NoiseParams& noise);

// Subtraction wiring of the outlier score: mean over controls of the pair
// score minus the control's own population mean pulled onto the target grid.
ScoreMap q_combine(const std::vector<ScoreMap>& lsym_per_control,
                   const std::vector<ScoreMap>& inner_mean_per_control,
                   const std::vector<DisplacementField>& field_per_control);

// Hold-one-out population means: for each control, the mean bidirectional
// score against every other control, on that control's grid. Costs one
// bidirectional registration per unordered control pair.
std::vector<ScoreMap> control_inner_means(const ControlSet& controls,
                                          const RegistrationConfig& cfg, PriorParams& prior,
                                          NoiseParams& noise);

struct OutlierResult {
  ScoreMap q;          // outlier score on the target grid
  ScoreMap mean_lsym;  // mean raw bidirectional score, same grid
};

// Outlier score of a target image against a control set with precomputed
// inner means (from control_inner_means or a persisted cache).
OutlierResult score_q_detail(const Image& target, const FeatureMap& f_target,
                             const ControlSet& controls,
                             const std::vector<ScoreMap>& inner_means,
                             const RegistrationConfig& cfg, PriorParams& prior,
                             NoiseParams& noise);

ScoreMap score_Q(const Image& target, const FeatureMap& f_target, const ControlSet& controls,
                 const std::vector<ScoreMap>& inner_means, const RegistrationConfig& cfg,
                 PriorParams& prior, NoiseParams& noise);

// Population mean of pairwise bidirectional scores pulled onto a common
// atlas grid.
ScoreMap atlas_mean(const ControlSet& controls, const Image& atlas,
                    const FeatureMap& f_atlas, const RegistrationConfig& cfg,
                    PriorParams& prior, NoiseParams& noise);

}  // namespace tcd
