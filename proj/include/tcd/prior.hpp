// Learnable transformation prior over displacement fields. The prior on each
// dimension is a zero-mean Gaussian with precision alpha * L + (beta / n^2) *
// ones, where L is the 4-neighborhood graph Laplacian; beta restores the
// translation eigenvalue that L lacks. Provides the constant-free closed-form
// divergence used by the optimizer and scores, a dense brute-force oracle for
// testing, and the analytic batch estimate of (alpha, beta).
#pragma once

#include <utility>
#include <vector>

#include "tcd/types.hpp"

namespace tcd {

struct PriorParams {
  double alpha = 1.0;  // neighbor-difference precision weight
  double beta = 1.0;   // mean-translation precision weight
  double running_alpha = 0.0;
  double running_beta = 0.0;
  bool running_initialized = false;
  double decay = 0.99;

  // Evaluation-time values: the running averages once any update happened.
  double eval_alpha() const { return running_initialized ? running_alpha : alpha; }
  double eval_beta() const { return running_initialized ? running_beta : beta; }

  void validate() const {
    if (!(alpha > 0.0) || !(beta > 0.0))
      throw NumericError("prior parameters must be positive");
  }
};

// Directed neighbor-difference sum over one per-pixel plane:
// sum_k sum_{l in N(k)} (m_k - m_l)^2. Each undirected edge is counted twice,
// once from each endpoint; the value equals twice the Laplacian quadratic
// form m' L m.
double laplacian_quadratic_plane(const std::vector<double>& plane, const NeighborGraph& graph,
                                 std::size_t offset = 0);

// Same sum over both displacement dimensions of a variational mean.
double laplacian_quadratic(const VariationalField& q, const NeighborGraph& graph);

// Constant-free value of twice the divergence between the proposal q and the
// prior:
//   -(n-1) D log alpha - D log beta
//   + beta * sum_d mean_d(mu)^2
//   + sum_d sum_k [ -log v_k + (alpha |N(k)| + beta/n^2) v_k ]
//   + (alpha/2) * laplacian_quadratic(mu).
// The alpha/2 factor turns the doubled directed edge sum into the Laplacian
// quadratic form, so the result differs from twice the exact divergence only
// by a q-independent constant.
double kl_closed_form(const VariationalField& q, const PriorParams& prior,
                      const NeighborGraph& graph);

// Dense n x n precision matrix alpha * L + (beta / n^2) * ones, row-major.
std::vector<double> dense_precision(const NeighborGraph& graph, double alpha, double beta);

// Dense n x n graph Laplacian, row-major.
std::vector<double> dense_laplacian(const NeighborGraph& graph);

// Exact divergence KL(q || p_ab) including all constants, computed from a
// dense factorization of the precision matrix. Intended for small grids
// (n <= 64); the independent route against which kl_closed_form is checked.
double kl_dense_oracle(const VariationalField& q, const PriorParams& prior,
                       const NeighborGraph& graph);

// Analytic minimizers of the batch-expected divergence over (alpha, beta):
//   alpha* = (n-1) D / E[ sum_d sum_k |N(k)| v_k + (1/2) laplacian_quadratic(mu) ]
//   beta*  = D / E[ sum_d mean_d(mu)^2 + (1/n^2) sum_d sum_k v_k ].
std::pair<double, double> estimate_prior(const std::vector<VariationalField>& batch,
                                         const NeighborGraph& graph);

// Exponential moving average update; the first call initializes the running
// values directly.
void update_running(PriorParams& prior, double alpha, double beta);

}  // namespace tcd
