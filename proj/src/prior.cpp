#include "tcd/prior.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>

namespace tcd {

double laplacian_quadratic_plane(const std::vector<double>& plane, const NeighborGraph& graph,
                                 std::size_t offset) {
  const int h = graph.height, w = graph.width;
  double acc = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double center = plane[offset + static_cast<std::size_t>(y) * w + x];
      graph.for_each_neighbor(y, x, [&](int ny, int nx) {
        const double diff = center - plane[offset + static_cast<std::size_t>(ny) * w + nx];
        acc += diff * diff;
      });
    }
  }
  return acc;
}

double laplacian_quadratic(const VariationalField& q, const NeighborGraph& graph) {
  const std::size_t n = static_cast<std::size_t>(q.pixels());
  double acc = 0.0;
  for (int d = 0; d < kDims; ++d)
    acc += laplacian_quadratic_plane(q.mu, graph, static_cast<std::size_t>(d) * n);
  return acc;
}

double kl_closed_form(const VariationalField& q, const PriorParams& prior,
                      const NeighborGraph& graph) {
  prior.validate();
  require(q.height == graph.height && q.width == graph.width,
          "variational field and graph grids must match");
  const int h = graph.height, w = graph.width;
  const int n = graph.pixels();
  const double alpha = prior.alpha, beta = prior.beta;

  double value = -(n - 1.0) * kDims * std::log(alpha) - kDims * std::log(beta);

  for (int d = 0; d < kDims; ++d) {
    double mean = 0.0;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) mean += q.mu[q.index(d, y, x)];
    mean /= n;
    value += beta * mean * mean;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double lv = q.log_v[q.index(d, y, x)];
        const double v = std::exp(lv);
        value += -lv + (alpha * graph.degree(y, x) + beta / (static_cast<double>(n) * n)) * v;
      }
    }
  }
  value += 0.5 * alpha * laplacian_quadratic(q, graph);
  return value;
}

std::vector<double> dense_laplacian(const NeighborGraph& graph) {
  const int n = graph.pixels();
  const int h = graph.height, w = graph.width;
  std::vector<double> lap(static_cast<std::size_t>(n) * n, 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int k = y * w + x;
      lap[static_cast<std::size_t>(k) * n + k] = graph.degree(y, x);
      graph.for_each_neighbor(y, x, [&](int ny, int nx) {
        lap[static_cast<std::size_t>(k) * n + (ny * w + nx)] = -1.0;
      });
    }
  }
  return lap;
}

std::vector<double> dense_precision(const NeighborGraph& graph, double alpha, double beta) {
  const int n = graph.pixels();
  std::vector<double> p = dense_laplacian(graph);
  const double ones_term = beta / (static_cast<double>(n) * n);
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = alpha * p[i] + ones_term;
  return p;
}

double kl_dense_oracle(const VariationalField& q, const PriorParams& prior,
                       const NeighborGraph& graph) {
  prior.validate();
  require(q.height == graph.height && q.width == graph.width,
          "variational field and graph grids must match");
  const int n = graph.pixels();
  const std::vector<double> p = dense_precision(graph, prior.alpha, prior.beta);
  Eigen::MatrixXd precision(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) precision(i, j) = p[static_cast<std::size_t>(i) * n + j];

  const Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success)
    throw NumericError("prior precision matrix is not positive definite");
  double logdet_p = 0.0;
  const Eigen::MatrixXd chol = llt.matrixL();
  for (int i = 0; i < n; ++i) logdet_p += 2.0 * std::log(chol(i, i));

  double kl = 0.0;
  for (int d = 0; d < kDims; ++d) {
    Eigen::VectorXd mu(n), v(n);
    for (int i = 0; i < n; ++i) {
      mu(i) = q.mu[static_cast<std::size_t>(d) * n + i];
      v(i) = std::exp(q.log_v[static_cast<std::size_t>(d) * n + i]);
    }
    const double trace = precision.diagonal().dot(v);
    const double quad = mu.dot(precision * mu);
    const double logdet_s = v.array().log().sum();
    kl += 0.5 * (trace + quad - n - logdet_p - logdet_s);
  }
  return kl;
}

std::pair<double, double> estimate_prior(const std::vector<VariationalField>& batch,
                                         const NeighborGraph& graph) {
  require(!batch.empty(), "estimate_prior requires a nonempty batch");
  const int h = graph.height, w = graph.width;
  const int n = graph.pixels();
  double s_alpha = 0.0, s_beta = 0.0;
  for (const VariationalField& q : batch) {
    require(q.height == h && q.width == w, "batch fields must live on the graph grid");
    double deg_v = 0.0, sum_v = 0.0, mean_sq = 0.0;
    for (int d = 0; d < kDims; ++d) {
      double mean = 0.0;
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          const double v = std::exp(q.log_v[q.index(d, y, x)]);
          deg_v += graph.degree(y, x) * v;
          sum_v += v;
          mean += q.mu[q.index(d, y, x)];
        }
      }
      mean /= n;
      mean_sq += mean * mean;
    }
    s_alpha += deg_v + 0.5 * laplacian_quadratic(q, graph);
    s_beta += mean_sq + sum_v / (static_cast<double>(n) * n);
  }
  s_alpha /= batch.size();
  s_beta /= batch.size();
  if (!(s_alpha > 0.0) || !(s_beta > 0.0)) throw NumericError("degenerate batch");
  return {(n - 1.0) * kDims / s_alpha, kDims / s_beta};
}

void update_running(PriorParams& prior, double alpha, double beta) {
  if (!(alpha > 0.0) || !(beta > 0.0))
    throw NumericError("running-average update requires positive parameters");
  if (!prior.running_initialized) {
    prior.running_alpha = alpha;
    prior.running_beta = beta;
    prior.running_initialized = true;
    return;
  }
  prior.running_alpha = prior.decay * prior.running_alpha + (1.0 - prior.decay) * alpha;
  prior.running_beta = prior.decay * prior.running_beta + (1.0 - prior.decay) * beta;
}

}  // namespace tcd
