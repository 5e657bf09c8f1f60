#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace optdesign {

class DesignSpace;

struct Response {
  std::size_t winner = 0;
  std::size_t loser = 0;
  int query_id = 0;
};

/// Ordered pairwise responses. Row q of deltas() is
/// z_loser - z_winner in constrained coordinates, so a response consistent
/// with part-worth w has w'delta < 0.
class ResponseSet {
 public:
  explicit ResponseSet(std::size_t dimension = 0);

  void add(const DesignSpace& space, std::size_t winner, std::size_t loser, int query_id = -1);
  void add(const Response& r, const Eigen::VectorXd& delta);

  std::size_t size() const { return responses_.size(); }
  bool empty() const { return responses_.empty(); }
  std::size_t dimension() const { return dimension_; }
  const std::vector<Response>& responses() const { return responses_; }
  const Eigen::MatrixXd& deltas() const { return deltas_; }

  ResponseSet subset(const std::vector<std::size_t>& indices) const;

 private:
  std::size_t dimension_;
  std::vector<Response> responses_;
  Eigen::MatrixXd deltas_;
};

/// Regularized-logistic posterior
///   p(w) ∝ exp(-w'w / 2C) prod_q 1 / (1 + exp(w'delta_q)).
class Posterior {
 public:
  Posterior(double prior_strength, ResponseSet responses);

  double prior_strength() const { return prior_strength_; }
  const ResponseSet& responses() const { return responses_; }
  std::size_t dimension() const { return responses_.dimension(); }

  /// sum_q log(1 + exp(w'delta_q)) + w'w / 2C.
  double neg_log_density(const Eigen::VectorXd& w) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& w) const;
  /// (1/C) I + sum_q s_q (1 - s_q) delta_q delta_q', s_q = sigmoid(w'delta_q).
  Eigen::MatrixXd hessian(const Eigen::VectorXd& w) const;

 private:
  double prior_strength_;
  ResponseSet responses_;
};

inline double neg_log_posterior(const Eigen::VectorXd& w, const Posterior& p) {
  return p.neg_log_density(w);
}
inline Eigen::MatrixXd hessian(const Posterior& p, const Eigen::VectorXd& at) {
  return p.hessian(at);
}

struct MapOptions {
  double gradient_tolerance = 1e-8;
  int max_iterations = 500;
  bool record_trace = false;
  std::optional<Eigen::VectorXd> initial;
};

struct MapTraceRow {
  int iteration = 0;
  double neg_log_density = 0.0;
  double gradient_norm = 0.0;
};

struct MapResult {
  Eigen::VectorXd w;
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;  // max-norm at the returned iterate
  std::vector<MapTraceRow> trace;
};

/// Damped Newton with backtracking line search.
MapResult map_estimate(const Posterior& posterior, const MapOptions& options = {});

/// {0.1, 1, 10, ..., 1e8}
std::vector<double> default_prior_grid();

struct CvOptions {
  std::vector<double> grid = default_prior_grid();
  std::size_t folds = 10;
  std::uint64_t shuffle_seed = 0x9e3779b97f4a7c15ULL;
  double fallback = 1.0;
};

struct CvResult {
  double prior_strength = 1.0;
  bool skipped = false;              // fewer responses than folds
  std::vector<double> grid;
  std::vector<double> mean_log_lik;  // per grid entry, held-out
};

/// K-fold cross-validation of the prior strength by mean held-out
/// log-likelihood. Ties go to the smaller C.
CvResult cross_validate_prior(const ResponseSet& responses, const CvOptions& options = {});

struct ProjectedHessian {
  Eigen::MatrixXd matrix;           // (I - ww'/|w|^2) H, or H when w = 0
  Eigen::VectorXd min_eigenvector;  // unit, orthogonal to w when projected
  double min_eigenvalue = 0.0;
  bool projected = false;
};

/// Smallest-curvature direction of H restricted to the complement of w_hat.
ProjectedHessian projected_hessian(const Eigen::MatrixXd& hessian, const Eigen::VectorXd& w_hat);

/// Everything the query selectors need from one posterior update.
struct PosteriorFit {
  CvResult cv;
  MapResult map;
  Eigen::MatrixXd hessian;
  ProjectedHessian projection;
};

struct FitOptions {
  CvOptions cv;
  MapOptions map;
};

PosteriorFit fit_posterior(const ResponseSet& responses, const FitOptions& options = {});

}  // namespace optdesign
