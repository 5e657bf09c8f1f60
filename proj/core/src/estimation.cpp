#include "optdesign/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "optdesign/choice_model.hpp"
#include "optdesign/design_space.hpp"
#include "optdesign/errors.hpp"

namespace optdesign {

ResponseSet::ResponseSet(std::size_t dimension)
    : dimension_(dimension), deltas_(0, static_cast<Eigen::Index>(dimension)) {}

void ResponseSet::add(const DesignSpace& space, std::size_t winner, std::size_t loser,
                      int query_id) {
  if (winner >= space.size() || loser >= space.size()) {
    throw ValidationError("response references a design outside the space");
  }
  if (space.dimension() != dimension_) {
    throw ValidationError("response set dimension does not match design space");
  }
  add(Response{winner, loser, query_id},
      space.design(loser).constrained - space.design(winner).constrained);
}

void ResponseSet::add(const Response& r, const Eigen::VectorXd& delta) {
  if (r.winner == r.loser) {
    throw ValidationError("winner and loser must differ");
  }
  if (static_cast<std::size_t>(delta.size()) != dimension_) {
    throw ValidationError("response delta has wrong dimension");
  }
  const Eigen::Index n = deltas_.rows();
  deltas_.conservativeResize(n + 1, Eigen::NoChange);
  deltas_.row(n) = delta.transpose();
  responses_.push_back(r);
}

ResponseSet ResponseSet::subset(const std::vector<std::size_t>& indices) const {
  ResponseSet out(dimension_);
  out.deltas_.resize(static_cast<Eigen::Index>(indices.size()),
                     static_cast<Eigen::Index>(dimension_));
  out.responses_.reserve(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    out.deltas_.row(static_cast<Eigen::Index>(i)) =
        deltas_.row(static_cast<Eigen::Index>(indices[i]));
    out.responses_.push_back(responses_.at(indices[i]));
  }
  return out;
}

Posterior::Posterior(double prior_strength, ResponseSet responses)
    : prior_strength_(prior_strength), responses_(std::move(responses)) {
  if (!(prior_strength_ > 0.0) || !std::isfinite(prior_strength_)) {
    throw ValidationError("prior strength C must be positive and finite");
  }
}

double Posterior::neg_log_density(const Eigen::VectorXd& w) const {
  double f = w.squaredNorm() / (2.0 * prior_strength_);
  if (!responses_.empty()) {
    const Eigen::VectorXd m = responses_.deltas() * w;
    for (Eigen::Index q = 0; q < m.size(); ++q) f += softplus(m[q]);
  }
  return f;
}

Eigen::VectorXd Posterior::gradient(const Eigen::VectorXd& w) const {
  Eigen::VectorXd g = w / prior_strength_;
  if (!responses_.empty()) {
    Eigen::VectorXd s = responses_.deltas() * w;
    for (Eigen::Index q = 0; q < s.size(); ++q) s[q] = sigmoid(s[q]);
    g.noalias() += responses_.deltas().transpose() * s;
  }
  return g;
}

Eigen::MatrixXd Posterior::hessian(const Eigen::VectorXd& w) const {
  const auto d = static_cast<Eigen::Index>(dimension());
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(d, d) / prior_strength_;
  if (!responses_.empty()) {
    const Eigen::MatrixXd& dz = responses_.deltas();
    Eigen::VectorXd m = dz * w;
    for (Eigen::Index q = 0; q < m.size(); ++q) {
      const double s = sigmoid(m[q]);
      m[q] = s * (1.0 - s);
    }
    h.noalias() += dz.transpose() * m.asDiagonal() * dz;
  }
  return h;
}

MapResult map_estimate(const Posterior& posterior, const MapOptions& options) {
  const auto d = static_cast<Eigen::Index>(posterior.dimension());
  MapResult res;
  res.w = options.initial ? *options.initial : Eigen::VectorXd::Zero(d);
  if (res.w.size() != d) {
    throw ValidationError("MAP initial point has wrong dimension");
  }
  double f = posterior.neg_log_density(res.w);
  for (int it = 0;; ++it) {
    const Eigen::VectorXd g = posterior.gradient(res.w);
    res.gradient_norm = g.size() ? g.cwiseAbs().maxCoeff() : 0.0;
    res.iterations = it;
    if (options.record_trace) res.trace.push_back({it, f, res.gradient_norm});
    if (res.gradient_norm < options.gradient_tolerance) {
      res.converged = true;
      return res;
    }
    if (it >= options.max_iterations) return res;

    const Eigen::MatrixXd h = posterior.hessian(res.w);
    const Eigen::VectorXd step = h.llt().solve(-g);
    const double decrement = -g.dot(step);
    if (!(decrement > 0.0) || !step.allFinite()) return res;

    // Inside the quadratic region the full step is taken unconditionally;
    // the objective change there is below double resolution.
    if (decrement < 1e-12) {
      res.w += step;
      f = posterior.neg_log_density(res.w);
      continue;
    }
    double t = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      const Eigen::VectorXd trial = res.w + t * step;
      const double ft = posterior.neg_log_density(trial);
      if (ft <= f - 1e-4 * t * decrement) {
        res.w = trial;
        f = ft;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) return res;
  }
}

std::vector<double> default_prior_grid() {
  std::vector<double> grid{0.1};
  for (int e = 0; e <= 8; ++e) grid.push_back(std::pow(10.0, e));
  return grid;
}

CvResult cross_validate_prior(const ResponseSet& responses, const CvOptions& options) {
  CvResult out;
  out.grid = options.grid;
  out.prior_strength = options.fallback;
  if (options.grid.empty() || options.folds < 2 || responses.size() < options.folds) {
    out.skipped = true;
    return out;
  }
  const std::size_t n = responses.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(options.shuffle_seed);
  std::shuffle(order.begin(), order.end(), rng);

  struct Fold {
    ResponseSet train;
    ResponseSet held_out;
    Eigen::VectorXd warm;
  };
  std::vector<Fold> folds;
  folds.reserve(options.folds);
  for (std::size_t f = 0; f < options.folds; ++f) {
    const std::size_t lo = f * n / options.folds;
    const std::size_t hi = (f + 1) * n / options.folds;
    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> test_idx(order.begin() + static_cast<std::ptrdiff_t>(lo),
                                      order.begin() + static_cast<std::ptrdiff_t>(hi));
    train_idx.insert(train_idx.end(), order.begin(), order.begin() + static_cast<std::ptrdiff_t>(lo));
    train_idx.insert(train_idx.end(), order.begin() + static_cast<std::ptrdiff_t>(hi), order.end());
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());
    folds.push_back({responses.subset(train_idx), responses.subset(test_idx),
                     Eigen::VectorXd::Zero(static_cast<Eigen::Index>(responses.dimension()))});
  }

  // Grid is visited in ascending C so each fold warm-starts from the
  // previous, more regularized solution.
  std::vector<std::size_t> by_c(options.grid.size());
  std::iota(by_c.begin(), by_c.end(), std::size_t{0});
  std::stable_sort(by_c.begin(), by_c.end(),
                   [&](std::size_t a, std::size_t b) { return options.grid[a] < options.grid[b]; });

  out.mean_log_lik.assign(options.grid.size(), 0.0);
  for (std::size_t gi : by_c) {
    const double c = options.grid[gi];
    double total = 0.0;
    for (auto& fold : folds) {
      MapOptions mo;
      mo.initial = fold.warm;
      const Posterior post(c, fold.train);
      const MapResult m = map_estimate(post, mo);
      fold.warm = m.w;
      const Eigen::VectorXd margins = fold.held_out.deltas() * m.w;
      for (Eigen::Index q = 0; q < margins.size(); ++q) total -= softplus(margins[q]);
    }
    out.mean_log_lik[gi] = total / static_cast<double>(n);
  }

  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t gi : by_c) {
    if (out.mean_log_lik[gi] > best) {
      best = out.mean_log_lik[gi];
      out.prior_strength = options.grid[gi];
    }
  }
  return out;
}

ProjectedHessian projected_hessian(const Eigen::MatrixXd& hessian, const Eigen::VectorXd& w_hat) {
  const Eigen::Index d = hessian.rows();
  if (hessian.cols() != d || w_hat.size() != d) {
    throw ValidationError("projected_hessian: dimension mismatch");
  }
  ProjectedHessian out;
  const double norm2 = w_hat.squaredNorm();
  if (norm2 == 0.0 || d < 2) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hessian);
    out.matrix = hessian;
    out.min_eigenvalue = es.eigenvalues()[0];
    out.min_eigenvector = es.eigenvectors().col(0);
  } else {
    out.projected = true;
    out.matrix = hessian - w_hat * (w_hat.transpose() * hessian) / norm2;
    // Orthonormal basis of the complement of w_hat from a Householder QR.
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(w_hat);
    const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
    const Eigen::MatrixXd basis = q.rightCols(d - 1);
    const Eigen::MatrixXd reduced = basis.transpose() * hessian * basis;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (reduced + reduced.transpose()));
    out.min_eigenvalue = es.eigenvalues()[0];
    out.min_eigenvector = basis * es.eigenvectors().col(0);
    // Remove round-off leakage along w_hat.
    out.min_eigenvector -= w_hat * (w_hat.dot(out.min_eigenvector) / norm2);
  }
  out.min_eigenvector.normalize();
  // Sign convention: first non-negligible component positive.
  for (Eigen::Index i = 0; i < d; ++i) {
    if (std::abs(out.min_eigenvector[i]) > 1e-12) {
      if (out.min_eigenvector[i] < 0.0) out.min_eigenvector = -out.min_eigenvector;
      break;
    }
  }
  return out;
}

PosteriorFit fit_posterior(const ResponseSet& responses, const FitOptions& options) {
  PosteriorFit fit;
  fit.cv = cross_validate_prior(responses, options.cv);
  const Posterior post(fit.cv.prior_strength, responses);
  fit.map = map_estimate(post, options.map);
  fit.hessian = post.hessian(fit.map.w);
  fit.projection = projected_hessian(fit.hessian, fit.map.w);
  return fit;
}

}  // namespace optdesign
