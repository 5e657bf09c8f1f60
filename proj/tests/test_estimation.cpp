#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "optdesign/choice_model.hpp"
#include "optdesign/errors.hpp"
#include "optdesign/estimation.hpp"
#include "support.hpp"

using namespace optdesign;

namespace {

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

// Central differences of the density against the analytic gradient, and of
// the gradient against the analytic Hessian.
TEST(Posterior, DerivativesMatchFiniteDifferences) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> dim(1, 10), rows(0, 20);
  std::uniform_real_distribution<double> logc(-1.0, 3.0);
  const double h = 1e-5;
  for (int inst = 0; inst < 50; ++inst) {
    const std::size_t d = dim(rng);
    const Posterior post(std::pow(10.0, logc(rng)), test::random_responses(d, rows(rng), rng));
    const Eigen::VectorXd w = test::random_vector(d, rng, 2.0);
    const Eigen::VectorXd g = post.gradient(w);
    const Eigen::MatrixXd hess = post.hessian(w);
    for (std::size_t i = 0; i < d; ++i) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
      e[static_cast<Eigen::Index>(i)] = h;
      const double fd = (post.neg_log_density(w + e) - post.neg_log_density(w - e)) / (2 * h);
      EXPECT_LT(rel_err(g[static_cast<Eigen::Index>(i)], fd), 1e-5) << "instance " << inst;
      const Eigen::VectorXd fd_col = (post.gradient(w + e) - post.gradient(w - e)) / (2 * h);
      for (std::size_t j = 0; j < d; ++j) {
        EXPECT_LT(rel_err(hess(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)),
                          fd_col[static_cast<Eigen::Index>(j)]),
                  1e-5)
            << "instance " << inst;
      }
    }
    EXPECT_NEAR((hess - hess.transpose()).norm(), 0.0, 1e-12);
  }
}

TEST(Posterior, RejectsBadPriorStrength) {
  EXPECT_THROW(Posterior(0.0, ResponseSet(2)), ValidationError);
  EXPECT_THROW(Posterior(-1.0, ResponseSet(2)), ValidationError);
  EXPECT_THROW(Posterior(INFINITY, ResponseSet(2)), ValidationError);
}

// One response with delta = 1 and C = 1: the optimum solves w = -sigmoid(w).
TEST(MapEstimate, OneDimensionalFixedPoint) {
  ResponseSet rs(1);
  rs.add(Response{0, 1, 0}, Eigen::VectorXd::Ones(1));
  double lo = -1.0, hi = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (mid + 1.0 / (1.0 + std::exp(-mid)) > 0.0 ? hi : lo) = mid;
  }
  const MapResult m = map_estimate(Posterior(1.0, rs));
  ASSERT_TRUE(m.converged);
  EXPECT_NEAR(m.w[0], lo, 1e-10);
  EXPECT_NEAR(m.w[0], -0.40106, 1e-5);
}

TEST(MapEstimate, GradientBelowToleranceOnRandomInstances) {
  std::mt19937_64 rng(99);
  for (int inst = 0; inst < 50; ++inst) {
    const std::size_t d = 2 + static_cast<std::size_t>(inst % 9);
    const ResponseSet rs = test::random_responses(d, 5 + static_cast<std::size_t>(inst % 16), rng);
    for (double c : {0.1, 10.0, 1e4}) {
      const MapResult m = map_estimate(Posterior(c, rs));
      EXPECT_TRUE(m.converged);
      EXPECT_LT(m.gradient_norm, 1e-8);
      EXPECT_LT(Posterior(c, rs).gradient(m.w).cwiseAbs().maxCoeff(), 1e-8);
    }
  }
}

// Convexity: the MAP beats every random perturbation.
TEST(MapEstimate, IsGlobalMinimum) {
  std::mt19937_64 rng(5);
  const ResponseSet rs = test::random_responses(4, 12, rng);
  const Posterior post(3.0, rs);
  const MapResult m = map_estimate(post);
  const double f = post.neg_log_density(m.w);
  for (int i = 0; i < 200; ++i) {
    EXPECT_GE(post.neg_log_density(m.w + test::random_vector(4, rng, 0.5)), f);
  }
  EXPECT_GT(post.hessian(m.w).selfadjointView<Eigen::Lower>().eigenvalues().minCoeff(), 0.0);
}

TEST(MapEstimate, NoResponsesGivesZero) {
  const MapResult m = map_estimate(Posterior(1.0, ResponseSet(3)));
  EXPECT_TRUE(m.converged);
  EXPECT_EQ(m.w.norm(), 0.0);
}

TEST(CrossValidation, SkippedBelowFoldCount) {
  std::mt19937_64 rng(1);
  const CvResult r = cross_validate_prior(test::random_responses(3, 9, rng));
  EXPECT_TRUE(r.skipped);
  EXPECT_EQ(r.prior_strength, 1.0);
  EXPECT_FALSE(cross_validate_prior(test::random_responses(3, 10, rng)).skipped);
}

// Separable noise-free answers favour weak regularization; coin-flip
// answers favour strong regularization.
TEST(CrossValidation, PicksPlausibleStrength) {
  std::mt19937_64 rng(17);
  const Eigen::VectorXd w_star = test::random_vector(3, rng);
  ResponseSet clean(3), noise(3);
  std::bernoulli_distribution coin(0.5);
  for (int i = 0; i < 60; ++i) {
    Eigen::VectorXd delta = test::random_vector(3, rng);
    if (w_star.dot(delta) > 0) delta = -delta;
    clean.add(Response{0, 1, i}, delta);
    noise.add(Response{0, 1, i}, coin(rng) ? delta : Eigen::VectorXd(-delta));
  }
  const CvResult a = cross_validate_prior(clean);
  const CvResult b = cross_validate_prior(noise);
  EXPECT_GE(a.prior_strength, 100.0);
  EXPECT_LE(b.prior_strength, 1.0);
  ASSERT_EQ(a.mean_log_lik.size(), default_prior_grid().size());
}

TEST(CrossValidation, TiesGoToSmallerStrength) {
  CvOptions o;
  // Every C scores the same when each training fold is empty of signal:
  // all deltas are zero, so every fit returns w = 0.
  o.grid = {7.0, 2.0, 30.0};
  ResponseSet flat(2);
  for (int i = 0; i < 20; ++i) flat.add(Response{0, 1, i}, Eigen::Vector2d::Zero());
  const CvResult r = cross_validate_prior(flat, o);
  EXPECT_EQ(r.mean_log_lik[0], r.mean_log_lik[1]);
  EXPECT_EQ(r.prior_strength, 2.0);
}

// The minimum of v'Hv over unit v orthogonal to w, found through an
// independent Gram-Schmidt basis.
TEST(ProjectedHessian, MatchesComplementEigenproblem) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t d = 2 + static_cast<std::size_t>(trial % 7);
    const ResponseSet rs = test::random_responses(d, 15, rng);
    const Posterior post(10.0, rs);
    const Eigen::VectorXd w = map_estimate(post).w;
    const Eigen::MatrixXd h = post.hessian(w);
    const ProjectedHessian p = projected_hessian(h, w);
    ASSERT_TRUE(p.projected);

    const auto n = static_cast<Eigen::Index>(d);
    Eigen::MatrixXd basis(n, n - 1);
    Eigen::Index cols = 0;
    for (Eigen::Index e = 0; e < n && cols < n - 1; ++e) {
      Eigen::VectorXd v = Eigen::VectorXd::Unit(n, e);
      v -= w * (w.dot(v) / w.squaredNorm());
      for (Eigen::Index c = 0; c < cols; ++c) v -= basis.col(c) * basis.col(c).dot(v);
      if (v.norm() > 1e-6) basis.col(cols++) = v.normalized();
    }
    ASSERT_EQ(cols, n - 1);
    const Eigen::MatrixXd r = basis.transpose() * h * basis;
    const double oracle = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(r).eigenvalues()[0];

    EXPECT_NEAR(p.min_eigenvalue, oracle, 1e-9 * std::max(1.0, oracle));
    EXPECT_NEAR(p.min_eigenvector.norm(), 1.0, 1e-12);
    EXPECT_NEAR(p.min_eigenvector.dot(w), 0.0, 1e-10 * std::max(1.0, w.norm()));
    EXPECT_NEAR(p.min_eigenvector.dot(h * p.min_eigenvector), oracle, 1e-9 * std::max(1.0, oracle));
  }
}

TEST(ProjectedHessian, ZeroEstimateFallsBackToFullMatrix) {
  Eigen::Matrix2d h;
  h << 2, 0, 0, 1;
  const ProjectedHessian p = projected_hessian(h, Eigen::Vector2d::Zero());
  EXPECT_FALSE(p.projected);
  EXPECT_NEAR(p.min_eigenvalue, 1.0, 1e-12);
  EXPECT_NEAR(std::abs(p.min_eigenvector[1]), 1.0, 1e-12);
}

TEST(ResponseSet, DeltaIsLoserMinusWinner) {
  auto space = test::make_space({2, 2}, {1, 2});
  ResponseSet rs(space->dimension());
  rs.add(*space, 0, 3);
  EXPECT_EQ((rs.deltas().row(0).transpose() -
             (space->design(3).constrained - space->design(0).constrained))
                .norm(),
            0.0);
  EXPECT_THROW(rs.add(*space, 1, 1), ValidationError);
  EXPECT_THROW(rs.add(*space, 0, 99), ValidationError);
  const ResponseSet sub = rs.subset({0});
  EXPECT_EQ(sub.size(), 1u);
}
