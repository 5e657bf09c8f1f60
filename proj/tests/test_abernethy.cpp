#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "optdesign/abernethy.hpp"
#include "optdesign/design_space.hpp"
#include "optdesign/errors.hpp"
#include "support.hpp"

using namespace optdesign;

namespace {

BaselineState state_of(const Eigen::VectorXd& w, const Eigen::VectorXd& v) {
  BaselineState s;
  s.w_hat = w;
  s.v = v;
  s.projected_hessian = Eigen::MatrixXd::Identity(w.size(), w.size());
  return s;
}

// Materializes every pair and sorts them with the documented ordering.
std::vector<Query> brute_force_ranking(const BaselineState& s, const DesignSpace& space,
                                       const QuerySet& exclude, std::size_t m) {
  struct Row {
    double c2, c1;
    std::size_t order;
    Query q;
  };
  std::vector<Row> rows;
  std::size_t order = 0;
  for (std::size_t i = 0; i < space.size(); ++i) {
    for (std::size_t j = i + 1; j < space.size(); ++j, ++order) {
      const Eigen::VectorXd d = space.design(i).constrained - space.design(j).constrained;
      if (d.norm() == 0.0 || exclude.contains({i, j})) continue;
      rows.push_back({round_significant(std::abs(d.dot(s.v)) / d.norm(), 12),
                      round_significant(std::abs(d.dot(s.w_hat)), 12), order, {i, j}});
    }
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.c2 != b.c2) return a.c2 > b.c2;
    if (a.c1 != b.c1) return a.c1 < b.c1;
    return a.order < b.order;
  });
  std::vector<Query> out;
  for (std::size_t i = 0; i < std::min(m, rows.size()); ++i) out.push_back(rows[i].q);
  return out;
}

}  // namespace

TEST(RoundSignificant, Digits) {
  EXPECT_DOUBLE_EQ(round_significant(0.123456789, 3), 0.123);
  EXPECT_DOUBLE_EQ(round_significant(98765.0, 2), 99000.0);
  EXPECT_DOUBLE_EQ(round_significant(-0.00237, 1), -0.002);
  EXPECT_EQ(round_significant(0.0, 5), 0.0);
}

TEST(SelectCandidate, PrefersAlignmentThenBalance) {
  const auto s = state_of(Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(0.0, 1.0));
  Eigen::MatrixXd rows(4, 2);
  rows << 1, 1,   // c2 = 0.707, c1 = 1
      0, 2,       // c2 = 1, c1 = 0
      0, -3,      // c2 = 1, c1 = 0, later
      0, 0;       // invalid
  EXPECT_EQ(select_candidate(s, rows), 1u);
  const CandidateScores sc = score_candidates(s, rows);
  EXPECT_FALSE(sc.valid[3]);
  EXPECT_NEAR(sc.c2[0], std::sqrt(0.5), 1e-15);

  // Equal c2: the smaller utility gap wins.
  Eigen::MatrixXd tie(2, 2);
  tie << 2, 2, -1, 1;
  EXPECT_EQ(select_candidate(s, tie), 1u);
  EXPECT_THROW(select_candidate(s, Eigen::MatrixXd::Zero(2, 2)), CandidatesExhausted);
  EXPECT_THROW(select_candidate(s, Eigen::MatrixXd::Zero(2, 3)), ValidationError);
}

TEST(RankDesignPairs, StreamingMatchesBruteForce) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    auto space = test::make_space({3, 2, 4}, {5, 10, 15, 20});
    const std::size_t d = space->dimension();
    const Eigen::VectorXd w = test::random_vector(d, rng);
    Eigen::VectorXd v = test::random_vector(d, rng);
    v -= w * (w.dot(v) / w.squaredNorm());
    v.normalize();
    const auto s = state_of(w, v);
    QuerySet exclude;
    const auto top = brute_force_ranking(s, *space, {}, 5);
    exclude.insert(top[0]);
    exclude.insert(top[3]);
    for (std::size_t m : {1u, 7u, 40u, 1000u}) {
      EXPECT_EQ(rank_design_pairs(s, *space, exclude, m), brute_force_ranking(s, *space, exclude, m))
          << "trial " << trial << " m " << m;
    }
    EXPECT_EQ(select_baseline_query(s, *space, exclude), brute_force_ranking(s, *space, exclude, 1)[0]);
  }
}

// Ties in c2 are common when v has repeated entries; the streaming prefilter
// must not drop them.
TEST(RankDesignPairs, TiesBrokenByUtilityGapAndOrder) {
  auto space = test::make_space({2, 2, 2}, {1, 2});
  const std::size_t d = space->dimension();
  Eigen::VectorXd v = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(d)).normalized();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
  w[0] = 1.0;
  const auto s = state_of(w, v);
  EXPECT_EQ(rank_design_pairs(s, *space, {}, 28), brute_force_ranking(s, *space, {}, 28));
}

TEST(RankDesignPairs, InvariantToPositiveScalingOfEstimate) {
  std::mt19937_64 rng(2);
  auto space = test::make_space({3, 3, 3}, {1, 2, 3});
  const Eigen::VectorXd w = test::random_vector(space->dimension(), rng);
  const Eigen::VectorXd v = test::random_vector(space->dimension(), rng).normalized();
  const auto a = rank_design_pairs(state_of(w, v), *space, {}, 30);
  const auto b = rank_design_pairs(state_of(7.5 * w, v), *space, {}, 30);
  const auto c = rank_design_pairs(state_of(w, -v), *space, {}, 30);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
}

TEST(RankDesignPairs, ExhaustionAndEdgeCases) {
  auto space = test::make_space({2}, {1, 2});
  const auto s = state_of(Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1));
  EXPECT_EQ(rank_design_pairs(s, *space, {}, 0).size(), 0u);
  const Query only = select_baseline_query(s, *space, {});
  EXPECT_EQ(only, (Query{0, 1}));
  QuerySet asked;
  asked.insert(only);
  EXPECT_THROW(select_baseline_query(s, *space, asked), CandidatesExhausted);
  EXPECT_THROW(rank_design_pairs(state_of(Eigen::VectorXd::Ones(3), Eigen::VectorXd::Ones(3)),
                                 *space, {}, 1),
               ValidationError);
}

TEST(BaselineState, FromFitUsesProjectedDirection) {
  std::mt19937_64 rng(6);
  const ResponseSet rs = test::random_responses(4, 12, rng);
  const PosteriorFit fit = fit_posterior(rs);
  const BaselineState s = BaselineState::from_fit(fit);
  EXPECT_EQ(s.w_hat, fit.map.w);
  EXPECT_NEAR(s.v.dot(s.w_hat), 0.0, 1e-10);
  EXPECT_NEAR(s.v.norm(), 1.0, 1e-12);
}
