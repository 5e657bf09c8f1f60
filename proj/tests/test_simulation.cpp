#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "optdesign/errors.hpp"
#include "optdesign/metrics_io.hpp"
#include "optdesign/simulation.hpp"
#include "support.hpp"

using namespace optdesign;

namespace {

std::shared_ptr<const DesignSpace> small_space() {
  // Costs grow with the feature levels so that margins differ.
  return test::make_space({3, 3, 3}, {10, 20, 30}, {{0, 2, 5}, {0, 1, 3}, {0, 0, 0}});
}

}  // namespace

TEST(NoiseRates, WrongChoiceProbability) {
  EXPECT_LT(wrong_choice_probability(100.0, 0.1), 1e-4);
  EXPECT_NEAR(wrong_choice_probability(10.0, 0.1), 0.269, 0.001);
  EXPECT_NEAR(wrong_choice_probability(1.0, 0.1), 0.475, 0.001);
  EXPECT_DOUBLE_EQ(wrong_choice_probability(1.0, 0.0), 0.5);
  EXPECT_DOUBLE_EQ(wrong_choice_probability(3.0, -0.2), wrong_choice_probability(3.0, 0.2));
}

TEST(SimulateResponse, FrequencyMatchesLogit) {
  auto space = test::make_space({2, 2}, {1, 2});
  RespondentModel model{Eigen::Vector2d(0.3, -0.1), 2.0};
  const Query q{0, 3};
  const double gap =
      (space->design(0).constrained - space->design(3).constrained).dot(model.w_star);
  const double p = 1.0 / (1.0 + std::exp(-model.theta * gap));
  std::mt19937_64 rng(5);
  const int n = 40000;
  int first = 0;
  for (int i = 0; i < n; ++i) first += simulate_response(model, *space, q, rng) == 0 ? 1 : 0;
  EXPECT_NEAR(first / static_cast<double>(n), p, 4 * std::sqrt(p * (1 - p) / n));
  EXPECT_THROW(simulate_response(model, *space, Query{0, 99}, rng), ValidationError);
}

TEST(DeriveSeed, StreamsAreDistinctAndStable) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 50; ++s) {
    for (std::uint64_t stream = 0; stream < 50; ++stream) seen.insert(derive_seed(s, stream));
  }
  EXPECT_EQ(seen.size(), 2500u);
  EXPECT_EQ(derive_seed(1, 2), derive_seed(1, 2));
}

TEST(BootstrapSem, CoinAndConstant) {
  std::vector<double> coin;
  for (int i = 0; i < 100; ++i) coin.push_back(i % 2);
  EXPECT_NEAR(bootstrap_sem(coin, 2000, 3), 0.05, 0.005);
  EXPECT_NEAR(bootstrap_sem(std::vector<double>(20, 0.7), 100, 1), 0.0, 1e-12);
  EXPECT_EQ(bootstrap_sem(std::vector<double>{}, 100, 1), 0.0);
  EXPECT_EQ(bootstrap_sem(coin, 100, 9), bootstrap_sem(coin, 100, 9));
}

TEST(Pearson, EdgeCases) {
  EXPECT_NEAR(pearson(Eigen::Vector3d(1, 2, 3), Eigen::Vector3d(2, 4, 6)), 1.0, 1e-15);
  EXPECT_NEAR(pearson(Eigen::Vector3d(1, 2, 3), Eigen::Vector3d(3, 2, 1)), -1.0, 1e-15);
  EXPECT_EQ(pearson(Eigen::Vector3d(1, 1, 1), Eigen::Vector3d(3, 2, 1)), 0.0);
}

TEST(Engine, FirstQueryRandomThenAdaptive) {
  auto space = small_space();
  EngineConfig ec;
  ec.samples = 200;
  ec.candidates = 10;
  ec.budget = 3;
  QuestionnaireEngine engine(space, space->market_against(0), ec);
  ASSERT_TRUE(engine.state().next.has_value());
  EXPECT_NE(engine.state().next->first, engine.state().next->second);
  EXPECT_TRUE(engine.state().scores.empty());
  EXPECT_THROW(engine.respond(space->size()), ValidationError);
  engine.respond(engine.state().next->first);
  EXPECT_EQ(engine.state().q, 1u);
  EXPECT_EQ(engine.state().scores.size(), 10u);
  engine.respond(engine.state().next->second);
  engine.respond(engine.state().next->first);
  EXPECT_TRUE(engine.complete());
  EXPECT_THROW(engine.respond(0), ValidationError);
}

// Replaying the same answers reproduces every round exactly.
TEST(Engine, ReplayIsDeterministic) {
  auto space = small_space();
  EngineConfig ec;
  ec.samples = 150;
  ec.candidates = 8;
  ec.budget = 6;
  ec.seed = 99;
  for (Strategy s : {Strategy::kGisa, Strategy::kAbernethy}) {
    ec.strategy = s;
    QuestionnaireEngine a(space, space->market_against(4), ec);
    QuestionnaireEngine b(space, space->market_against(4), ec);
    while (!a.complete()) {
      ASSERT_EQ(a.state().next, b.state().next);
      EXPECT_EQ(a.state().samples.samples, b.state().samples.samples);
      const std::size_t w = a.state().next->second;
      a.respond(w);
      b.respond(w);
    }
    EXPECT_TRUE(b.complete());
    EXPECT_EQ(a.asked().size(), 6u);
  }
}

TEST(RunQuestionnaire, ZeroBudgetHasOneRow) {
  auto space = small_space();
  RunConfig rc;
  rc.queries = 0;
  rc.samples = 100;
  rc.candidates = 4;
  const RunMetrics m = run_questionnaire(space, Eigen::VectorXd::Ones(6) * 0.1, rc);
  ASSERT_EQ(m.rows.size(), 1u);
  EXPECT_FALSE(m.rows[0].query.has_value());
  EXPECT_TRUE(m.competitor.has_value());
}

TEST(RunQuestionnaire, MetricsAreConsistent) {
  auto space = small_space();
  std::mt19937_64 rng(3);
  const Eigen::VectorXd w_star = test::random_vector(space->dimension(), rng, 0.3);
  for (Strategy s : {Strategy::kGisa, Strategy::kAbernethy}) {
    RunConfig rc;
    rc.strategy = s;
    rc.queries = 8;
    rc.samples = 200;
    rc.candidates = 10;
    rc.seed = 4;
    const RunMetrics m = run_questionnaire(space, w_star, rc);
    ASSERT_EQ(m.rows.size(), 9u);
    EXPECT_EQ(m.k_star, optimal_design(100.0 * w_star, space->market_against(*m.competitor)));
    for (std::size_t q = 0; q < m.rows.size(); ++q) {
      const MetricsRow& r = m.rows[q];
      EXPECT_EQ(r.q, q);
      EXPECT_GE(r.profit_gap, 0.0);
      EXPECT_GE(r.expected_profit_gap, 0.0);
      EXPECT_GE(r.pi_kstar, 0.0);
      EXPECT_LE(r.pi_kstar, 1.0);
      EXPECT_LE(r.entropy, std::log2(static_cast<double>(space->size())) + 1e-12);
      if (r.correct) {
        EXPECT_EQ(r.recommendation, m.k_star);
      }
      EXPECT_EQ(r.query.has_value(), q < 8);
      EXPECT_EQ(r.winner.has_value(), q < 8);
      if (r.winner) {
        EXPECT_TRUE(*r.winner == r.query->first || *r.winner == r.query->second);
      }
    }
  }
}

TEST(RunQuestionnaire, RejectsBadConfig) {
  auto space = small_space();
  RunConfig rc;
  rc.theta = 0.0;
  EXPECT_THROW(run_questionnaire(space, Eigen::VectorXd::Zero(6), rc), ValidationError);
  rc = {};
  rc.competitor = 1000;
  EXPECT_THROW(run_questionnaire(space, Eigen::VectorXd::Zero(6), rc), ValidationError);
  rc = {};
  EXPECT_THROW(run_questionnaire(space, Eigen::VectorXd::Zero(5), rc), ValidationError);
}

// A tiny space where the budget exceeds the number of pairs: the run stops
// when candidates run out and the aggregate pads with the last row.
TEST(CompareStrategies, ShortRunsArePadded) {
  auto space = test::make_space({2}, {1, 2}, {{0.0, 0.5}});
  CompareConfig cc;
  cc.queries = 4;
  cc.runs = 3;
  cc.samples = 100;
  cc.candidates = 4;
  const Comparison c = compare_strategies(space, Eigen::VectorXd::Ones(1), cc);
  ASSERT_EQ(c.runs.size(), 6u);
  for (const auto& r : c.runs) EXPECT_EQ(r.rows.size(), 2u);
  ASSERT_EQ(c.table.size(), 10u);
  EXPECT_EQ(c.table[4].pi_kstar, c.table[1].pi_kstar);
  for (std::size_t t = 0; t < 3; ++t) EXPECT_EQ(c.runs[t].seed, c.runs[3 + t].seed);
}

TEST(CompareStrategies, CsvIsReproducible) {
  auto space = small_space();
  CompareConfig cc;
  cc.queries = 5;
  cc.runs = 2;
  cc.samples = 100;
  cc.candidates = 6;
  cc.seed = 12;
  const Eigen::VectorXd w = Eigen::VectorXd::LinSpaced(6, -0.2, 0.3);
  std::ostringstream a, b, sa, sb;
  const Comparison c1 = compare_strategies(space, w, cc);
  const Comparison c2 = compare_strategies(space, w, cc);
  write_runs_csv(a, c1.runs);
  write_runs_csv(b, c2.runs);
  write_comparison_csv(sa, c1.table);
  write_comparison_csv(sb, c2.table);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(sa.str(), sb.str());
  cc.seed = 13;
  std::ostringstream other;
  write_runs_csv(other, compare_strategies(space, w, cc).runs);
  EXPECT_NE(a.str(), other.str());
}

TEST(NarrowSegment, RequiresDialScaleSchema) {
  EXPECT_THROW(narrow_segment_fixture(*small_space()), ValidationError);
}

TEST(Strategy, ParseAndPrint) {
  EXPECT_EQ(parse_strategy("gisa"), Strategy::kGisa);
  EXPECT_EQ(to_string(parse_strategy("abernethy")), "abernethy");
  EXPECT_THROW(parse_strategy("GISA"), ValidationError);
}
