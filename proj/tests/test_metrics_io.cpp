#include <gtest/gtest.h>

#include <sstream>

#include <json.hpp>

#include "optdesign/metrics_io.hpp"

using namespace optdesign;

namespace {

RunMetrics sample_run() {
  RunMetrics m;
  m.strategy = Strategy::kAbernethy;
  m.seed = 42;
  m.competitor = 3;
  m.k_star = 7;
  MetricsRow r0;
  r0.q = 0;
  r0.pi_kstar = 0.125;
  r0.entropy = 1.0 / 3.0;
  r0.query = Query{1, 2};
  r0.winner = 2;
  MetricsRow r1;
  r1.q = 1;
  r1.correct = true;
  r1.mode = SamplerMode::kAdaptiveMetropolis;
  m.rows = {r0, r1};
  return m;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST(FormatNumber, TwelveSignificantDigits) {
  EXPECT_EQ(format_number(1.0 / 3.0), "0.333333333333");
  EXPECT_EQ(format_number(0.0), "0");
  EXPECT_EQ(format_number(1e-20), "1e-20");
  EXPECT_EQ(format_number(-2.5), "-2.5");
}

TEST(RunsCsv, HeaderAndRows) {
  std::ostringstream out;
  write_runs_csv(out, {sample_run()});
  const auto l = lines(out.str());
  ASSERT_EQ(l.size(), 3u);
  EXPECT_EQ(l[0],
            "strategy,run,seed,competitor,k_star,q,pi_kstar,correct,c_hat,d_hat,entropy,"
            "profit_gap,expected_profit_gap,prior_strength,sampler,acceptance,recommendation,"
            "query_first,query_second,winner");
  EXPECT_EQ(l[1], "abernethy,0,42,3,7,0,0.125,0,0,0,0.333333333333,0,0,1,cone-MH,0,0,1,2,2");
  EXPECT_EQ(l[2], "abernethy,0,42,3,7,1,0,1,0,0,0,0,0,1,adaptive-metropolis,0,0,,,");
}

TEST(RunsJson, RoundTripsThroughParser) {
  const auto doc = nlohmann::json::parse(runs_json({sample_run()}));
  ASSERT_EQ(doc.size(), 1u);
  EXPECT_EQ(doc[0]["k_star"], 7);
  EXPECT_EQ(doc[0]["rows"][0]["query"], nlohmann::json({1, 2}));
  EXPECT_TRUE(doc[0]["rows"][1]["winner"].is_null());
}

TEST(ComparisonOutputs, CsvAndJsonAgree) {
  AggregateRow a;
  a.q = 5;
  a.correct = 0.75;
  a.correct_sem = 0.1;
  std::ostringstream out;
  write_comparison_csv(out, {a});
  const auto l = lines(out.str());
  ASSERT_EQ(l.size(), 2u);
  EXPECT_EQ(l[1], "gisa,5,0,0,0.75,0.1,0,0,0,0,0,0,0,0");
  const auto doc = nlohmann::json::parse(comparison_json({a}));
  EXPECT_EQ(doc[0]["correct"], 0.75);
  EXPECT_EQ(doc[0]["q"], 5);
}

TEST(SegmentMapCsv, OneRowPerGridPoint) {
  Market m;
  m.products.resize(2, 2);
  m.products << 1, 0, -1, 0;
  m.margins = Eigen::Vector2d(1, 1);
  m.competitor = Eigen::Vector2d(0, 0);
  PlaneGrid g;
  g.nx = 3;
  g.ny = 2;
  std::ostringstream out;
  write_segment_map_csv(out, segment_map(m, g));
  const auto l = lines(out.str());
  ASSERT_EQ(l.size(), 7u);
  EXPECT_EQ(l[0], "ix,iy,w1,w2,label");
  EXPECT_EQ(l[1], "0,0,-10,-10,1");
  EXPECT_EQ(l[3], "2,0,10,-10,0");
}

TEST(QueryScoresCsv, Columns) {
  QueryScore s;
  s.query = {4, 9};
  s.pi_left = 0.5;
  s.rho = 0.5;
  s.l_tilde = 0.25;
  std::ostringstream out;
  write_query_scores_csv(out, {s});
  EXPECT_EQ(out.str(), "candidate,first,second,pi_l,rho,l_tilde\n0,4,9,0.5,0.5,0.25\n");
}
