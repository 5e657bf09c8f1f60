#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "optdesign/abernethy.hpp"
#include "optdesign/design_space.hpp"
#include "optdesign/estimation.hpp"
#include "optdesign/gisa.hpp"
#include "optdesign/query.hpp"
#include "optdesign/sampler.hpp"

namespace optdesign {

enum class Strategy { kGisa, kAbernethy };

std::string_view to_string(Strategy s);
/// "gisa" or "abernethy"; throws ValidationError otherwise.
Strategy parse_strategy(std::string_view name);

/// Independent stream seed for (seed, stream). SplitMix64 mixing.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Simulated respondent choosing z_i over z_j with probability
/// sigmoid(theta (z_i - z_j)' w*).
struct RespondentModel {
  Eigen::VectorXd w_star;  // constrained coordinates
  double theta = 100.0;
};

/// Probability of choosing the lower-utility design at utility gap `gap`.
double wrong_choice_probability(double theta, double gap);

/// Winner (query.first or query.second).
std::size_t simulate_response(const RespondentModel& model, const DesignSpace& space, Query query,
                              std::mt19937_64& rng);

struct EngineConfig {
  Strategy strategy = Strategy::kGisa;
  std::size_t samples = 1000;    // J
  std::size_t candidates = 100;  // N
  std::size_t budget = 100;      // Q; no query is selected once reached
  std::uint64_t seed = 1;
  FitOptions fit;
};

/// Posterior state after q responses and the query chosen to ask next.
struct RoundState {
  std::size_t q = 0;
  PosteriorFit fit;
  SampleSet samples;
  GroupMasses masses;
  std::optional<Query> next;       // nullopt once the budget or candidates run out
  std::vector<QueryScore> scores;  // GISA candidate table, empty for the baseline
};

/// One adaptive questionnaire: refits, resamples and selects after every
/// response. Round seeds derive from (seed, q), so replaying the same
/// responses reproduces every state.
class QuestionnaireEngine {
 public:
  QuestionnaireEngine(std::shared_ptr<const DesignSpace> space, Market market,
                      EngineConfig config);

  const RoundState& state() const { return state_; }
  const ResponseSet& responses() const { return responses_; }
  const QuerySet& asked() const { return asked_; }
  const DesignSpace& space() const { return *space_; }
  const Market& market() const { return market_; }
  const EngineConfig& config() const { return config_; }
  bool complete() const { return !state_.next.has_value(); }

  /// Answers the outstanding query. Throws ValidationError when `winner`
  /// is not part of it or the questionnaire is complete.
  const RoundState& respond(std::size_t winner);

 private:
  void update();

  std::shared_ptr<const DesignSpace> space_;
  Market market_;
  EngineConfig config_;
  ResponseSet responses_;
  QuerySet asked_;
  RoundState state_;
};

struct MetricsRow {
  std::size_t q = 0;
  double pi_kstar = 0.0;
  bool correct = false;
  double c_hat = 0.0;
  double d_hat = 0.0;
  double entropy = 0.0;
  double profit_gap = 0.0;           // recommendation = argmax pi
  double expected_profit_gap = 0.0;  // recommendation = argmax posterior mean profit
  double prior_strength = 1.0;
  SamplerMode mode = SamplerMode::kConeMh;
  double acceptance = 0.0;
  std::size_t recommendation = 0;
  std::optional<Query> query;  // asked after this row
  std::optional<std::size_t> winner;
};

struct RunMetrics {
  Strategy strategy = Strategy::kGisa;
  std::uint64_t seed = 0;
  std::optional<std::size_t> competitor;  // nullopt when pinned by the space file
  std::size_t k_star = 0;
  std::vector<MetricsRow> rows;  // q = 0..Q, shorter if candidates ran out
};

struct RunConfig {
  Strategy strategy = Strategy::kGisa;
  double theta = 100.0;
  std::size_t queries = 100;     // Q
  std::size_t samples = 1000;    // J
  std::size_t candidates = 100;  // N
  std::uint64_t seed = 1;
  std::optional<std::size_t> competitor;  // design index; random when unset and not pinned

  void validate() const;
};

/// Pearson correlation; 0 when either vector is constant.
double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Posterior mean profit per design over the sample set.
Eigen::VectorXd expected_profits(const SampleSet& samples, const Market& market);

RunMetrics run_questionnaire(std::shared_ptr<const DesignSpace> space, const Eigen::VectorXd& w_star,
                             const RunConfig& config);

/// SD of 100 (or `resamples`) bootstrap resample means.
double bootstrap_sem(std::span<const double> values, std::size_t resamples, std::uint64_t seed);

struct CompareConfig {
  std::vector<Strategy> strategies{Strategy::kGisa, Strategy::kAbernethy};
  double theta = 100.0;
  std::size_t queries = 100;
  std::size_t runs = 20;  // T
  std::size_t samples = 1000;
  std::size_t candidates = 100;
  std::uint64_t seed = 1;
  std::size_t bootstrap = 100;
  std::optional<std::size_t> competitor;

  void validate() const;
};

struct AggregateRow {
  Strategy strategy = Strategy::kGisa;
  std::size_t q = 0;
  double pi_kstar = 0.0, pi_kstar_sem = 0.0;
  double correct = 0.0, correct_sem = 0.0;
  double c_hat = 0.0, c_hat_sem = 0.0;
  double d_hat = 0.0, d_hat_sem = 0.0;
  double entropy = 0.0, entropy_sem = 0.0;
  double profit_gap = 0.0, profit_gap_sem = 0.0;
};

struct Comparison {
  std::vector<RunMetrics> runs;     // strategy-major, then run index
  std::vector<AggregateRow> table;  // strategy-major, then q
};

/// T runs per strategy. Run t uses the same seed (and so the same
/// competitor) under every strategy. Runs that stop early are padded by
/// carrying their last row forward.
Comparison compare_strategies(std::shared_ptr<const DesignSpace> space,
                              const Eigen::VectorXd& w_star, const CompareConfig& config);

/// The three designs of the narrow-segment case on the dial-scale schema.
struct NarrowSegmentFixture {
  std::size_t z1 = 0;
  std::size_t z2 = 0;
  std::size_t z3 = 0;  // competitor
};

/// Throws ValidationError when any of the three designs is missing.
NarrowSegmentFixture narrow_segment_fixture(const DesignSpace& space);

}  // namespace optdesign
