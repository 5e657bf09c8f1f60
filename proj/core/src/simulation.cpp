#include "optdesign/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "optdesign/choice_model.hpp"
#include "optdesign/errors.hpp"

namespace optdesign {

namespace {

// Stream ids under a run seed.
constexpr std::uint64_t kEngineStream = 1;
constexpr std::uint64_t kRespondentStream = 2;
constexpr std::uint64_t kCompetitorStream = 3;
constexpr std::uint64_t kBootstrapStream = 4;
constexpr std::uint64_t kRunStreamBase = 1000;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::string_view to_string(Strategy s) {
  return s == Strategy::kGisa ? "gisa" : "abernethy";
}

Strategy parse_strategy(std::string_view name) {
  if (name == "gisa") return Strategy::kGisa;
  if (name == "abernethy") return Strategy::kAbernethy;
  throw ValidationError("unknown strategy '" + std::string(name) + "' (expected gisa or abernethy)");
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

double wrong_choice_probability(double theta, double gap) {
  return sigmoid(-theta * std::abs(gap));
}

std::size_t simulate_response(const RespondentModel& model, const DesignSpace& space, Query query,
                              std::mt19937_64& rng) {
  if (query.first >= space.size() || query.second >= space.size()) {
    throw ValidationError("query refers to a design outside the space");
  }
  const double gap =
      (space.design(query.first).constrained - space.design(query.second).constrained)
          .dot(model.w_star);
  const double p_first = sigmoid(model.theta * gap);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  return unit(rng) < p_first ? query.first : query.second;
}

QuestionnaireEngine::QuestionnaireEngine(std::shared_ptr<const DesignSpace> space, Market market,
                                         EngineConfig config)
    : space_(std::move(space)),
      market_(std::move(market)),
      config_(std::move(config)),
      responses_(space_->dimension()) {
  if (market_.size() != space_->size() || market_.dimension() != space_->dimension()) {
    throw ValidationError("market does not match the design space");
  }
  if (config_.samples == 0) throw ValidationError("sample count J must be at least 1");
  if (config_.strategy == Strategy::kGisa && config_.candidates < 2) {
    throw ValidationError("candidate count N must be at least 2");
  }
  update();
}

const RoundState& QuestionnaireEngine::respond(std::size_t winner) {
  if (!state_.next) throw ValidationError("questionnaire is complete");
  const Query q = *state_.next;
  if (winner != q.first && winner != q.second) {
    throw ValidationError("chosen design is not part of the outstanding query");
  }
  const std::size_t loser = winner == q.first ? q.second : q.first;
  responses_.add(*space_, winner, loser, static_cast<int>(responses_.size()));
  asked_.insert(q);
  update();
  return state_;
}

void QuestionnaireEngine::update() {
  const std::size_t q = responses_.size();
  state_.q = q;
  state_.fit = fit_posterior(responses_, config_.fit);

  SamplerOptions so;
  so.samples = config_.samples;
  so.seed = derive_seed(config_.seed, 2 * q + 1);
  so.fallback_on_infeasible = true;
  const Posterior posterior(state_.fit.cv.prior_strength, responses_);
  state_.samples = mh_sample(posterior, state_.fit.map.w, so);
  state_.masses = estimate_masses(state_.samples, market_);

  state_.next.reset();
  state_.scores.clear();
  if (q >= config_.budget) return;

  const std::size_t k = space_->size();
  if (q == 0) {
    std::mt19937_64 rng(derive_seed(config_.seed, 2 * q));
    std::uniform_int_distribution<std::size_t> pick_i(0, k - 1);
    std::uniform_int_distribution<std::size_t> pick_j(0, k - 2);
    const std::size_t i = pick_i(rng);
    std::size_t j = pick_j(rng);
    if (j >= i) ++j;
    state_.next = Query{i, j};
    return;
  }

  const BaselineState baseline = BaselineState::from_fit(state_.fit);
  if (config_.strategy == Strategy::kGisa) {
    const auto candidates =
        generate_candidates(state_.masses, baseline, *space_, asked_, config_.candidates);
    if (candidates.empty()) return;
    QuerySelection sel = select_query(candidates, state_.samples, state_.masses, market_);
    state_.next = sel.query;
    state_.scores = std::move(sel.table);
  } else {
    const auto best = rank_design_pairs(baseline, *space_, asked_, 1);
    if (!best.empty()) state_.next = best.front();
  }
}

void RunConfig::validate() const {
  if (!(theta > 0.0) || !std::isfinite(theta)) throw ValidationError("theta must be positive");
  if (samples == 0) throw ValidationError("J must be at least 1");
  if (candidates < 2) throw ValidationError("N must be at least 2");
}

void CompareConfig::validate() const {
  if (strategies.empty()) throw ValidationError("no strategies to compare");
  if (runs == 0) throw ValidationError("T must be at least 1");
  if (bootstrap == 0) throw ValidationError("bootstrap resample count must be positive");
  RunConfig{strategies.front(), theta, queries, samples, candidates, seed, competitor}.validate();
}

double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size() || a.size() < 2) return 0.0;
  const Eigen::ArrayXd da = a.array() - a.mean();
  const Eigen::ArrayXd db = b.array() - b.mean();
  const double sa = std::sqrt((da * da).sum());
  const double sb = std::sqrt((db * db).sum());
  if (sa == 0.0 || sb == 0.0) return 0.0;
  return std::clamp((da * db).sum() / (sa * sb), -1.0, 1.0);
}

Eigen::VectorXd expected_profits(const SampleSet& samples, const Market& market) {
  const Eigen::Index j_count = samples.samples.rows();
  Eigen::VectorXd total = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(market.size()));
  if (j_count == 0) return total;
  const Eigen::VectorXd u0 = samples.samples * market.competitor;
  constexpr Eigen::Index kBlock = 64;
  Eigen::MatrixXd u;
  for (Eigen::Index start = 0; start < j_count; start += kBlock) {
    const Eigen::Index rows = std::min(kBlock, j_count - start);
    u.noalias() = market.products * samples.samples.middleRows(start, rows).transpose();
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index k = 0; k < u.rows(); ++k) {
        total[k] += sigmoid(u(k, r) - u0[start + r]) * market.margins[k];
      }
    }
  }
  return total / static_cast<double>(j_count);
}

RunMetrics run_questionnaire(std::shared_ptr<const DesignSpace> space, const Eigen::VectorXd& w_star,
                             const RunConfig& config) {
  config.validate();
  if (static_cast<std::size_t>(w_star.size()) != space->dimension()) {
    throw ValidationError("true part-worth does not match the design space dimension");
  }
  RunMetrics m;
  m.strategy = config.strategy;
  m.seed = config.seed;

  Market market;
  if (config.competitor) {
    if (*config.competitor >= space->size()) throw ValidationError("competitor index out of range");
    m.competitor = config.competitor;
    market = space->market_against(*config.competitor);
  } else if (space->competitor()) {
    market = space->market(*space->competitor());
  } else {
    std::mt19937_64 rng(derive_seed(config.seed, kCompetitorStream));
    std::uniform_int_distribution<std::size_t> pick(0, space->size() - 1);
    m.competitor = pick(rng);
    market = space->market_against(*m.competitor);
  }

  // Respondents answer with theta w*, so the true optimum is judged there.
  const Eigen::VectorXd true_w = config.theta * w_star;
  const Eigen::VectorXd true_profit = profit_profile(true_w, market).profits;
  m.k_star = optimal_design(true_w, market);

  EngineConfig ec;
  ec.strategy = config.strategy;
  ec.samples = config.samples;
  ec.candidates = config.candidates;
  ec.budget = config.queries;
  ec.seed = derive_seed(config.seed, kEngineStream);
  QuestionnaireEngine engine(space, market, ec);
  const RespondentModel model{w_star, config.theta};
  std::mt19937_64 respondent(derive_seed(config.seed, kRespondentStream));

  const auto k_star = static_cast<Eigen::Index>(m.k_star);
  while (true) {
    const RoundState& s = engine.state();
    MetricsRow row;
    row.q = s.q;
    row.pi_kstar = s.masses.pi[k_star];
    row.correct = true;
    for (Eigen::Index k = 0; k < s.masses.pi.size(); ++k) {
      if (k != k_star && !(s.masses.pi[k_star] > s.masses.pi[k])) {
        row.correct = false;
        break;
      }
    }
    const Eigen::VectorXd& w_hat = s.fit.map.w;
    row.c_hat = pearson(w_hat, w_star);
    row.d_hat = (w_hat - w_star).norm();
    row.entropy = s.masses.entropy;
    row.recommendation = most_probable(s.masses);
    row.profit_gap = true_profit[k_star] - true_profit[static_cast<Eigen::Index>(row.recommendation)];
    Eigen::Index best_expected = 0;
    expected_profits(s.samples, market).maxCoeff(&best_expected);
    row.expected_profit_gap = true_profit[k_star] - true_profit[best_expected];
    row.prior_strength = s.fit.cv.prior_strength;
    row.mode = s.samples.mode;
    row.acceptance = s.samples.acceptance_rate;
    row.query = s.next;
    m.rows.push_back(row);
    if (engine.complete()) break;
    const std::size_t winner = simulate_response(model, *space, *s.next, respondent);
    m.rows.back().winner = winner;
    engine.respond(winner);
  }
  return m;
}

double bootstrap_sem(std::span<const double> values, std::size_t resamples, std::uint64_t seed) {
  const std::size_t n = values.size();
  if (n == 0 || resamples < 2) return 0.0;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<double> means(resamples);
  for (double& mean : means) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += values[pick(rng)];
    mean = sum / static_cast<double>(n);
  }
  double mu = 0.0;
  for (double x : means) mu += x;
  mu /= static_cast<double>(resamples);
  double ss = 0.0;
  for (double x : means) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / static_cast<double>(resamples - 1));
}

Comparison compare_strategies(std::shared_ptr<const DesignSpace> space,
                              const Eigen::VectorXd& w_star, const CompareConfig& config) {
  config.validate();
  Comparison out;
  const std::uint64_t boot_seed = derive_seed(config.seed, kBootstrapStream);
  for (Strategy strategy : config.strategies) {
    const std::size_t first_run = out.runs.size();
    for (std::size_t t = 0; t < config.runs; ++t) {
      RunConfig rc{strategy,          config.theta,
                   config.queries,    config.samples,
                   config.candidates, derive_seed(config.seed, kRunStreamBase + t),
                   config.competitor};
      out.runs.push_back(run_questionnaire(space, w_star, rc));
    }
    std::vector<double> vals(config.runs);
    const auto stat = [&](auto field, double& mean, double& sem) {
      double sum = 0.0;
      for (std::size_t t = 0; t < config.runs; ++t) sum += vals[t] = field(t);
      mean = sum / static_cast<double>(config.runs);
      sem = bootstrap_sem(vals, config.bootstrap, boot_seed);
    };
    for (std::size_t q = 0; q <= config.queries; ++q) {
      const auto row = [&](std::size_t t) -> const MetricsRow& {
        const auto& rows = out.runs[first_run + t].rows;
        return rows[std::min(q, rows.size() - 1)];
      };
      AggregateRow a;
      a.strategy = strategy;
      a.q = q;
      stat([&](std::size_t t) { return row(t).pi_kstar; }, a.pi_kstar, a.pi_kstar_sem);
      stat([&](std::size_t t) { return row(t).correct ? 1.0 : 0.0; }, a.correct, a.correct_sem);
      stat([&](std::size_t t) { return row(t).c_hat; }, a.c_hat, a.c_hat_sem);
      stat([&](std::size_t t) { return row(t).d_hat; }, a.d_hat, a.d_hat_sem);
      stat([&](std::size_t t) { return row(t).entropy; }, a.entropy, a.entropy_sem);
      stat([&](std::size_t t) { return row(t).profit_gap; }, a.profit_gap, a.profit_gap_sem);
      out.table.push_back(a);
    }
  }
  return out;
}

NarrowSegmentFixture narrow_segment_fixture(const DesignSpace& space) {
  const AttributeSchema& schema = space.schema();
  if (schema.attribute_count() != 6) {
    throw ValidationError("narrow-segment fixture needs the six-attribute dial-scale schema");
  }
  const auto locate = [&](const std::vector<std::string>& labels) {
    LevelIndex li;
    for (std::size_t a = 0; a < labels.size(); ++a) {
      const auto level = schema.find_level(a, labels[a]);
      if (!level) {
        throw ValidationError("narrow-segment fixture: attribute '" + schema.attributes()[a].name +
                              "' has no level '" + labels[a] + "'");
      }
      li.push_back(*level);
    }
    const auto k = space.find(li);
    if (!k) throw ValidationError("narrow-segment fixture design is not in the design space");
    return *k;
  };
  NarrowSegmentFixture f;
  f.z1 = locate({"300", "8/8", "120", "5/32", "1.25", "25"});
  f.z2 = locate({"300", "8/8", "120", "5/32", "1.25", "30"});
  f.z3 = locate({"250", "7/8", "140", "3/32", "0.75", "10"});
  return f;
}

}  // namespace optdesign
