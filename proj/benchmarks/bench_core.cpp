#include <benchmark/benchmark.h>

#include <memory>
#include <random>
#include <string>

#include "optdesign/abernethy.hpp"
#include "optdesign/design_space.hpp"
#include "optdesign/estimation.hpp"
#include "optdesign/gisa.hpp"
#include "optdesign/sampler.hpp"
#include "optdesign/simulation.hpp"

using namespace optdesign;

namespace {

std::shared_ptr<const DesignSpace> dial_2455() {
  static const auto space = std::make_shared<const DesignSpace>(
      load_design_space(std::string(OPTDESIGN_DATA_DIR) + "/dial_scale_2455.json"));
  return space;
}

// A posterior after `q` simulated answers on the 2455-design space.
struct Fixture {
  std::shared_ptr<const DesignSpace> space = dial_2455();
  Market market;
  ResponseSet responses;
  PosteriorFit fit;
  SampleSet samples;
  GroupMasses masses;

  explicit Fixture(std::size_t q) : responses(space->dimension()) {
    const Eigen::VectorXd w_star =
        load_part_worths(space->schema(), std::string(OPTDESIGN_DATA_DIR) + "/dial_scale_partworths.csv");
    market = space->competitor() ? space->market(*space->competitor()) : space->market_against(0);
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<std::size_t> pick(0, space->size() - 1);
    const RespondentModel model{w_star, 100.0};
    while (responses.size() < q) {
      const Query query{pick(rng), pick(rng)};
      if (query.first == query.second) continue;
      const std::size_t w = simulate_response(model, *space, query, rng);
      responses.add(*space, w, w == query.first ? query.second : query.first);
    }
    fit = fit_posterior(responses);
    SamplerOptions so;
    so.fallback_on_infeasible = true;
    samples = mh_sample(Posterior(fit.cv.prior_strength, responses), fit.map.w, so);
    masses = estimate_masses(samples, market);
  }
};

void BM_MapEstimate(benchmark::State& state) {
  const Fixture f(static_cast<std::size_t>(state.range(0)));
  const Posterior post(1.0, f.responses);
  for (auto _ : state) benchmark::DoNotOptimize(map_estimate(post).w);
}
BENCHMARK(BM_MapEstimate)->Arg(10)->Arg(50)->Unit(benchmark::kMicrosecond);

void BM_FitPosterior(benchmark::State& state) {
  const Fixture f(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fit_posterior(f.responses).map.w);
}
BENCHMARK(BM_FitPosterior)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_Sampler(benchmark::State& state) {
  const Fixture f(20);
  const Posterior post(f.fit.cv.prior_strength, f.responses);
  SamplerOptions so;
  so.fallback_on_infeasible = true;
  for (auto _ : state) benchmark::DoNotOptimize(mh_sample(post, f.fit.map.w, so).acceptance_rate);
}
BENCHMARK(BM_Sampler)->Unit(benchmark::kMillisecond);

void BM_EstimateMasses(benchmark::State& state) {
  const Fixture f(20);
  for (auto _ : state) benchmark::DoNotOptimize(estimate_masses(f.samples, f.market).entropy);
}
BENCHMARK(BM_EstimateMasses)->Unit(benchmark::kMillisecond);

void BM_GisaSelection(benchmark::State& state) {
  const Fixture f(20);
  const BaselineState baseline = BaselineState::from_fit(f.fit);
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    const auto candidates = generate_candidates(f.masses, baseline, *f.space, QuerySet{}, n);
    benchmark::DoNotOptimize(select_query(candidates, f.samples, f.masses, f.market).chosen);
  }
}
BENCHMARK(BM_GisaSelection)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_BaselineRanking(benchmark::State& state) {
  const Fixture f(20);
  const BaselineState baseline = BaselineState::from_fit(f.fit);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rank_design_pairs(baseline, *f.space, QuerySet{}, 50).size());
  }
}
BENCHMARK(BM_BaselineRanking)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
