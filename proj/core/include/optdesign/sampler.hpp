#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "optdesign/estimation.hpp"

namespace optdesign {

enum class SamplerMode { kConeMh, kAdaptiveMetropolis };

std::string_view to_string(SamplerMode mode);

struct SampleSet {
  Eigen::MatrixXd samples;  // J x D, one part-worth per row
  double acceptance_rate = 0.0;
  SamplerMode mode = SamplerMode::kConeMh;

  std::size_t size() const { return static_cast<std::size_t>(samples.rows()); }
};

/// Drops every pair of rows {r, -r}. Each row cancels at most one exact
/// opposite; unmatched rows (including duplicates) survive in input order.
Eigen::MatrixXd reduce_contradictions(const Eigen::MatrixXd& deltas);

/// Chord of the line w_old + t d inside the cone {w : R w <= 0}, where R
/// holds loser-minus-winner rows. Sides without a constraint are clamped
/// to -clamp / +clamp.
struct StepBounds {
  double lower = 0.0;
  double upper = 0.0;
};

StepBounds cone_step_bounds(const Eigen::MatrixXd& reduced, const Eigen::VectorXd& w_old,
                            const Eigen::VectorXd& direction, double clamp = 1e3);

/// Strictly feasible point of the cone near `start`; throws SamplerError if
/// the cone has no interior point that can be found.
Eigen::VectorXd cone_interior_point(const Eigen::MatrixXd& reduced, const Eigen::VectorXd& start);

struct SamplerOptions {
  std::size_t samples = 1000;  // J; the chain runs 2J steps
  std::uint64_t seed = 1;
  double bound_clamp = 1e3;
  // Adaptive Metropolis settings.
  std::size_t adaptation_start = 100;
  double target_acceptance = 0.255;
  // When the reduced cone has no interior, sample the full posterior with
  // adaptive Metropolis instead of throwing.
  bool fallback_on_infeasible = false;
  bool record_trace = false;
};

struct ChainTraceRow {
  std::size_t iteration = 0;
  double norm = 0.0;
  bool accepted = false;
};

struct SamplerResult {
  SampleSet set;
  std::vector<ChainTraceRow> trace;
};

/// Metropolis-Hastings over the posterior with proposals confined to the
/// cone of non-contradicted responses (hit-and-run style chords), or
/// adaptive Metropolis when that cone is unconstrained.
SamplerResult mh_sample_traced(const Posterior& posterior, const Eigen::VectorXd& init,
                               const SamplerOptions& options);

inline SampleSet mh_sample(const Posterior& posterior, const Eigen::VectorXd& init,
                           const SamplerOptions& options) {
  return mh_sample_traced(posterior, init, options).set;
}

}  // namespace optdesign
