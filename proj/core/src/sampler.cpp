#include "optdesign/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "optdesign/errors.hpp"

namespace optdesign {

std::string_view to_string(SamplerMode mode) {
  switch (mode) {
    case SamplerMode::kConeMh:
      return "cone-MH";
    case SamplerMode::kAdaptiveMetropolis:
      return "adaptive-metropolis";
  }
  return "unknown";
}

Eigen::MatrixXd reduce_contradictions(const Eigen::MatrixXd& deltas) {
  const Eigen::Index n = deltas.rows();
  const Eigen::Index d = deltas.cols();
  std::vector<bool> removed(static_cast<std::size_t>(n), false);
  // Rows are keyed by value; each row may cancel one still-unmatched exact
  // opposite seen earlier.
  std::map<std::vector<double>, std::vector<Eigen::Index>> open;
  for (Eigen::Index r = 0; r < n; ++r) {
    std::vector<double> key(static_cast<std::size_t>(d));
    std::vector<double> neg(static_cast<std::size_t>(d));
    for (Eigen::Index c = 0; c < d; ++c) {
      key[static_cast<std::size_t>(c)] = deltas(r, c) + 0.0;  // folds -0.0 into 0.0
      neg[static_cast<std::size_t>(c)] = -deltas(r, c) + 0.0;
    }
    auto it = open.find(neg);
    if (it != open.end() && !it->second.empty()) {
      removed[static_cast<std::size_t>(it->second.front())] = true;
      removed[static_cast<std::size_t>(r)] = true;
      it->second.erase(it->second.begin());
    } else {
      open[key].push_back(r);
    }
  }
  const auto kept = static_cast<Eigen::Index>(std::count(removed.begin(), removed.end(), false));
  Eigen::MatrixXd out(kept, d);
  Eigen::Index o = 0;
  for (Eigen::Index r = 0; r < n; ++r) {
    if (!removed[static_cast<std::size_t>(r)]) out.row(o++) = deltas.row(r);
  }
  return out;
}

StepBounds cone_step_bounds(const Eigen::MatrixXd& reduced, const Eigen::VectorXd& w_old,
                            const Eigen::VectorXd& direction, double clamp) {
  if (reduced.cols() != w_old.size() || w_old.size() != direction.size()) {
    throw ValidationError("cone_step_bounds: dimension mismatch");
  }
  // With G = -reduced (winner minus loser) the cone is G w >= 0, and
  // G (w_old + t d) >= 0  <=>  t a_i >= b_i  with a = G d, b = -G w_old.
  const Eigen::VectorXd a = -(reduced * direction);
  const Eigen::VectorXd b = reduced * w_old;
  StepBounds out{-std::numeric_limits<double>::infinity(),
                 std::numeric_limits<double>::infinity()};
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (!(b[i] < 0.0)) {
      throw SamplerError("cone_step_bounds: current point violates constraint row " +
                         std::to_string(i) + " (slack " + std::to_string(-b[i]) + ")");
    }
    if (a[i] > 0.0) {
      out.lower = std::max(out.lower, b[i] / a[i]);
    } else if (a[i] < 0.0) {
      out.upper = std::min(out.upper, b[i] / a[i]);
    }
  }
  if (std::isinf(out.lower)) out.lower = -clamp;
  if (std::isinf(out.upper)) out.upper = clamp;
  return out;
}

namespace {

bool strictly_inside(const Eigen::MatrixXd& reduced, const Eigen::VectorXd& w) {
  return reduced.rows() == 0 || (reduced * w).maxCoeff() < 0.0;
}

std::string violated_rows(const Eigen::MatrixXd& reduced, const Eigen::VectorXd& w) {
  const Eigen::VectorXd s = reduced * w;
  std::string out;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (!(s[i] < 0.0)) {
      if (!out.empty()) out += ", ";
      out += std::to_string(i);
    }
  }
  return out;
}

}  // namespace

Eigen::VectorXd cone_interior_point(const Eigen::MatrixXd& reduced, const Eigen::VectorXd& start) {
  if (strictly_inside(reduced, start)) return start;

  // Direction of (approximately) maximal normalized margin: weakly
  // regularized logistic fit on the unit-normalized cone rows.
  const Eigen::Index d = reduced.cols();
  ResponseSet normalized(static_cast<std::size_t>(d));
  for (Eigen::Index r = 0; r < reduced.rows(); ++r) {
    const double n = reduced.row(r).norm();
    if (n == 0.0) continue;
    normalized.add(Response{0, 1, static_cast<int>(r)}, reduced.row(r).transpose() / n);
  }
  MapOptions mo;
  mo.max_iterations = 200;
  Eigen::VectorXd center = map_estimate(Posterior(1e8, normalized), mo).w;

  if (!strictly_inside(reduced, center)) {
    // Relaxation (perceptron) passes as a second attempt.
    for (int pass = 0; pass < 2000 && !strictly_inside(reduced, center); ++pass) {
      const Eigen::VectorXd s = reduced * center;
      for (Eigen::Index r = 0; r < s.size(); ++r) {
        if (!(s[r] < 0.0)) {
          const double n2 = reduced.row(r).squaredNorm();
          if (n2 > 0.0) center -= reduced.row(r).transpose() * ((s[r] + 1e-3) / n2);
        }
      }
    }
  }
  if (!strictly_inside(reduced, center) || center.norm() == 0.0) {
    throw SamplerError("response cone has no interior point; offending rows: " +
                       violated_rows(reduced, center));
  }
  center.normalize();
  for (double step = 1e-6; step < 1e12; step *= 2.0) {
    const Eigen::VectorXd w = start + step * center;
    if (strictly_inside(reduced, w)) return w;
  }
  return center;
}

namespace {

Eigen::VectorXd unit_direction(std::mt19937_64& rng, Eigen::Index d) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(d);
  double n = 0.0;
  while (n == 0.0) {
    for (Eigen::Index i = 0; i < d; ++i) v[i] = normal(rng);
    n = v.norm();
  }
  return v / n;
}

SamplerResult cone_mh(const Posterior& posterior, const Eigen::MatrixXd& reduced,
                      const Eigen::VectorXd& init, const SamplerOptions& options,
                      std::mt19937_64& rng) {
  const Eigen::Index d = static_cast<Eigen::Index>(posterior.dimension());
  const std::size_t steps = 2 * options.samples;
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  SamplerResult out;
  out.set.mode = SamplerMode::kConeMh;
  out.set.samples.resize(static_cast<Eigen::Index>(options.samples), d);
  if (options.record_trace) out.trace.reserve(steps);

  Eigen::VectorXd w_old = init;
  double logp_old = -posterior.neg_log_density(w_old);
  std::size_t accepted = 0;
  for (std::size_t j = 0; j < steps; ++j) {
    StepBounds bounds{};
    Eigen::VectorXd dir;
    int attempts = 0;
    do {
      if (++attempts > 10000) {
        throw SamplerError("cone-MH: no direction with a non-degenerate chord");
      }
      dir = unit_direction(rng, d);
      bounds = cone_step_bounds(reduced, w_old, dir, options.bound_clamp);
    } while (!(bounds.upper > bounds.lower));

    double delta = bounds.lower;
    while (delta == bounds.lower) {
      delta = bounds.lower + (bounds.upper - bounds.lower) * unif(rng);
    }
    const Eigen::VectorXd w = w_old + delta * dir;
    bool accept = false;
    // Rounding can land a chord endpoint on the boundary; such proposals
    // are rejected so every stored state stays strictly inside.
    if (strictly_inside(reduced, w)) {
      const double logp = -posterior.neg_log_density(w);
      const double u = unif(rng);
      if (std::log(u) < logp - logp_old) {
        accept = true;
        w_old = w;
        logp_old = logp;
        ++accepted;
      }
    } else {
      (void)unif(rng);
    }
    if (j >= options.samples) {
      out.set.samples.row(static_cast<Eigen::Index>(j - options.samples)) = w_old.transpose();
    }
    if (options.record_trace) out.trace.push_back({j, w_old.norm(), accept});
  }
  out.set.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(steps);
  return out;
}

SamplerResult adaptive_metropolis(const Posterior& posterior, const Eigen::VectorXd& init,
                                  const SamplerOptions& options, std::mt19937_64& rng) {
  const Eigen::Index d = static_cast<Eigen::Index>(posterior.dimension());
  const std::size_t steps = 2 * options.samples;
  const double sd = 2.38 * 2.38 / static_cast<double>(d);
  const double c = posterior.prior_strength();
  // Small ridge keeps the empirical covariance positive definite.
  const double ridge = 1e-8 * std::min(c, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  SamplerResult out;
  out.set.mode = SamplerMode::kAdaptiveMetropolis;
  out.set.samples.resize(static_cast<Eigen::Index>(options.samples), d);
  if (options.record_trace) out.trace.reserve(steps);

  Eigen::MatrixXd chol = std::sqrt(c * sd) * Eigen::MatrixXd::Identity(d, d);
  double log_scale = 0.0;  // Robbins-Monro factor steering acceptance to target

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(d, d);  // sum of outer deviations
  std::size_t n_hist = 0;

  Eigen::VectorXd w_old = init;
  double logp_old = -posterior.neg_log_density(w_old);
  std::size_t accepted = 0;
  Eigen::VectorXd z(d);
  for (std::size_t j = 0; j < steps; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) z[i] = normal(rng);
    const Eigen::VectorXd w = w_old + std::exp(log_scale) * (chol * z);
    const double logp = -posterior.neg_log_density(w);
    const double log_alpha = std::min(0.0, logp - logp_old);
    const bool accept = std::log(unif(rng)) < log_alpha;
    if (accept) {
      w_old = w;
      logp_old = logp;
      ++accepted;
    }

    // Welford update of the chain history.
    ++n_hist;
    const Eigen::VectorXd dev = w_old - mean;
    mean += dev / static_cast<double>(n_hist);
    scatter.noalias() += dev * (w_old - mean).transpose();

    const double gain = std::pow(static_cast<double>(j + 1), -0.6);
    log_scale += gain * (std::exp(log_alpha) - options.target_acceptance);
    log_scale = std::clamp(log_scale, -20.0, 20.0);

    if (j + 1 >= options.adaptation_start && (j + 1) % 10 == 0 && n_hist > 1) {
      Eigen::MatrixXd cov = scatter / static_cast<double>(n_hist - 1);
      cov.diagonal().array() += ridge;
      Eigen::LLT<Eigen::MatrixXd> llt(sd * cov);
      if (llt.info() == Eigen::Success) chol = llt.matrixL();
    }

    if (j >= options.samples) {
      out.set.samples.row(static_cast<Eigen::Index>(j - options.samples)) = w_old.transpose();
    }
    if (options.record_trace) out.trace.push_back({j, w_old.norm(), accept});
  }
  out.set.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(steps);
  return out;
}

}  // namespace

SamplerResult mh_sample_traced(const Posterior& posterior, const Eigen::VectorXd& init,
                               const SamplerOptions& options) {
  if (options.samples == 0) {
    throw ValidationError("sampler needs J >= 1");
  }
  if (static_cast<std::size_t>(init.size()) != posterior.dimension()) {
    throw ValidationError("sampler start point has wrong dimension");
  }
  std::mt19937_64 rng(options.seed);
  const Eigen::MatrixXd reduced = reduce_contradictions(posterior.responses().deltas());
  if (reduced.rows() == 0) {
    return adaptive_metropolis(posterior, init, options, rng);
  }
  Eigen::VectorXd start;
  try {
    start = cone_interior_point(reduced, init);
  } catch (const SamplerError&) {
    if (!options.fallback_on_infeasible) throw;
    return adaptive_metropolis(posterior, init, options, rng);
  }
  return cone_mh(posterior, reduced, start, options, rng);
}

}  // namespace optdesign
