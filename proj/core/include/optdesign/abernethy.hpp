#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "optdesign/estimation.hpp"
#include "optdesign/query.hpp"

namespace optdesign {

class DesignSpace;

/// Utility-balance / minimax-variance baseline state: the MAP estimate and
/// the smallest-curvature direction v of the Hessian projected off w_hat.
struct BaselineState {
  Eigen::VectorXd w_hat;
  Eigen::MatrixXd projected_hessian;
  Eigen::VectorXd v;

  static BaselineState from_fit(const PosteriorFit& fit);
};

/// Rounds to `digits` significant decimal digits.
double round_significant(double x, int digits);

struct CandidateScores {
  Eigen::VectorXd c1;       // |row . w_hat|
  Eigen::VectorXd c2;       // |row . v| / |row|
  std::vector<bool> valid;  // false for zero rows
};

CandidateScores score_candidates(const BaselineState& state, const Eigen::MatrixXd& rows);

/// Lexicographic choice: largest c2, then smallest c1 (both rounded to 12
/// significant digits), then list order. Throws CandidatesExhausted when no row is valid.
std::size_t select_candidate(const BaselineState& state, const Eigen::MatrixXd& rows);

/// The best `m` design pairs under the same ordering, streamed over all
/// K(K-1)/2 pairs (i < j, row z_i - z_j) without materializing them.
std::vector<Query> rank_design_pairs(const BaselineState& state, const DesignSpace& space,
                                     const QuerySet& exclude, std::size_t m);

/// Next baseline query over every not-yet-asked pair.
Query select_baseline_query(const BaselineState& state, const DesignSpace& space,
                            const QuerySet& asked);

}  // namespace optdesign
