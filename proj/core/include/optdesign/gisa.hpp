#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "optdesign/abernethy.hpp"
#include "optdesign/choice_model.hpp"
#include "optdesign/query.hpp"
#include "optdesign/sampler.hpp"

namespace optdesign {

/// Binary entropy in bits with 0 log 0 := 0.
double binary_entropy(double p);
/// Shannon entropy (bits) of a categorical distribution.
double entropy_bits(const Eigen::VectorXd& pi);

/// Posterior probability of each design being the most profitable,
/// estimated as sample fractions.
struct GroupMasses {
  Eigen::VectorXd pi;
  double entropy = 0.0;              // bits
  std::vector<std::size_t> labels;   // optimal design per sample
};

GroupMasses estimate_masses(const SampleSet& samples, const Market& market);

/// Index of the largest mass, lowest index on ties.
std::size_t most_probable(const GroupMasses& masses);

struct BranchMasses {
  double pi_left = 0.0;
  double pi_right = 0.0;
  Eigen::VectorXd left;   // pi_{l,k}
  Eigen::VectorXd right;  // pi_{r,k}
};

BranchMasses branch_masses(const SampleSet& samples, const GroupMasses& masses,
                           const Market& market, Query query);

struct QueryScore {
  Query query;
  double pi_left = 0.0;
  double pi_right = 0.0;
  double rho = 0.0;
  Eigen::VectorXd rho_k;  // zero where pi_k = 0
  double l_tilde = 0.0;
};

/// 1 - H(rho) + sum_k pi_k H(rho_k), with rho = max(pi_l, pi_r) and
/// rho_k = max(pi_{l,k}, pi_{r,k}) / pi_k. Terms with pi_k = 0 are dropped.
double local_objective(double pi_left, std::span<const double> group_mass,
                       std::span<const double> group_left);

QueryScore score_query(const BranchMasses& branch, const GroupMasses& masses, Query query);

/// Candidate queries: the first N/2 pair designs in descending-mass order
/// (i1 i2, i1 i3, i2 i3, i1 i4, ...); the rest come from the baseline
/// minimax-variance ranking. Asked queries are skipped.
std::vector<Query> generate_candidates(const GroupMasses& masses, const BaselineState& baseline,
                                       const DesignSpace& space, const QuerySet& asked,
                                       std::size_t n);

/// The first n pairs of the mass-sorted pairing order.
std::vector<Query> mass_sorted_pairs(const GroupMasses& masses, const QuerySet& exclude,
                                     std::size_t n);

struct QuerySelection {
  Query query;
  std::size_t chosen = 0;  // index into table
  std::vector<QueryScore> table;
};

/// argmin of L~ over candidates; ties keep the earlier candidate.
QuerySelection select_query(const std::vector<Query>& candidates, const SampleSet& samples,
                            const GroupMasses& masses, const Market& market);

}  // namespace optdesign
