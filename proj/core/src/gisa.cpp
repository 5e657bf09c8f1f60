#include "optdesign/gisa.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "optdesign/design_space.hpp"
#include "optdesign/errors.hpp"

namespace optdesign {

double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double entropy_bits(const Eigen::VectorXd& pi) {
  double h = 0.0;
  for (Eigen::Index k = 0; k < pi.size(); ++k) {
    if (pi[k] > 0.0) h -= pi[k] * std::log2(pi[k]);
  }
  return h;
}

GroupMasses estimate_masses(const SampleSet& samples, const Market& market) {
  const Eigen::Index j_count = samples.samples.rows();
  if (j_count == 0) throw ValidationError("no posterior samples");
  if (static_cast<std::size_t>(samples.samples.cols()) != market.dimension()) {
    throw ValidationError("sample dimension does not match market");
  }
  GroupMasses out;
  out.pi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(market.size()));
  out.labels.resize(static_cast<std::size_t>(j_count));

  const Eigen::VectorXd u0 = samples.samples * market.competitor;
  // Blocks keep the J x K utility matrix small for large design spaces.
  constexpr Eigen::Index kBlock = 64;
  Eigen::MatrixXd u;
  for (Eigen::Index start = 0; start < j_count; start += kBlock) {
    const Eigen::Index rows = std::min(kBlock, j_count - start);
    u.noalias() = market.products * samples.samples.middleRows(start, rows).transpose();
    for (Eigen::Index r = 0; r < rows; ++r) {
      const std::size_t k = optimal_design_from_utilities(u.col(r), u0[start + r], market.margins);
      out.labels[static_cast<std::size_t>(start + r)] = k;
      out.pi[static_cast<Eigen::Index>(k)] += 1.0;
    }
  }
  out.pi /= static_cast<double>(j_count);
  out.entropy = entropy_bits(out.pi);
  return out;
}

std::size_t most_probable(const GroupMasses& masses) {
  Eigen::Index best = 0;
  masses.pi.maxCoeff(&best);  // first maximum
  return static_cast<std::size_t>(best);
}

BranchMasses branch_masses(const SampleSet& samples, const GroupMasses& masses,
                           const Market& market, Query query) {
  if (query.first >= market.size() || query.second >= market.size()) {
    throw ValidationError("query refers to a design outside the market");
  }
  if (masses.labels.size() != samples.size()) {
    throw ValidationError("group labels do not match the sample set");
  }
  const Eigen::VectorXd diff =
      market.products.row(static_cast<Eigen::Index>(query.first)).transpose() -
      market.products.row(static_cast<Eigen::Index>(query.second)).transpose();
  const Eigen::VectorXd gap = samples.samples * diff;

  const auto k_count = static_cast<Eigen::Index>(market.size());
  BranchMasses out;
  out.left = Eigen::VectorXd::Zero(k_count);
  out.right = Eigen::VectorXd::Zero(k_count);
  for (Eigen::Index j = 0; j < gap.size(); ++j) {
    const auto k = static_cast<Eigen::Index>(masses.labels[static_cast<std::size_t>(j)]);
    if (gap[j] > 0.0) {
      out.left[k] += 1.0;
    } else {
      out.right[k] += 1.0;
    }
  }
  const double n = static_cast<double>(gap.size());
  out.left /= n;
  out.right /= n;
  out.pi_left = out.left.sum();
  out.pi_right = 1.0 - out.pi_left;
  return out;
}

double local_objective(double pi_left, std::span<const double> group_mass,
                       std::span<const double> group_left) {
  if (group_mass.size() != group_left.size()) {
    throw ValidationError("group mass vectors differ in length");
  }
  const double rho = std::max(pi_left, 1.0 - pi_left);
  double l = 1.0 - binary_entropy(rho);
  for (std::size_t k = 0; k < group_mass.size(); ++k) {
    if (group_mass[k] <= 0.0) continue;
    l += group_mass[k] * binary_entropy(group_left[k] / group_mass[k]);
  }
  return l;
}

QueryScore score_query(const BranchMasses& branch, const GroupMasses& masses, Query query) {
  QueryScore s;
  s.query = query;
  s.pi_left = branch.pi_left;
  s.pi_right = branch.pi_right;
  s.rho = std::max(branch.pi_left, branch.pi_right);
  s.rho_k = Eigen::VectorXd::Zero(masses.pi.size());
  for (Eigen::Index k = 0; k < masses.pi.size(); ++k) {
    if (masses.pi[k] > 0.0) {
      s.rho_k[k] = std::max(branch.left[k], branch.right[k]) / masses.pi[k];
    }
  }
  s.l_tilde = local_objective(branch.pi_left,
                              std::span<const double>(masses.pi.data(), masses.pi.size()),
                              std::span<const double>(branch.left.data(), branch.left.size()));
  return s;
}

std::vector<Query> mass_sorted_pairs(const GroupMasses& masses, const QuerySet& exclude,
                                     std::size_t n) {
  const auto k_count = static_cast<std::size_t>(masses.pi.size());
  std::vector<std::size_t> order(k_count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return masses.pi[static_cast<Eigen::Index>(a)] > masses.pi[static_cast<Eigen::Index>(b)];
  });
  std::vector<Query> out;
  for (std::size_t m = 1; m < k_count && out.size() < n; ++m) {
    for (std::size_t a = 0; a < m && out.size() < n; ++a) {
      const Query q{order[a], order[m]};
      if (!exclude.contains(q)) out.push_back(q);
    }
  }
  return out;
}

std::vector<Query> generate_candidates(const GroupMasses& masses, const BaselineState& baseline,
                                       const DesignSpace& space, const QuerySet& asked,
                                       std::size_t n) {
  std::vector<Query> out = mass_sorted_pairs(masses, asked, n / 2);
  QuerySet taken = asked;
  for (const Query& q : out) taken.insert(q);
  const std::vector<Query> rest = rank_design_pairs(baseline, space, taken, n - out.size());
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

QuerySelection select_query(const std::vector<Query>& candidates, const SampleSet& samples,
                            const GroupMasses& masses, const Market& market) {
  if (candidates.empty()) throw CandidatesExhausted();
  QuerySelection sel;
  sel.table.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const BranchMasses b = branch_masses(samples, masses, market, candidates[i]);
    sel.table.push_back(score_query(b, masses, candidates[i]));
    if (sel.table[i].l_tilde < sel.table[sel.chosen].l_tilde) sel.chosen = i;
  }
  sel.query = candidates[sel.chosen];
  return sel;
}

}  // namespace optdesign
