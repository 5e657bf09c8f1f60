#include "optdesign/abernethy.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <queue>

#include "optdesign/design_space.hpp"
#include "optdesign/errors.hpp"

namespace optdesign {

BaselineState BaselineState::from_fit(const PosteriorFit& fit) {
  return BaselineState{fit.map.w, fit.projection.matrix, fit.projection.min_eigenvector};
}

double round_significant(double x, int digits) {
  if (x == 0.0 || !std::isfinite(x)) return x;
  const int e = static_cast<int>(std::floor(std::log10(std::abs(x))));
  const double scale = std::pow(10.0, digits - 1 - e);
  return std::round(x * scale) / scale;
}

CandidateScores score_candidates(const BaselineState& state, const Eigen::MatrixXd& rows) {
  if (rows.cols() != state.w_hat.size() || rows.cols() != state.v.size()) {
    throw ValidationError("candidate rows do not match the part-worth dimension");
  }
  CandidateScores out;
  out.c1 = (rows * state.w_hat).cwiseAbs();
  out.c2 = (rows * state.v).cwiseAbs();
  out.valid.assign(static_cast<std::size_t>(rows.rows()), true);
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    const double n = rows.row(r).norm();
    if (n == 0.0) {
      out.valid[static_cast<std::size_t>(r)] = false;
      out.c2[r] = 0.0;
    } else {
      out.c2[r] /= n;
    }
  }
  return out;
}

namespace {

// Both scores are rounded to 12 significant digits: the streaming ranker
// forms them from per-design products, so pairs with the same difference
// vector agree only up to a few ulps and must tie on list order.
struct Ranked {
  double c2 = 0.0;
  double c1 = 0.0;
  std::size_t order = 0;
  Query query;
};

bool better(const Ranked& a, const Ranked& b) {
  if (a.c2 != b.c2) return a.c2 > b.c2;
  if (a.c1 != b.c1) return a.c1 < b.c1;
  return a.order < b.order;
}

}  // namespace

std::size_t select_candidate(const BaselineState& state, const Eigen::MatrixXd& rows) {
  const CandidateScores s = score_candidates(state, rows);
  std::optional<Ranked> best;
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    if (!s.valid[static_cast<std::size_t>(r)]) continue;
    const Ranked cur{round_significant(s.c2[r], 12), round_significant(s.c1[r], 12), static_cast<std::size_t>(r), {}};
    if (!best || better(cur, *best)) best = cur;
  }
  if (!best) throw CandidatesExhausted();
  return best->order;
}

std::vector<Query> rank_design_pairs(const BaselineState& state, const DesignSpace& space,
                                     const QuerySet& exclude, std::size_t m) {
  const std::size_t k = space.size();
  if (m == 0 || k < 2) return {};
  const Eigen::MatrixXd& z = space.constrained_matrix();
  if (static_cast<std::size_t>(state.w_hat.size()) != space.dimension()) {
    throw ValidationError("baseline state does not match the design space");
  }
  const Eigen::VectorXd u = z * state.w_hat;
  const Eigen::VectorXd p = z * state.v;

  // |z_i - z_j|^2 in constrained coordinates counts, per differing
  // attribute, how many of the two levels are not the dropped last level.
  const AttributeSchema& schema = space.schema();
  const std::size_t n_attr = schema.attribute_count();
  std::vector<int> levels(k * n_attr);
  std::vector<unsigned char> not_last(k * n_attr);
  for (std::size_t i = 0; i < k; ++i) {
    const auto& li = space.design(i).level_index;
    for (std::size_t a = 0; a < n_attr; ++a) {
      levels[i * n_attr + a] = li[a];
      not_last[i * n_attr + a] =
          static_cast<std::size_t>(li[a]) + 1 != schema.level_count(a) ? 1 : 0;
    }
  }
  std::vector<double> inv_norm(2 * n_attr + 1, 0.0);
  for (std::size_t s = 1; s < inv_norm.size(); ++s) {
    inv_norm[s] = 1.0 / std::sqrt(static_cast<double>(s));
  }

  const auto worse_on_top = [](const Ranked& a, const Ranked& b) { return better(a, b); };
  std::priority_queue<Ranked, std::vector<Ranked>, decltype(worse_on_top)> heap(worse_on_top);

  std::size_t order = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const int* li = &levels[i * n_attr];
    const unsigned char* ni = &not_last[i * n_attr];
    for (std::size_t j = i + 1; j < k; ++j, ++order) {
      const int* lj = &levels[j * n_attr];
      const unsigned char* nj = &not_last[j * n_attr];
      std::size_t dist2 = 0;
      for (std::size_t a = 0; a < n_attr; ++a) {
        if (li[a] != lj[a]) dist2 += ni[a] + nj[a];
      }
      if (dist2 == 0) continue;
      const double c2_raw = std::abs(p[static_cast<Eigen::Index>(i)] -
                                     p[static_cast<Eigen::Index>(j)]) * inv_norm[dist2];
      if (heap.size() == m && c2_raw < heap.top().c2 * (1.0 - 1e-10)) continue;
      const Query q{i, j};
      if (exclude.contains(q)) continue;
      const Ranked cur{
          round_significant(c2_raw, 12),
          round_significant(
              std::abs(u[static_cast<Eigen::Index>(i)] - u[static_cast<Eigen::Index>(j)]), 12),
          order, q};
      if (heap.size() < m) {
        heap.push(cur);
      } else if (better(cur, heap.top())) {
        heap.pop();
        heap.push(cur);
      }
    }
  }
  std::vector<Ranked> ranked;
  ranked.reserve(heap.size());
  while (!heap.empty()) {
    ranked.push_back(heap.top());
    heap.pop();
  }
  std::sort(ranked.begin(), ranked.end(), better);
  std::vector<Query> out;
  out.reserve(ranked.size());
  for (const auto& r : ranked) out.push_back(r.query);
  return out;
}

Query select_baseline_query(const BaselineState& state, const DesignSpace& space,
                            const QuerySet& asked) {
  const auto best = rank_design_pairs(state, space, asked, 1);
  if (best.empty()) throw CandidatesExhausted();
  return best.front();
}

}  // namespace optdesign
