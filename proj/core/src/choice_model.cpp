#include "optdesign/choice_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "optdesign/errors.hpp"

namespace optdesign {

double sigmoid(double x) {
  x = std::clamp(x, -kMaxUtilityGap, kMaxUtilityGap);
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) {
  if (x > 0.0) {
    return x + std::log1p(std::exp(-x));
  }
  return std::log1p(std::exp(x));
}

namespace {

void check_dims(const Eigen::VectorXd& w, const Eigen::VectorXd& z) {
  if (w.size() != z.size()) {
    throw ValidationError("part-worth dimension " + std::to_string(w.size()) +
                          " does not match design dimension " + std::to_string(z.size()));
  }
}

}  // namespace

double utility(const Eigen::VectorXd& w, const Eigen::VectorXd& z) {
  check_dims(w, z);
  return w.dot(z);
}

double choice_probability(const Eigen::VectorXd& w, const Eigen::VectorXd& z,
                          const Eigen::VectorXd& z0) {
  check_dims(w, z);
  check_dims(w, z0);
  return sigmoid(w.dot(z) - w.dot(z0));
}

double profit(const Eigen::VectorXd& w, const Eigen::VectorXd& z, const Eigen::VectorXd& z0,
              double price, double cost) {
  return choice_probability(w, z, z0) * (price - cost);
}

ProfitProfile profit_profile(const Eigen::VectorXd& w, const Market& market) {
  check_dims(w, market.competitor);
  if (static_cast<std::size_t>(w.size()) != market.dimension()) {
    throw ValidationError("part-worth dimension does not match market");
  }
  const Eigen::VectorXd u = market.products * w;
  const double u0 = w.dot(market.competitor);
  ProfitProfile out;
  out.shares.resize(u.size());
  for (Eigen::Index k = 0; k < u.size(); ++k) {
    out.shares[k] = sigmoid(u[k] - u0);
  }
  out.profits = out.shares.cwiseProduct(market.margins);
  return out;
}

std::size_t optimal_design_from_utilities(const Eigen::Ref<const Eigen::VectorXd>& utilities,
                                          double competitor_utility,
                                          const Eigen::VectorXd& margins) {
  std::size_t best = 0;
  double best_profit = -std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < utilities.size(); ++k) {
    const double p = sigmoid(utilities[k] - competitor_utility) * margins[k];
    if (p > best_profit) {
      best_profit = p;
      best = static_cast<std::size_t>(k);
    }
  }
  return best;
}

std::size_t optimal_design(const Eigen::VectorXd& w, const Market& market) {
  if (market.size() == 0) {
    throw ValidationError("market has no products");
  }
  if (static_cast<std::size_t>(w.size()) != market.dimension()) {
    throw ValidationError("part-worth dimension does not match market");
  }
  const Eigen::VectorXd u = market.products * w;
  return optimal_design_from_utilities(u, w.dot(market.competitor), market.margins);
}

double equal_profit_residual(const Eigen::VectorXd& w, const Eigen::VectorXd& z1,
                             const Eigen::VectorXd& z2, const Eigen::VectorXd& z0,
                             double margin1, double margin2) {
  check_dims(w, z1);
  check_dims(w, z2);
  check_dims(w, z0);
  // exp(u1) m1 / (exp(u1) + exp(u0)) - exp(u2) m2 / (exp(u2) + exp(u0)),
  // each term divided through by exp(max(u_k, u0)) to stay finite.
  const double u0 = w.dot(z0);
  const auto term = [&](double u, double m) {
    const double top = std::max(u, u0);
    const double eu = std::exp(std::max(u - top, -kMaxUtilityGap));
    const double e0 = std::exp(std::max(u0 - top, -kMaxUtilityGap));
    return eu * m / (eu + e0);
  };
  return term(w.dot(z1), margin1) - term(w.dot(z2), margin2);
}

void PlaneGrid::validate() const {
  if (!(x_max > x_min) || !(y_max > y_min)) {
    throw ValidationError("grid bounds must satisfy min < max");
  }
  if (nx < 2 || ny < 2) {
    throw ValidationError("grid resolution must be at least 2 x 2");
  }
  if (!std::isfinite(x_min) || !std::isfinite(x_max) || !std::isfinite(y_min) ||
      !std::isfinite(y_max)) {
    throw ValidationError("grid bounds must be finite");
  }
}

Eigen::Vector2d PlaneGrid::point(std::size_t ix, std::size_t iy) const {
  const double tx = static_cast<double>(ix) / static_cast<double>(nx - 1);
  const double ty = static_cast<double>(iy) / static_cast<double>(ny - 1);
  return {x_min + tx * (x_max - x_min), y_min + ty * (y_max - y_min)};
}

SegmentMap segment_map(const Market& market, const PlaneGrid& grid) {
  grid.validate();
  if (market.dimension() != 2) {
    throw ValidationError("segment map needs a 2-D part-worth space, got D = " +
                          std::to_string(market.dimension()));
  }
  if (market.size() == 0) {
    throw ValidationError("market has no products");
  }
  SegmentMap out{grid, std::vector<std::size_t>(grid.nx * grid.ny)};
  Eigen::VectorXd w(2);
  for (std::size_t iy = 0; iy < grid.ny; ++iy) {
    for (std::size_t ix = 0; ix < grid.nx; ++ix) {
      w = grid.point(ix, iy);
      out.labels[iy * grid.nx + ix] = optimal_design(w, market);
    }
  }
  return out;
}

Market random_planar_market(std::size_t products, std::uint64_t seed) {
  if (products == 0) throw ValidationError("planar market needs at least one product");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-10.0, 10.0);
  std::uniform_real_distribution<double> margin(1.0, 10.0);
  Market m;
  m.products.resize(static_cast<Eigen::Index>(products), 2);
  m.margins.resize(static_cast<Eigen::Index>(products));
  for (Eigen::Index k = 0; k < m.products.rows(); ++k) {
    m.products(k, 0) = coord(rng);
    m.products(k, 1) = coord(rng);
    m.margins[k] = margin(rng);
  }
  m.competitor = Eigen::VectorXd::Zero(2);
  return m;
}

}  // namespace optdesign
