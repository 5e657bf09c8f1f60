#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace optdesign {

// Utility gaps are clamped to this magnitude before exponentiation.
inline constexpr double kMaxUtilityGap = 1e4;

/// Numerically stable logistic function.
double sigmoid(double x);
/// log(1 + exp(x)) without overflow.
double softplus(double x);

/// A two-product market: K candidate products against one competitor.
/// Rows of `products` are attribute vectors in the same coordinates as the
/// part-worths they are scored against.
struct Market {
  Eigen::MatrixXd products;  // K x D
  Eigen::VectorXd margins;   // price - cost, length K
  Eigen::VectorXd competitor;

  std::size_t size() const { return static_cast<std::size_t>(products.rows()); }
  std::size_t dimension() const { return static_cast<std::size_t>(products.cols()); }
};

double utility(const Eigen::VectorXd& w, const Eigen::VectorXd& z);

/// Probability that z is chosen over z0: sigmoid(u(z) - u(z0)).
double choice_probability(const Eigen::VectorXd& w, const Eigen::VectorXd& z,
                          const Eigen::VectorXd& z0);

/// share(z; w) * (price - cost). Negative when cost exceeds price.
double profit(const Eigen::VectorXd& w, const Eigen::VectorXd& z, const Eigen::VectorXd& z0,
              double price, double cost);

struct ProfitProfile {
  Eigen::VectorXd shares;
  Eigen::VectorXd profits;
};

ProfitProfile profit_profile(const Eigen::VectorXd& w, const Market& market);

/// argmax_k profit(z_k; w). Ties resolve to the lowest index.
std::size_t optimal_design(const Eigen::VectorXd& w, const Market& market);

/// Same as optimal_design but with utilities u_k = w'z_k already computed.
std::size_t optimal_design_from_utilities(const Eigen::Ref<const Eigen::VectorXd>& utilities,
                                          double competitor_utility,
                                          const Eigen::VectorXd& margins);

/// profit(z1; w) - profit(z2; w), written in the exponential share form.
/// Zero exactly on the boundary between the two designs' segments.
double equal_profit_residual(const Eigen::VectorXd& w, const Eigen::VectorXd& z1,
                             const Eigen::VectorXd& z2, const Eigen::VectorXd& z0,
                             double margin1, double margin2);

struct PlaneGrid {
  double x_min = -10.0;
  double x_max = 10.0;
  double y_min = -10.0;
  double y_max = 10.0;
  std::size_t nx = 200;
  std::size_t ny = 200;

  void validate() const;
  Eigen::Vector2d point(std::size_t ix, std::size_t iy) const;
};

/// Optimal-design label at every grid point of a 2-D part-worth plane.
/// labels[iy * nx + ix].
struct SegmentMap {
  PlaneGrid grid;
  std::vector<std::size_t> labels;

  std::size_t at(std::size_t ix, std::size_t iy) const { return labels[iy * grid.nx + ix]; }
};

SegmentMap segment_map(const Market& market, const PlaneGrid& grid);

/// Planar test market: `products` points uniform in [-10, 10]^2, margins
/// uniform in [1, 10], competitor at the origin.
Market random_planar_market(std::size_t products, std::uint64_t seed);

}  // namespace optdesign
