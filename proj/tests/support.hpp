#pragma once

#include <memory>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "optdesign/design_space.hpp"
#include "optdesign/estimation.hpp"

#ifndef OPTDESIGN_DATA_DIR
#define OPTDESIGN_DATA_DIR "data"
#endif

namespace optdesign::test {

inline std::string data_path(const std::string& name) {
  return std::string(OPTDESIGN_DATA_DIR) + "/" + name;
}

// Full-factorial space with `levels[a]` levels per attribute; the last
// attribute is the price with the given prices. Additive per-level costs.
inline std::shared_ptr<const DesignSpace> make_space(const std::vector<int>& levels,
                                                     const std::vector<double>& prices,
                                                     std::vector<std::vector<double>> costs = {},
                                                     std::optional<LevelIndex> competitor = {}) {
  std::vector<Attribute> attrs;
  for (std::size_t a = 0; a < levels.size(); ++a) {
    Attribute attr{"a" + std::to_string(a), "", {}};
    for (int l = 0; l < levels[a]; ++l) attr.levels.push_back("l" + std::to_string(l));
    attrs.push_back(attr);
  }
  AttributeSchema schema(attrs, levels.size() - 1, prices);
  CostModel cm;
  cm.kind = CostModel::Kind::kAdditive;
  if (costs.empty()) {
    for (int n : levels) costs.emplace_back(static_cast<std::size_t>(n), 0.0);
  }
  cm.level_costs = costs;
  std::vector<Design> designs;
  for (auto& li : full_factorial(schema)) {
    const double c = cm.additive_cost(li);
    designs.push_back(make_design(schema, li, c));
  }
  std::optional<Design> comp;
  if (competitor) comp = make_design(schema, *competitor, cm.additive_cost(*competitor));
  return std::make_shared<const DesignSpace>(schema, designs, cm, comp);
}

// Random response set of q rows with entries in [-1, 1].
inline ResponseSet random_responses(std::size_t d, std::size_t q, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ResponseSet rs(d);
  for (std::size_t i = 0; i < q; ++i) {
    Eigen::VectorXd delta(static_cast<Eigen::Index>(d));
    for (Eigen::Index j = 0; j < delta.size(); ++j) delta[j] = u(rng);
    rs.add(Response{0, 1, static_cast<int>(i)}, delta);
  }
  return rs;
}

inline Eigen::VectorXd random_vector(std::size_t d, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Eigen::VectorXd v(static_cast<Eigen::Index>(d));
  for (Eigen::Index j = 0; j < v.size(); ++j) v[j] = n(rng);
  return v;
}

}  // namespace optdesign::test
