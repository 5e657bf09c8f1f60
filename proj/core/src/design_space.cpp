#include "optdesign/design_space.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "optdesign/errors.hpp"

namespace optdesign {

AttributeSchema::AttributeSchema(std::vector<Attribute> attributes, std::size_t price_attribute,
                                 std::vector<double> price_values)
    : attributes_(std::move(attributes)),
      price_attribute_(price_attribute),
      price_values_(std::move(price_values)) {
  if (attributes_.empty()) {
    throw ValidationError("schema needs at least one attribute");
  }
  for (const auto& a : attributes_) {
    if (a.levels.size() < 2) {
      throw ValidationError("attribute '" + a.name + "' has fewer than 2 levels");
    }
  }
  if (price_attribute_ >= attributes_.size()) {
    throw ValidationError("price_attribute " + std::to_string(price_attribute_) +
                          " is not a valid attribute index");
  }
  if (price_values_.size() != attributes_[price_attribute_].levels.size()) {
    throw ValidationError("price_values needs one entry per level of attribute '" +
                          attributes_[price_attribute_].name + "'");
  }
  for (double p : price_values_) {
    if (!std::isfinite(p)) {
      throw ValidationError("price values must be finite");
    }
  }
  full_offsets_.reserve(attributes_.size());
  constrained_offsets_.reserve(attributes_.size());
  for (const auto& a : attributes_) {
    full_offsets_.push_back(full_dim_);
    constrained_offsets_.push_back(constrained_dim_);
    full_dim_ += a.levels.size();
    constrained_dim_ += a.levels.size() - 1;
  }
}

std::optional<std::size_t> AttributeSchema::find_attribute(const std::string& name) const {
  for (std::size_t a = 0; a < attributes_.size(); ++a) {
    if (attributes_[a].name == name) return a;
  }
  return std::nullopt;
}

std::optional<int> AttributeSchema::find_level(std::size_t a, const std::string& label) const {
  const auto& levels = attributes_.at(a).levels;
  const auto it = std::find(levels.begin(), levels.end(), label);
  if (it == levels.end()) return std::nullopt;
  return static_cast<int>(it - levels.begin());
}

void AttributeSchema::validate_levels(std::span<const int> level_index) const {
  if (level_index.size() != attributes_.size()) {
    throw ValidationError("level index has " + std::to_string(level_index.size()) +
                          " entries, schema has " + std::to_string(attributes_.size()) +
                          " attributes");
  }
  for (std::size_t a = 0; a < level_index.size(); ++a) {
    const int l = level_index[a];
    if (l < 0 || static_cast<std::size_t>(l) >= attributes_[a].levels.size()) {
      throw ValidationError("level " + std::to_string(l) + " out of range for attribute '" +
                            attributes_[a].name + "'");
    }
  }
}

double AttributeSchema::price_of(std::span<const int> level_index) const {
  validate_levels(level_index);
  return price_values_[static_cast<std::size_t>(level_index[price_attribute_])];
}

Eigen::VectorXd encode(const AttributeSchema& schema, std::span<const int> level_index) {
  schema.validate_levels(level_index);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(schema.full_dimension()));
  for (std::size_t a = 0; a < level_index.size(); ++a) {
    z[static_cast<Eigen::Index>(schema.full_offset(a) + static_cast<std::size_t>(level_index[a]))] =
        1.0;
  }
  return z;
}

LevelIndex decode(const AttributeSchema& schema, const Eigen::VectorXd& full_encoding) {
  if (static_cast<std::size_t>(full_encoding.size()) != schema.full_dimension()) {
    throw ValidationError("encoding length does not match schema");
  }
  LevelIndex out(schema.attribute_count());
  for (std::size_t a = 0; a < schema.attribute_count(); ++a) {
    int hot = -1;
    for (std::size_t l = 0; l < schema.level_count(a); ++l) {
      const double v = full_encoding[static_cast<Eigen::Index>(schema.full_offset(a) + l)];
      if (v == 1.0) {
        if (hot >= 0) throw ValidationError("block is not one-hot");
        hot = static_cast<int>(l);
      } else if (v != 0.0) {
        throw ValidationError("encoding entries must be 0 or 1");
      }
    }
    if (hot < 0) throw ValidationError("block is not one-hot");
    out[a] = hot;
  }
  return out;
}

namespace {

void check_full(const AttributeSchema& schema, const Eigen::VectorXd& full) {
  if (static_cast<std::size_t>(full.size()) != schema.full_dimension()) {
    throw ValidationError("vector of length " + std::to_string(full.size()) +
                          " does not match D_full = " + std::to_string(schema.full_dimension()));
  }
}

}  // namespace

Eigen::VectorXd constrain_design(const AttributeSchema& schema, const Eigen::VectorXd& full) {
  check_full(schema, full);
  Eigen::VectorXd out(static_cast<Eigen::Index>(schema.dimension()));
  for (std::size_t a = 0; a < schema.attribute_count(); ++a) {
    const auto n = static_cast<Eigen::Index>(schema.level_count(a) - 1);
    out.segment(static_cast<Eigen::Index>(schema.constrained_offset(a)), n) =
        full.segment(static_cast<Eigen::Index>(schema.full_offset(a)), n);
  }
  return out;
}

Eigen::VectorXd constrain_part_worth(const AttributeSchema& schema, const Eigen::VectorXd& full) {
  check_full(schema, full);
  Eigen::VectorXd out(static_cast<Eigen::Index>(schema.dimension()));
  for (std::size_t a = 0; a < schema.attribute_count(); ++a) {
    const auto n = static_cast<Eigen::Index>(schema.level_count(a) - 1);
    const auto fo = static_cast<Eigen::Index>(schema.full_offset(a));
    const double last = full[fo + n];
    out.segment(static_cast<Eigen::Index>(schema.constrained_offset(a)), n) =
        full.segment(fo, n).array() - last;
  }
  return out;
}

Eigen::VectorXd expand_part_worth(const AttributeSchema& schema,
                                  const Eigen::VectorXd& constrained) {
  if (static_cast<std::size_t>(constrained.size()) != schema.dimension()) {
    throw ValidationError("vector of length " + std::to_string(constrained.size()) +
                          " does not match D = " + std::to_string(schema.dimension()));
  }
  Eigen::VectorXd full = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(schema.full_dimension()));
  for (std::size_t a = 0; a < schema.attribute_count(); ++a) {
    const auto n = static_cast<Eigen::Index>(schema.level_count(a) - 1);
    full.segment(static_cast<Eigen::Index>(schema.full_offset(a)), n) =
        constrained.segment(static_cast<Eigen::Index>(schema.constrained_offset(a)), n);
  }
  return full;
}

Design make_design(const AttributeSchema& schema, LevelIndex level_index, double cost) {
  if (!std::isfinite(cost) || cost < 0.0) {
    throw ValidationError("design cost must be finite and non-negative");
  }
  Design d;
  d.encoding = encode(schema, level_index);
  d.constrained = constrain_design(schema, d.encoding);
  d.price = schema.price_of(level_index);
  d.cost = cost;
  d.level_index = std::move(level_index);
  return d;
}

double CostModel::additive_cost(std::span<const int> level_index) const {
  double c = base;
  for (std::size_t a = 0; a < level_index.size(); ++a) {
    c += level_costs.at(a).at(static_cast<std::size_t>(level_index[a]));
  }
  return c;
}

DesignSpace::DesignSpace(AttributeSchema schema, std::vector<Design> designs,
                         CostModel cost_model, std::optional<Design> competitor)
    : schema_(std::move(schema)),
      designs_(std::move(designs)),
      cost_model_(std::move(cost_model)),
      competitor_(std::move(competitor)) {
  if (designs_.size() < 2) {
    throw ValidationError("design space needs at least 2 designs, got " +
                          std::to_string(designs_.size()));
  }
  std::map<LevelIndex, std::size_t> seen;
  const auto d = static_cast<Eigen::Index>(schema_.dimension());
  constrained_.resize(static_cast<Eigen::Index>(designs_.size()), d);
  margins_.resize(static_cast<Eigen::Index>(designs_.size()));
  for (std::size_t k = 0; k < designs_.size(); ++k) {
    const Design& des = designs_[k];
    schema_.validate_levels(des.level_index);
    if (des.cost < 0.0 || !std::isfinite(des.cost)) {
      throw ValidationError("design " + std::to_string(k) + " has invalid cost");
    }
    const auto [it, inserted] = seen.emplace(des.level_index, k);
    if (!inserted) {
      throw ValidationError("design " + std::to_string(k) + " duplicates design " +
                            std::to_string(it->second));
    }
    constrained_.row(static_cast<Eigen::Index>(k)) = des.constrained.transpose();
    margins_[static_cast<Eigen::Index>(k)] = des.margin();
  }
  if (competitor_) {
    schema_.validate_levels(competitor_->level_index);
  }
}

std::optional<std::size_t> DesignSpace::find(std::span<const int> level_index) const {
  for (std::size_t k = 0; k < designs_.size(); ++k) {
    if (std::equal(level_index.begin(), level_index.end(), designs_[k].level_index.begin(),
                   designs_[k].level_index.end())) {
      return k;
    }
  }
  return std::nullopt;
}

Market DesignSpace::market(const Design& competitor) const {
  if (static_cast<std::size_t>(competitor.constrained.size()) != schema_.dimension()) {
    throw ValidationError("competitor does not match the schema");
  }
  return Market{constrained_, margins_, competitor.constrained};
}

Market DesignSpace::market_against(std::size_t competitor_index) const {
  return market(designs_.at(competitor_index));
}

Design DesignSpace::make(LevelIndex level_index) const {
  schema_.validate_levels(level_index);
  double cost = 0.0;
  if (cost_model_.kind == CostModel::Kind::kAdditive) {
    cost = cost_model_.additive_cost(level_index);
  } else if (const auto k = find(level_index)) {
    cost = designs_[*k].cost;
  }
  return make_design(schema_, std::move(level_index), std::max(cost, 0.0));
}

std::vector<LevelIndex> full_factorial(const AttributeSchema& schema) {
  std::vector<LevelIndex> out;
  LevelIndex cur(schema.attribute_count(), 0);
  while (true) {
    out.push_back(cur);
    std::size_t a = schema.attribute_count();
    while (a > 0) {
      --a;
      if (static_cast<std::size_t>(++cur[a]) < schema.level_count(a)) break;
      cur[a] = 0;
      if (a == 0) return out;
    }
  }
}

}  // namespace optdesign
