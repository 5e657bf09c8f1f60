#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "optdesign/choice_model.hpp"

namespace optdesign {

struct Attribute {
  std::string name;
  std::string unit;
  std::vector<std::string> levels;
};

using LevelIndex = std::vector<int>;

/// Attribute schema with binary (one-hot) level encoding.
///
/// The full encoding concatenates one block per attribute, one coordinate
/// per level. The constrained layout drops the last level of every block,
/// which pins that level's part-worth to zero and removes the per-attribute
/// additive degeneracy of the logit likelihood.
class AttributeSchema {
 public:
  AttributeSchema() = default;
  AttributeSchema(std::vector<Attribute> attributes, std::size_t price_attribute,
                  std::vector<double> price_values);

  const std::vector<Attribute>& attributes() const { return attributes_; }
  std::size_t attribute_count() const { return attributes_.size(); }
  std::size_t level_count(std::size_t a) const { return attributes_[a].levels.size(); }
  std::size_t price_attribute() const { return price_attribute_; }
  const std::vector<double>& price_values() const { return price_values_; }

  /// D_full = sum of level counts.
  std::size_t full_dimension() const { return full_dim_; }
  /// D = sum of (level count - 1).
  std::size_t dimension() const { return constrained_dim_; }

  std::size_t full_offset(std::size_t a) const { return full_offsets_[a]; }
  std::size_t constrained_offset(std::size_t a) const { return constrained_offsets_[a]; }

  /// Index of the attribute named `name`, if any.
  std::optional<std::size_t> find_attribute(const std::string& name) const;
  std::optional<int> find_level(std::size_t a, const std::string& label) const;

  void validate_levels(std::span<const int> level_index) const;
  double price_of(std::span<const int> level_index) const;

 private:
  std::vector<Attribute> attributes_;
  std::size_t price_attribute_ = 0;
  std::vector<double> price_values_;
  std::vector<std::size_t> full_offsets_;
  std::vector<std::size_t> constrained_offsets_;
  std::size_t full_dim_ = 0;
  std::size_t constrained_dim_ = 0;
};

Eigen::VectorXd encode(const AttributeSchema& schema, std::span<const int> level_index);
LevelIndex decode(const AttributeSchema& schema, const Eigen::VectorXd& full_encoding);

/// Drops the last-level coordinate of each block of a one-hot design vector.
Eigen::VectorXd constrain_design(const AttributeSchema& schema, const Eigen::VectorXd& full);

/// Shifts each attribute block so its last level is zero, then drops that
/// coordinate. Utility gaps between any two designs are unchanged.
Eigen::VectorXd constrain_part_worth(const AttributeSchema& schema, const Eigen::VectorXd& full);

/// Inverse of constrain_part_worth up to the per-block shift (last level = 0).
Eigen::VectorXd expand_part_worth(const AttributeSchema& schema, const Eigen::VectorXd& constrained);

struct Design {
  LevelIndex level_index;
  Eigen::VectorXd encoding;     // full one-hot, length D_full
  Eigen::VectorXd constrained;  // length D
  double price = 0.0;
  double cost = 0.0;

  double margin() const { return price - cost; }
};

Design make_design(const AttributeSchema& schema, LevelIndex level_index, double cost);

/// Either one explicit cost per design, or an additive per-level model.
struct CostModel {
  enum class Kind { kExplicit, kAdditive };
  Kind kind = Kind::kAdditive;
  std::vector<double> explicit_costs;
  std::vector<std::vector<double>> level_costs;  // [attribute][level]
  double base = 0.0;

  double additive_cost(std::span<const int> level_index) const;
};

/// The finite candidate set Z with prices, costs and an optional pinned
/// competitor. Immutable once built.
class DesignSpace {
 public:
  DesignSpace(AttributeSchema schema, std::vector<Design> designs, CostModel cost_model,
              std::optional<Design> competitor);

  const AttributeSchema& schema() const { return schema_; }
  const std::vector<Design>& designs() const { return designs_; }
  const Design& design(std::size_t k) const { return designs_[k]; }
  std::size_t size() const { return designs_.size(); }
  std::size_t dimension() const { return schema_.dimension(); }
  const CostModel& cost_model() const { return cost_model_; }

  /// Pinned competitor, or nullopt when the file asked for a random one.
  const std::optional<Design>& competitor() const { return competitor_; }

  /// K x D matrix of constrained encodings, row k = design k.
  const Eigen::MatrixXd& constrained_matrix() const { return constrained_; }
  const Eigen::VectorXd& margins() const { return margins_; }

  std::optional<std::size_t> find(std::span<const int> level_index) const;

  /// Builds a two-product market against `competitor`.
  Market market(const Design& competitor) const;
  Market market_against(std::size_t competitor_index) const;

  /// Designs compatible with this schema but not necessarily members of Z.
  Design make(LevelIndex level_index) const;

 private:
  AttributeSchema schema_;
  std::vector<Design> designs_;
  CostModel cost_model_;
  std::optional<Design> competitor_;
  Eigen::MatrixXd constrained_;
  Eigen::VectorXd margins_;
};

/// Every combination of levels in lexicographic order (last attribute
/// varies fastest).
std::vector<LevelIndex> full_factorial(const AttributeSchema& schema);

DesignSpace load_design_space(const std::filesystem::path& path);
DesignSpace parse_design_space(const std::string& json_text);

/// Reads a part-worth CSV (attribute,level,value) keyed by attribute name and
/// level label, returning the constrained (shifted) part-worth vector.
Eigen::VectorXd load_part_worths(const AttributeSchema& schema, const std::filesystem::path& path);
Eigen::VectorXd parse_part_worths(const AttributeSchema& schema, const std::string& csv_text);

}  // namespace optdesign
