#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "optdesign/design_space.hpp"
#include "optdesign/errors.hpp"

namespace optdesign {

namespace {

using nlohmann::json;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError("cannot open '" + path.string() + "'");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string level_label(const json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number()) return j.dump();
  throw ParseError("level labels must be strings or numbers");
}

LevelIndex parse_level_index(const json& j, const char* what) {
  if (!j.is_array()) {
    throw ParseError(std::string(what) + " must be an array of level indices");
  }
  LevelIndex out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number_integer()) {
      throw ParseError(std::string(what) + " entries must be integers");
    }
    out.push_back(v.get<int>());
  }
  return out;
}

AttributeSchema parse_schema(const json& j) {
  if (!j.is_object()) throw ParseError("'schema' must be an object");
  if (!j.contains("attributes") || !j["attributes"].is_array()) {
    throw ParseError("'schema.attributes' must be an array");
  }
  std::vector<Attribute> attrs;
  for (const auto& a : j["attributes"]) {
    Attribute attr;
    attr.name = a.at("name").get<std::string>();
    attr.unit = a.value("unit", std::string{});
    if (!a.contains("levels") || !a["levels"].is_array()) {
      throw ParseError("attribute '" + attr.name + "' needs a 'levels' array");
    }
    for (const auto& l : a["levels"]) attr.levels.push_back(level_label(l));
    attrs.push_back(std::move(attr));
  }
  if (!j.contains("price_attribute") || !j["price_attribute"].is_number_integer()) {
    throw ParseError("'schema.price_attribute' must be an integer");
  }
  const auto price_attr = j["price_attribute"].get<long long>();
  if (price_attr < 0) throw ParseError("'schema.price_attribute' must be non-negative");
  if (!j.contains("price_values") || !j["price_values"].is_array()) {
    throw ParseError("'schema.price_values' must be an array");
  }
  std::vector<double> prices;
  for (const auto& p : j["price_values"]) {
    if (!p.is_number()) throw ParseError("price values must be numbers");
    prices.push_back(p.get<double>());
  }
  return AttributeSchema(std::move(attrs), static_cast<std::size_t>(price_attr),
                         std::move(prices));
}

CostModel parse_cost_model(const json& j, const AttributeSchema& schema) {
  CostModel cm;
  if (j.is_null()) {
    cm.kind = CostModel::Kind::kAdditive;
    for (std::size_t a = 0; a < schema.attribute_count(); ++a) {
      cm.level_costs.emplace_back(schema.level_count(a), 0.0);
    }
    return cm;
  }
  if (!j.is_object()) throw ParseError("'cost_model' must be an object");
  if (j.contains("explicit")) {
    cm.kind = CostModel::Kind::kExplicit;
    for (const auto& c : j["explicit"]) {
      if (!c.is_number()) throw ParseError("explicit costs must be numbers");
      cm.explicit_costs.push_back(c.get<double>());
    }
    return cm;
  }
  if (j.contains("additive")) {
    cm.kind = CostModel::Kind::kAdditive;
    cm.base = j.value("base", 0.0);
    const auto& add = j["additive"];
    if (!add.is_array() || add.size() != schema.attribute_count()) {
      throw ParseError("'cost_model.additive' needs one array per attribute");
    }
    for (std::size_t a = 0; a < schema.attribute_count(); ++a) {
      const auto& row = add[a];
      if (!row.is_array() || row.size() != schema.level_count(a)) {
        throw ParseError("'cost_model.additive' entry for attribute '" +
                         schema.attributes()[a].name + "' needs one cost per level");
      }
      std::vector<double> costs;
      for (const auto& c : row) {
        if (!c.is_number()) throw ParseError("additive costs must be numbers");
        costs.push_back(c.get<double>());
      }
      cm.level_costs.push_back(std::move(costs));
    }
    return cm;
  }
  throw ParseError("'cost_model' must contain 'explicit' or 'additive'");
}

}  // namespace

DesignSpace parse_design_space(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("design-space JSON: ") + e.what());
  }
  try {
    if (!root.is_object() || !root.contains("schema")) {
      throw ParseError("design-space file needs a 'schema' object");
    }
    AttributeSchema schema = parse_schema(root["schema"]);
    CostModel cost_model = parse_cost_model(root.value("cost_model", json{}), schema);

    std::vector<LevelIndex> level_sets;
    const json designs = root.value("designs", json("full_factorial"));
    if (designs.is_string()) {
      if (designs.get<std::string>() != "full_factorial") {
        throw ParseError("'designs' must be \"full_factorial\" or a list of level indices");
      }
      level_sets = full_factorial(schema);
    } else if (designs.is_array()) {
      for (const auto& d : designs) level_sets.push_back(parse_level_index(d, "design"));
    } else {
      throw ParseError("'designs' must be \"full_factorial\" or a list of level indices");
    }

    if (cost_model.kind == CostModel::Kind::kExplicit &&
        cost_model.explicit_costs.size() != level_sets.size()) {
      throw ParseError("explicit cost list has " +
                       std::to_string(cost_model.explicit_costs.size()) + " entries for " +
                       std::to_string(level_sets.size()) + " designs");
    }

    std::vector<Design> out;
    out.reserve(level_sets.size());
    for (std::size_t k = 0; k < level_sets.size(); ++k) {
      schema.validate_levels(level_sets[k]);
      const double cost = cost_model.kind == CostModel::Kind::kExplicit
                              ? cost_model.explicit_costs[k]
                              : cost_model.additive_cost(level_sets[k]);
      out.push_back(make_design(schema, std::move(level_sets[k]), cost));
    }

    std::optional<Design> competitor;
    const json comp = root.value("competitor", json("random"));
    if (comp.is_string()) {
      if (comp.get<std::string>() != "random") {
        throw ParseError("'competitor' must be \"random\" or a list of level indices");
      }
    } else {
      LevelIndex li = parse_level_index(comp, "competitor");
      schema.validate_levels(li);
      double cost = 0.0;
      if (cost_model.kind == CostModel::Kind::kAdditive) cost = cost_model.additive_cost(li);
      competitor = make_design(schema, std::move(li), std::max(cost, 0.0));
    }
    return DesignSpace(std::move(schema), std::move(out), std::move(cost_model),
                       std::move(competitor));
  } catch (const ValidationError& e) {
    throw ParseError(std::string("design-space file: ") + e.what());
  } catch (const json::exception& e) {
    throw ParseError(std::string("design-space file: ") + e.what());
  }
}

DesignSpace load_design_space(const std::filesystem::path& path) {
  return parse_design_space(read_file(path));
}

Eigen::VectorXd parse_part_worths(const AttributeSchema& schema, const std::string& csv_text) {
  std::istringstream in(csv_text);
  std::string line;
  Eigen::VectorXd full = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(schema.full_dimension()));
  std::vector<bool> seen(schema.full_dimension(), false);
  bool header = true;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      if (line.rfind("attribute", 0) == 0) continue;
    }
    const auto c1 = line.find(',');
    const auto c2 = line.rfind(',');
    if (c1 == std::string::npos || c1 == c2) {
      throw ParseError("part-worth line " + std::to_string(line_no) +
                       ": expected attribute,level,value");
    }
    const std::string attr = line.substr(0, c1);
    const std::string level = line.substr(c1 + 1, c2 - c1 - 1);
    double value = 0.0;
    try {
      std::size_t used = 0;
      value = std::stod(line.substr(c2 + 1), &used);
    } catch (const std::exception&) {
      throw ParseError("part-worth line " + std::to_string(line_no) + ": bad value");
    }
    const auto a = schema.find_attribute(attr);
    if (!a) throw ParseError("part-worth line " + std::to_string(line_no) +
                             ": unknown attribute '" + attr + "'");
    const auto l = schema.find_level(*a, level);
    if (!l) throw ParseError("part-worth line " + std::to_string(line_no) +
                             ": unknown level '" + level + "' for '" + attr + "'");
    const std::size_t pos = schema.full_offset(*a) + static_cast<std::size_t>(*l);
    if (seen[pos]) throw ParseError("part-worth for " + attr + "/" + level + " given twice");
    seen[pos] = true;
    full[static_cast<Eigen::Index>(pos)] = value;
  }
  for (std::size_t a = 0; a < schema.attribute_count(); ++a) {
    for (std::size_t l = 0; l < schema.level_count(a); ++l) {
      if (!seen[schema.full_offset(a) + l]) {
        throw ParseError("part-worth missing for " + schema.attributes()[a].name + "/" +
                         schema.attributes()[a].levels[l]);
      }
    }
  }
  return constrain_part_worth(schema, full);
}

Eigen::VectorXd load_part_worths(const AttributeSchema& schema,
                                 const std::filesystem::path& path) {
  return parse_part_worths(schema, read_file(path));
}

}  // namespace optdesign
