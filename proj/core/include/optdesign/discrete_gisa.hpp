#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace optdesign {

/// A finite group-identification problem: objects with prior masses, a
/// partition of the objects into groups, and binary queries with a known
/// answer for every object.
struct DiscreteGroupInstance {
  std::vector<std::string> objects;
  std::vector<double> priors;
  std::vector<std::string> groups;
  std::vector<std::size_t> group_of;  // per object
  std::vector<std::string> queries;
  std::vector<std::vector<bool>> answers;  // [query][object], true = "yes" (left)

  std::size_t object_count() const { return objects.size(); }
  std::size_t group_count() const { return groups.size(); }
  std::size_t query_count() const { return queries.size(); }

  /// Throws ValidationError unless priors sum to 1, every object has a
  /// group and every query answers every object.
  void validate() const;
};

DiscreteGroupInstance load_discrete_instance(const std::filesystem::path& path);
DiscreteGroupInstance parse_discrete_instance(const std::string& json_text);

struct DiscreteQueryScore {
  std::size_t query = 0;
  double pi_left = 0.0;
  double pi_right = 0.0;
  double rho = 0.0;
  std::vector<double> group_left;  // pi_{l,k}
  std::vector<double> rho_k;       // zero where pi_k = 0
  double l_tilde = 0.0;
};

/// Group masses for (possibly unnormalized) object weights, normalized.
std::vector<double> discrete_group_masses(const DiscreteGroupInstance& inst,
                                          const std::vector<double>& weights);

DiscreteQueryScore score_discrete_query(const DiscreteGroupInstance& inst,
                                        const std::vector<double>& weights, std::size_t query);

struct DiscreteSelection {
  std::size_t query = 0;
  std::vector<DiscreteQueryScore> table;  // one row per offered query, in order
};

/// argmin L~ over `available`; ties keep the earlier query.
DiscreteSelection select_discrete_query(const DiscreteGroupInstance& inst,
                                        const std::vector<double>& weights,
                                        const std::vector<std::size_t>& available);

struct DiscreteTreeNode {
  std::optional<std::size_t> query;  // nullopt at leaves
  int yes = -1;
  int no = -1;
  std::size_t depth = 0;
  double probability = 0.0;          // prior mass reaching this node
  std::optional<std::size_t> group;  // set on resolved leaves
  bool resolved = false;
};

struct DiscreteTree {
  std::vector<DiscreteTreeNode> nodes;  // nodes[0] is the root
  double expected_length = 0.0;
  std::size_t unresolved_leaves = 0;
};

/// Greedy tree: at every node ask the unused query with the least L~ among
/// those that split the remaining mass. A node stops when one group holds
/// all of its mass, or is reported unresolved when no query splits it.
DiscreteTree discrete_gisa(const DiscreteGroupInstance& inst);

}  // namespace optdesign
