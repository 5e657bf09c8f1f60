#include "optdesign/discrete_gisa.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "optdesign/errors.hpp"
#include "optdesign/gisa.hpp"

namespace optdesign {

void DiscreteGroupInstance::validate() const {
  if (objects.empty()) throw ValidationError("instance has no objects");
  if (priors.size() != objects.size() || group_of.size() != objects.size()) {
    throw ValidationError("every object needs a prior and a group");
  }
  double total = 0.0;
  for (double p : priors) {
    if (!(p >= 0.0)) throw ValidationError("object priors must be non-negative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ValidationError("object priors must sum to 1");
  for (std::size_t g : group_of) {
    if (g >= groups.size()) throw ValidationError("object refers to an unknown group");
  }
  if (answers.size() != queries.size()) throw ValidationError("every query needs answers");
  for (const auto& row : answers) {
    if (row.size() != objects.size()) {
      throw ValidationError("every query must answer every object");
    }
  }
}

DiscreteGroupInstance parse_discrete_instance(const std::string& json_text) {
  DiscreteGroupInstance inst;
  try {
    const auto doc = nlohmann::json::parse(json_text);
    for (const auto& obj : doc.at("objects")) {
      inst.objects.push_back(obj.at("name").get<std::string>());
      inst.priors.push_back(obj.at("prior").get<double>());
      const auto group = obj.at("group").get<std::string>();
      auto it = std::find(inst.groups.begin(), inst.groups.end(), group);
      if (it == inst.groups.end()) {
        inst.groups.push_back(group);
        it = inst.groups.end() - 1;
      }
      inst.group_of.push_back(static_cast<std::size_t>(it - inst.groups.begin()));
    }
    for (const auto& q : doc.at("queries")) {
      inst.queries.push_back(q.at("name").get<std::string>());
      inst.answers.push_back(q.at("answers").get<std::vector<bool>>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("discrete instance: ") + e.what());
  }
  inst.validate();
  return inst;
}

DiscreteGroupInstance load_discrete_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open instance file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_discrete_instance(ss.str());
}

std::vector<double> discrete_group_masses(const DiscreteGroupInstance& inst,
                                          const std::vector<double>& weights) {
  std::vector<double> mass(inst.group_count(), 0.0);
  double total = 0.0;
  for (std::size_t o = 0; o < inst.object_count(); ++o) {
    mass[inst.group_of[o]] += weights[o];
    total += weights[o];
  }
  if (total <= 0.0) throw ValidationError("object weights have no mass");
  for (double& m : mass) m /= total;
  return mass;
}

DiscreteQueryScore score_discrete_query(const DiscreteGroupInstance& inst,
                                        const std::vector<double>& weights, std::size_t query) {
  if (query >= inst.query_count()) throw ValidationError("unknown query index");
  if (weights.size() != inst.object_count()) {
    throw ValidationError("one weight per object is required");
  }
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (total <= 0.0) throw ValidationError("object weights have no mass");

  DiscreteQueryScore s;
  s.query = query;
  const std::vector<double> mass = discrete_group_masses(inst, weights);
  s.group_left.assign(inst.group_count(), 0.0);
  for (std::size_t o = 0; o < inst.object_count(); ++o) {
    if (inst.answers[query][o]) {
      s.group_left[inst.group_of[o]] += weights[o] / total;
      s.pi_left += weights[o] / total;
    }
  }
  s.pi_right = 1.0 - s.pi_left;
  s.rho = std::max(s.pi_left, s.pi_right);
  s.rho_k.assign(inst.group_count(), 0.0);
  for (std::size_t k = 0; k < mass.size(); ++k) {
    if (mass[k] > 0.0) {
      s.rho_k[k] = std::max(s.group_left[k], mass[k] - s.group_left[k]) / mass[k];
    }
  }
  s.l_tilde = local_objective(s.pi_left, mass, s.group_left);
  return s;
}

DiscreteSelection select_discrete_query(const DiscreteGroupInstance& inst,
                                        const std::vector<double>& weights,
                                        const std::vector<std::size_t>& available) {
  if (available.empty()) throw CandidatesExhausted();
  DiscreteSelection sel;
  std::size_t best = 0;
  for (std::size_t i = 0; i < available.size(); ++i) {
    sel.table.push_back(score_discrete_query(inst, weights, available[i]));
    if (sel.table[i].l_tilde < sel.table[best].l_tilde) best = i;
  }
  sel.query = available[best];
  return sel;
}

namespace {

struct TreeBuilder {
  const DiscreteGroupInstance& inst;
  DiscreteTree tree;

  int build(const std::vector<double>& weights, std::vector<bool> used, std::size_t depth) {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[static_cast<std::size_t>(id)].depth = depth;
    const double mass = std::accumulate(weights.begin(), weights.end(), 0.0);
    tree.nodes[static_cast<std::size_t>(id)].probability = mass;

    const std::vector<double> groups = discrete_group_masses(inst, weights);
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (groups[g] >= 1.0 - 1e-12) {
        auto& node = tree.nodes[static_cast<std::size_t>(id)];
        node.resolved = true;
        node.group = g;
        tree.expected_length += mass * static_cast<double>(depth);
        return id;
      }
    }

    std::vector<std::size_t> splitting;
    for (std::size_t q = 0; q < inst.query_count(); ++q) {
      if (used[q]) continue;
      double yes = 0.0;
      double no = 0.0;
      for (std::size_t o = 0; o < inst.object_count(); ++o) {
        (inst.answers[q][o] ? yes : no) += weights[o];
      }
      if (yes > 0.0 && no > 0.0) splitting.push_back(q);
    }
    if (splitting.empty()) {
      ++tree.unresolved_leaves;
      tree.expected_length += mass * static_cast<double>(depth);
      return id;
    }

    const std::size_t q = select_discrete_query(inst, weights, splitting).query;
    tree.nodes[static_cast<std::size_t>(id)].query = q;
    used[q] = true;
    std::vector<double> yes_w(weights.size(), 0.0);
    std::vector<double> no_w(weights.size(), 0.0);
    for (std::size_t o = 0; o < inst.object_count(); ++o) {
      (inst.answers[q][o] ? yes_w : no_w)[o] = weights[o];
    }
    const int yes = build(yes_w, used, depth + 1);
    const int no = build(no_w, used, depth + 1);
    tree.nodes[static_cast<std::size_t>(id)].yes = yes;
    tree.nodes[static_cast<std::size_t>(id)].no = no;
    return id;
  }
};

}  // namespace

DiscreteTree discrete_gisa(const DiscreteGroupInstance& inst) {
  inst.validate();
  TreeBuilder b{inst, {}};
  b.build(inst.priors, std::vector<bool>(inst.query_count(), false), 0);
  return std::move(b.tree);
}

}  // namespace optdesign
