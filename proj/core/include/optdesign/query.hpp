#pragma once

#include <cstddef>
#include <cstdint>
#include <unordered_set>
#include <utility>

namespace optdesign {

/// A pairwise question between designs `first` and `second`. The left
/// branch is the response "first preferred", i.e. w'(z_first - z_second) > 0.
struct Query {
  std::size_t first = 0;
  std::size_t second = 0;

  Query normalized() const { return first < second ? *this : Query{second, first}; }
  friend bool operator==(const Query&, const Query&) = default;
};

/// Unordered pairs already asked (or otherwise excluded).
class QuerySet {
 public:
  void insert(Query q) { keys_.insert(key(q)); }
  bool contains(Query q) const { return keys_.count(key(q)) != 0; }
  std::size_t size() const { return keys_.size(); }
  bool empty() const { return keys_.empty(); }

 private:
  static std::uint64_t key(Query q) {
    const Query n = q.normalized();
    return (static_cast<std::uint64_t>(n.first) << 32) | static_cast<std::uint64_t>(n.second);
  }
  std::unordered_set<std::uint64_t> keys_;
};

}  // namespace optdesign
