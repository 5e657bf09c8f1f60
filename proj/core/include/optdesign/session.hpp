#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "optdesign/design_space.hpp"
#include "optdesign/simulation.hpp"

namespace optdesign {

class SessionNotFound : public std::runtime_error {
 public:
  explicit SessionNotFound(const std::string& id) : std::runtime_error("no session '" + id + "'") {}
};

// Stale query id, response to a completed session.
class SessionConflict : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SessionConfig {
  Strategy strategy = Strategy::kGisa;
  std::size_t queries = 20;      // Q
  std::size_t samples = 1000;    // J
  std::size_t candidates = 100;  // N
  std::optional<std::uint64_t> seed;        // drawn at creation when unset
  std::optional<std::size_t> competitor;    // random when unset and not pinned by the space

  void validate() const;
};

enum class SessionStatus { kAwaitingResponse, kComplete };

std::string_view to_string(SessionStatus s);

/// Immutable view of a session after some number of responses.
struct SessionSnapshot {
  std::string id;
  SessionConfig config;  // seed and competitor resolved
  SessionStatus status = SessionStatus::kAwaitingResponse;
  std::size_t q = 0;
  std::optional<Query> query;
  std::string query_id;  // "q<index>", empty when complete
  Eigen::VectorXd pi;
  std::vector<double> entropy_trajectory;  // one entry per state, length q + 1
  Eigen::VectorXd w_hat;
  double prior_strength = 1.0;
  std::size_t recommendation = 0;  // argmax pi
  std::int64_t created_ms = 0;
  std::int64_t updated_ms = 0;

  /// Designs by descending pi (lowest index first on ties), at most n.
  std::vector<std::size_t> top(std::size_t n) const;
};

/// In-process session registry with optional file-backed persistence:
/// <dir>/<id>/config.json plus an append-only responses.jsonl replayed on
/// load. Responses within one session are serialized; reads only copy a
/// snapshot pointer.
class SessionManager {
 public:
  SessionManager(std::shared_ptr<const DesignSpace> space,
                 std::optional<std::filesystem::path> persist_dir = std::nullopt);
  ~SessionManager();

  const DesignSpace& space() const { return *space_; }

  std::shared_ptr<const SessionSnapshot> create(const SessionConfig& config);
  /// Throws SessionNotFound.
  std::shared_ptr<const SessionSnapshot> get(const std::string& id) const;
  /// Throws SessionNotFound, SessionConflict (stale id, complete session)
  /// or ValidationError (chosen design not in the query).
  std::shared_ptr<const SessionSnapshot> respond(const std::string& id, const std::string& query_id,
                                                 std::size_t chosen);

  std::vector<std::string> ids() const;

  /// Replays every persisted session; returns how many were loaded.
  std::size_t load_persisted();

 private:
  struct Session;

  std::shared_ptr<Session> find(const std::string& id) const;
  std::shared_ptr<Session> build(std::string id, SessionConfig config, std::int64_t created_ms);
  std::string new_id();

  std::shared_ptr<const DesignSpace> space_;
  std::optional<std::filesystem::path> persist_dir_;
  mutable std::shared_mutex map_mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::mutex id_mutex_;
  std::uint64_t id_state_;
};

}  // namespace optdesign
