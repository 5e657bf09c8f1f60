#include "optdesign/session.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "optdesign/errors.hpp"

namespace optdesign {

namespace {

std::int64_t now_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

std::string query_id_for(std::size_t q) { return "q" + std::to_string(q); }

nlohmann::json config_to_json(const SessionConfig& c, std::int64_t created_ms) {
  return {{"strategy", to_string(c.strategy)},
          {"queries", c.queries},
          {"samples", c.samples},
          {"candidates", c.candidates},
          {"seed", c.seed.value_or(0)},
          {"competitor", c.competitor ? nlohmann::json(*c.competitor) : nlohmann::json(nullptr)},
          {"created_ms", created_ms}};
}

}  // namespace

void SessionConfig::validate() const {
  if (samples == 0) throw ValidationError("samples (J) must be at least 1");
  if (candidates < 2) throw ValidationError("candidates (N) must be at least 2");
}

std::string_view to_string(SessionStatus s) {
  return s == SessionStatus::kComplete ? "complete" : "awaiting-response";
}

std::vector<std::size_t> SessionSnapshot::top(std::size_t n) const {
  std::vector<std::size_t> order(static_cast<std::size_t>(pi.size()));
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return pi[static_cast<Eigen::Index>(a)] > pi[static_cast<Eigen::Index>(b)];
  });
  if (order.size() > n) order.resize(n);
  return order;
}

struct SessionManager::Session {
  std::string id;
  SessionConfig config;
  std::int64_t created_ms = 0;

  std::mutex writer;  // serializes responses
  std::unique_ptr<QuestionnaireEngine> engine;
  std::vector<double> entropy;

  mutable std::mutex snapshot_mutex;  // guards only the pointer swap
  std::shared_ptr<const SessionSnapshot> snapshot;

  std::shared_ptr<const SessionSnapshot> current() const {
    std::lock_guard lock(snapshot_mutex);
    return snapshot;
  }

  void publish() {
    auto s = std::make_shared<SessionSnapshot>();
    const RoundState& st = engine->state();
    s->id = id;
    s->config = config;
    s->q = st.q;
    s->query = st.next;
    s->status = st.next ? SessionStatus::kAwaitingResponse : SessionStatus::kComplete;
    s->query_id = st.next ? query_id_for(st.q) : std::string();
    s->pi = st.masses.pi;
    s->entropy_trajectory = entropy;
    s->w_hat = st.fit.map.w;
    s->prior_strength = st.fit.cv.prior_strength;
    s->recommendation = most_probable(st.masses);
    s->created_ms = created_ms;
    s->updated_ms = now_ms();
    std::lock_guard lock(snapshot_mutex);
    snapshot = std::move(s);
  }
};

SessionManager::SessionManager(std::shared_ptr<const DesignSpace> space,
                               std::optional<std::filesystem::path> persist_dir)
    : space_(std::move(space)), persist_dir_(std::move(persist_dir)) {
  std::random_device rd;
  id_state_ = (static_cast<std::uint64_t>(rd()) << 32) ^ rd() ^
              static_cast<std::uint64_t>(now_ms());
  if (persist_dir_) std::filesystem::create_directories(*persist_dir_);
}

SessionManager::~SessionManager() = default;

std::string SessionManager::new_id() {
  std::lock_guard lock(id_mutex_);
  id_state_ = derive_seed(id_state_, 0x5e55);
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << id_state_;
  return ss.str();
}

std::shared_ptr<SessionManager::Session> SessionManager::build(std::string id, SessionConfig config,
                                                               std::int64_t created_ms) {
  config.validate();
  if (!config.seed) {
    std::random_device rd;
    config.seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  }
  Market market;
  if (config.competitor) {
    if (*config.competitor >= space_->size()) {
      throw ValidationError("competitor index out of range");
    }
    market = space_->market_against(*config.competitor);
  } else if (space_->competitor()) {
    market = space_->market(*space_->competitor());
  } else {
    std::mt19937_64 rng(derive_seed(*config.seed, 3));
    std::uniform_int_distribution<std::size_t> pick(0, space_->size() - 1);
    config.competitor = pick(rng);
    market = space_->market_against(*config.competitor);
  }

  EngineConfig ec;
  ec.strategy = config.strategy;
  ec.samples = config.samples;
  ec.candidates = config.candidates;
  ec.budget = config.queries;
  ec.seed = *config.seed;

  auto s = std::make_shared<Session>();
  s->id = std::move(id);
  s->config = config;
  s->created_ms = created_ms;
  s->engine = std::make_unique<QuestionnaireEngine>(space_, std::move(market), ec);
  s->entropy.push_back(s->engine->state().masses.entropy);
  s->publish();
  return s;
}

std::shared_ptr<const SessionSnapshot> SessionManager::create(const SessionConfig& config) {
  auto s = build(new_id(), config, now_ms());
  if (persist_dir_) {
    const auto dir = *persist_dir_ / s->id;
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / "config.json");
    out << config_to_json(s->config, s->created_ms).dump(2) << '\n';
    std::ofstream(dir / "responses.jsonl", std::ios::app);
  }
  auto snap = s->current();
  std::unique_lock lock(map_mutex_);
  sessions_.emplace(s->id, std::move(s));
  return snap;
}

std::shared_ptr<SessionManager::Session> SessionManager::find(const std::string& id) const {
  std::shared_lock lock(map_mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw SessionNotFound(id);
  return it->second;
}

std::shared_ptr<const SessionSnapshot> SessionManager::get(const std::string& id) const {
  return find(id)->current();
}

std::shared_ptr<const SessionSnapshot> SessionManager::respond(const std::string& id,
                                                               const std::string& query_id,
                                                               std::size_t chosen) {
  const auto s = find(id);
  std::lock_guard lock(s->writer);
  const RoundState& st = s->engine->state();
  if (!st.next) throw SessionConflict("session is complete");
  if (query_id != query_id_for(st.q)) {
    throw SessionConflict("query id '" + query_id + "' is not the outstanding query " +
                          query_id_for(st.q));
  }
  if (chosen != st.next->first && chosen != st.next->second) {
    throw ValidationError("chosen design " + std::to_string(chosen) +
                          " is not part of the outstanding query");
  }
  s->engine->respond(chosen);
  s->entropy.push_back(s->engine->state().masses.entropy);
  if (persist_dir_) {
    std::ofstream out(*persist_dir_ / s->id / "responses.jsonl", std::ios::app);
    out << nlohmann::json{{"query_id", query_id}, {"chosen", chosen}}.dump() << '\n';
  }
  s->publish();
  return s->current();
}

std::vector<std::string> SessionManager::ids() const {
  std::shared_lock lock(map_mutex_);
  std::vector<std::string> out;
  for (const auto& [id, s] : sessions_) out.push_back(id);
  return out;
}

std::size_t SessionManager::load_persisted() {
  if (!persist_dir_) return 0;
  std::size_t loaded = 0;
  std::vector<std::filesystem::path> dirs;
  for (const auto& entry : std::filesystem::directory_iterator(*persist_dir_)) {
    if (entry.is_directory() && std::filesystem::exists(entry.path() / "config.json")) {
      dirs.push_back(entry.path());
    }
  }
  std::sort(dirs.begin(), dirs.end());
  for (const auto& dir : dirs) {
    try {
      std::ifstream cfg_in(dir / "config.json");
      const auto cfg = nlohmann::json::parse(cfg_in);
      SessionConfig c;
      c.strategy = parse_strategy(cfg.at("strategy").get<std::string>());
      c.queries = cfg.at("queries").get<std::size_t>();
      c.samples = cfg.at("samples").get<std::size_t>();
      c.candidates = cfg.at("candidates").get<std::size_t>();
      c.seed = cfg.at("seed").get<std::uint64_t>();
      if (!cfg.at("competitor").is_null()) c.competitor = cfg.at("competitor").get<std::size_t>();
      auto s = build(dir.filename().string(), c, cfg.value("created_ms", std::int64_t{0}));

      std::ifstream log(dir / "responses.jsonl");
      std::string line;
      while (std::getline(log, line)) {
        if (line.empty()) continue;
        const auto r = nlohmann::json::parse(line);
        const RoundState& st = s->engine->state();
        if (!st.next || r.at("query_id").get<std::string>() != query_id_for(st.q)) {
          throw ParseError("response log out of sequence");
        }
        s->engine->respond(r.at("chosen").get<std::size_t>());
        s->entropy.push_back(s->engine->state().masses.entropy);
      }
      s->publish();
      std::unique_lock lock(map_mutex_);
      sessions_[s->id] = std::move(s);
      ++loaded;
    } catch (const std::exception& e) {
      std::cerr << "skipping persisted session " << dir << ": " << e.what() << '\n';
    }
  }
  return loaded;
}

}  // namespace optdesign
