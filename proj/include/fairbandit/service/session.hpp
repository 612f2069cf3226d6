#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairbandit/config.hpp"
#include "fairbandit/environment.hpp"
#include "fairbandit/error.hpp"
#include "fairbandit/json_io.hpp"
#include "fairbandit/policy.hpp"
#include "fairbandit/rng.hpp"
#include "fairbandit/schedule.hpp"
#include "fairbandit/state.hpp"

namespace fairbandit::service {

using nlohmann::json;

inline constexpr double kDefaultNormalizer = 300.0;
inline constexpr int kSnapshotVersion = 1;

enum class SessionStatus { Waiting, Active, Finished };

constexpr std::string_view to_string(SessionStatus s) {
  switch (s) {
    case SessionStatus::Waiting: return "waiting";
    case SessionStatus::Active: return "active";
    case SessionStatus::Finished: return "finished";
  }
  return "?";
}

inline SessionStatus parse_status(std::string_view text) {
  if (text == "waiting") return SessionStatus::Waiting;
  if (text == "active") return SessionStatus::Active;
  if (text == "finished") return SessionStatus::Finished;
  throw Error(ErrorCode::CorruptSnapshot, "unknown status '" + std::string(text) + "'");
}

struct SessionParams {
  std::size_t players = 2;
  Rate rate{1, 3};
  std::uint64_t horizon = 30;
  PolicyKind policy = PolicyKind::Strict;
  std::uint64_t seed = 0;
  double normalizer = kDefaultNormalizer;
  std::optional<std::vector<std::uint64_t>> slots;
  std::optional<std::vector<ArmIndex>> assignment;
};

struct Turn {
  ArmIndex player = 0;
  std::uint64_t round = 0;  // rounds completed before this turn
  Provenance provenance = Provenance::Init;
};

/// One allocation round as recorded after its score came in.
struct RoundRecord {
  Decision decision;
  double points = 0.0;
  double reward = 0.0;
};

/// A live allocation session: players are arms, scores are turned into
/// rewards with S_p / (M n_p). Not synchronized; SessionStore serializes
/// access per session.
class Session {
 public:
  Session(std::string id, const SessionParams& params)
      : id_(std::move(id)),
        policy_(params.policy, validate_config(params.players, params.rate, params.horizon),
                params.policy == PolicyKind::Strict
                    ? build_schedule(validate_config(params.players, params.rate, params.horizon), params.slots,
                                     params.assignment)
                    : Schedule{},
                derive_stream(params.seed, 0, StreamPurpose::Policy)),
        state_(params.players),
        normalizer_(params.normalizer),
        scores_(params.players, 0.0),
        turns_(params.players, 0) {
    if (!(normalizer_ > 0.0) || !std::isfinite(normalizer_)) {
      throw Error(ErrorCode::InvalidDistribution, "normalizer M must be positive");
    }
  }

  const std::string& id() const noexcept { return id_; }
  const FairnessConfig& config() const noexcept { return policy_.config(); }
  SessionStatus status() const noexcept { return status_; }
  std::uint64_t round() const noexcept { return state_.clock(); }
  const BanditState& state() const noexcept { return state_; }
  const std::vector<RoundRecord>& history() const noexcept { return history_; }
  const std::vector<double>& scores() const noexcept { return scores_; }
  const std::vector<std::uint64_t>& turns() const noexcept { return turns_; }

  /// The pending decision; repeated calls return it unchanged until a score
  /// is reported.
  Turn next_turn() {
    if (status_ == SessionStatus::Finished) throw Error(ErrorCode::SessionFinished, "session " + id_ + " is over");
    if (!pending_) pending_ = policy_.select(state_);
    status_ = SessionStatus::Active;
    return Turn{pending_->arm, round(), pending_->provenance};
  }

  /// Credits `points` to the pending player and feeds the recomputed
  /// cumulative reward to the policy.
  void report_score(ArmIndex player, double points) {
    if (status_ == SessionStatus::Finished) throw Error(ErrorCode::SessionFinished, "session " + id_ + " is over");
    if (!(points >= 0.0) || !std::isfinite(points)) {
      throw Error(ErrorCode::NegativePoints, "points must be a finite nonnegative number");
    }
    const Turn turn = next_turn();
    if (player != turn.player) {
      throw Error(ErrorCode::WrongPlayer, "player " + std::to_string(player + 1) + " reported, player " +
                                              std::to_string(turn.player + 1) + " holds the turn");
    }
    scores_[player] += points;
    turns_[player] += 1;
    const double reward = teammate_reward({scores_[player], turns_[player], normalizer_});
    state_.update(*pending_, reward);
    history_.push_back({*pending_, points, reward});
    pending_.reset();
    if (round() == config().horizon()) status_ = SessionStatus::Finished;
  }

  json view() const {
    json players = json::array();
    for (ArmIndex p = 0; p < scores_.size(); ++p) {
      const double fraction = round() == 0 ? 0.0 : static_cast<double>(turns_[p]) / static_cast<double>(round());
      players.push_back({{"player", p + 1}, {"score", scores_[p]}, {"turns", turns_[p]}, {"pull_fraction", fraction}});
    }
    json history = json::array();
    for (std::size_t r = 0; r < history_.size(); ++r) {
      history.push_back({{"round", r + 1},
                         {"player", history_[r].decision.arm + 1},
                         {"provenance", std::string(to_string(history_[r].decision.provenance))},
                         {"points", history_[r].points},
                         {"reward", history_[r].reward}});
    }
    json pending_player = nullptr;
    if (status_ != SessionStatus::Finished) {
      // A copy of the policy (rng included) makes the decision next_turn will.
      if (pending_) {
        pending_player = pending_->arm + 1;
      } else {
        Policy peek = policy_;
        pending_player = peek.select(state_).arm + 1;
      }
    }
    return {{"session_id", id_},
            {"status", std::string(to_string(status_))},
            {"policy", std::string(to_string(policy_.kind()))},
            {"config", to_json(config())},
            {"schedule", to_json(policy_.schedule())},
            {"normalizer", normalizer_},
            {"round", round()},
            {"horizon", config().horizon()},
            {"pending_player", pending_player},
            {"players", players},
            {"history", history}};
  }

  json snapshot() const {
    json history = json::array();
    for (const auto& rec : history_) {
      history.push_back({{"decision", to_json(rec.decision)}, {"points", rec.points}, {"reward", rec.reward}});
    }
    return {{"version", kSnapshotVersion},
            {"session_id", id_},
            {"policy", std::string(to_string(policy_.kind()))},
            {"config", to_json(config())},
            {"schedule", to_json(policy_.schedule())},
            {"normalizer", normalizer_},
            {"status", std::string(to_string(status_))},
            {"state", to_json(state_)},
            {"rng", to_json(policy_.rng())},
            {"scores", scores_},
            {"turns", turns_},
            {"pending", pending_ ? to_json(*pending_) : json(nullptr)},
            {"history", history}};
  }

  static Session restore(const json& blob) {
    try {
      if (!blob.is_object() || blob.at("version").get<int>() != kSnapshotVersion) {
        throw Error(ErrorCode::CorruptSnapshot, "unsupported snapshot version");
      }
      const FairnessConfig cfg = fairness_config_from_json(blob.at("config"));
      const PolicyKind kind = parse_policy(blob.at("policy").get<std::string>());
      Schedule schedule = kind == PolicyKind::Strict ? schedule_from_json(blob.at("schedule"), cfg) : Schedule{};
      Session s(blob.at("session_id").get<std::string>(), cfg, kind, std::move(schedule),
                counter_rng_from_json(blob.at("rng")), blob.at("normalizer").get<double>());
      s.state_ = bandit_state_from_json(blob.at("state"));
      s.status_ = parse_status(blob.at("status").get<std::string>());
      s.scores_ = blob.at("scores").get<std::vector<double>>();
      s.turns_ = blob.at("turns").get<std::vector<std::uint64_t>>();
      if (!blob.at("pending").is_null()) s.pending_ = decision_from_json(blob.at("pending"), cfg.num_arms());
      for (const auto& rec : blob.at("history")) {
        s.history_.push_back({decision_from_json(rec.at("decision"), cfg.num_arms()), rec.at("points").get<double>(),
                              rec.at("reward").get<double>()});
      }
      s.check_consistent();
      return s;
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::CorruptSnapshot, e.what());
    } catch (const Error& e) {
      if (e.code() == ErrorCode::CorruptSnapshot) throw;
      throw Error(ErrorCode::CorruptSnapshot, e.what());
    }
  }

 private:
  Session(std::string id, const FairnessConfig& cfg, PolicyKind kind, Schedule schedule, CounterRng rng,
          double normalizer)
      : id_(std::move(id)),
        policy_(kind, cfg, std::move(schedule), rng),
        state_(cfg.num_arms()),
        normalizer_(normalizer),
        scores_(cfg.num_arms(), 0.0),
        turns_(cfg.num_arms(), 0) {}

  void check_consistent() const {
    const std::size_t k = config().num_arms();
    if (!(normalizer_ > 0.0) || state_.num_arms() != k || scores_.size() != k || turns_.size() != k ||
        history_.size() != state_.clock() || state_.clock() > config().horizon()) {
      throw Error(ErrorCode::CorruptSnapshot, "snapshot fields disagree");
    }
    for (ArmIndex p = 0; p < k; ++p) {
      if (turns_[p] != state_.pull_count(p) || !(scores_[p] >= 0.0)) {
        throw Error(ErrorCode::CorruptSnapshot, "turn counts disagree with bandit state");
      }
    }
    const bool done = state_.clock() == config().horizon();
    if (done != (status_ == SessionStatus::Finished) || (done && pending_)) {
      throw Error(ErrorCode::CorruptSnapshot, "status disagrees with round counter");
    }
    if (status_ == SessionStatus::Waiting && state_.clock() != 0) {
      throw Error(ErrorCode::CorruptSnapshot, "waiting session has played rounds");
    }
  }

  std::string id_;
  Policy policy_;
  BanditState state_;
  double normalizer_;
  SessionStatus status_ = SessionStatus::Waiting;
  std::vector<double> scores_;
  std::vector<std::uint64_t> turns_;
  std::optional<Decision> pending_;
  std::vector<RoundRecord> history_;
};

/// In-memory session registry. Different sessions proceed concurrently;
/// calls on one session are serialized by its own mutex.
class SessionStore {
 public:
  struct Options {
    double default_normalizer = kDefaultNormalizer;
    std::optional<std::filesystem::path> snapshot_dir;
  };

  SessionStore() = default;
  explicit SessionStore(Options options) : options_(std::move(options)) {}

  const Options& options() const noexcept { return options_; }

  /// Creates a session and returns its id. `params.normalizer` <= 0 selects
  /// the store default.
  std::string create(SessionParams params) {
    if (!(params.normalizer > 0.0)) params.normalizer = options_.default_normalizer;
    auto entry = std::make_shared<Entry>(Session(new_id(), params));
    const std::string id = entry->session.id();
    std::unique_lock lock(map_mutex_);
    sessions_.emplace(id, std::move(entry));
    return id;
  }

  Turn next_turn(const std::string& id) {
    return with(id, [](Session& s) { return s.next_turn(); });
  }

  json report_score(const std::string& id, ArmIndex player, double points) {
    return with(id, [&](Session& s) {
      s.report_score(player, points);
      return s.view();
    });
  }

  json get_state(const std::string& id) {
    return with(id, [](Session& s) { return s.view(); });
  }

  /// Returns the snapshot blob; also writes `<snapshot_dir>/<id>.json` when a
  /// directory is configured.
  json snapshot(const std::string& id) {
    json blob = with(id, [](Session& s) { return s.snapshot(); });
    if (options_.snapshot_dir) {
      const auto path = *options_.snapshot_dir / (id + ".json");
      std::ofstream out(path, std::ios::trunc);
      if (!out || !(out << blob.dump())) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
    }
    return blob;
  }

  /// Restores (or replaces) the session described by `blob`; returns its id.
  std::string restore(const json& blob) {
    auto entry = std::make_shared<Entry>(Session::restore(blob));
    const std::string id = entry->session.id();
    std::unique_lock lock(map_mutex_);
    sessions_.insert_or_assign(id, std::move(entry));
    return id;
  }

  /// Loads `<snapshot_dir>/<id>.json`.
  std::string restore_file(const std::string& id) {
    if (!options_.snapshot_dir) throw Error(ErrorCode::IoFailure, "no snapshot directory configured");
    if (id.empty() || id.find_first_of("/\\.") != std::string::npos) {
      throw Error(ErrorCode::UnknownSession, "invalid session id");
    }
    std::ifstream in(*options_.snapshot_dir / (id + ".json"));
    if (!in) throw Error(ErrorCode::UnknownSession, "no snapshot for " + id);
    std::stringstream buf;
    buf << in.rdbuf();
    json blob = json::parse(buf.str(), nullptr, false);
    if (blob.is_discarded()) throw Error(ErrorCode::CorruptSnapshot, "snapshot file is not JSON");
    return restore(blob);
  }

  std::size_t size() const {
    std::shared_lock lock(map_mutex_);
    return sessions_.size();
  }

 private:
  struct Entry {
    explicit Entry(Session s) : session(std::move(s)) {}
    std::mutex mutex;
    Session session;
  };

  template <typename Fn>
  std::invoke_result_t<Fn&, Session&> with(const std::string& id, Fn&& fn) {
    std::shared_ptr<Entry> entry;
    {
      std::shared_lock lock(map_mutex_);
      auto it = sessions_.find(id);
      if (it == sessions_.end()) throw Error(ErrorCode::UnknownSession, "no session '" + id + "'");
      entry = it->second;
    }
    std::lock_guard lock(entry->mutex);
    return fn(entry->session);
  }

  std::string new_id() {
    std::lock_guard lock(id_mutex_);
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << id_rng_();
    return out.str();
  }

  Options options_;
  mutable std::shared_mutex map_mutex_;
  std::unordered_map<std::string, std::shared_ptr<Entry>> sessions_;
  std::mutex id_mutex_;
  std::mt19937_64 id_rng_{std::random_device{}()};
};

}  // namespace fairbandit::service
