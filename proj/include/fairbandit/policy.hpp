#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "fairbandit/config.hpp"
#include "fairbandit/error.hpp"
#include "fairbandit/rng.hpp"
#include "fairbandit/schedule.hpp"
#include "fairbandit/state.hpp"

namespace fairbandit {

enum class PolicyKind { Strict, Stochastic, Unconstrained };

constexpr std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Strict: return "strict";
    case PolicyKind::Stochastic: return "stochastic";
    case PolicyKind::Unconstrained: return "ucb";
  }
  return "?";
}

inline PolicyKind parse_policy(std::string_view text) {
  if (text == "strict") return PolicyKind::Strict;
  if (text == "stochastic") return PolicyKind::Stochastic;
  if (text == "ucb" || text == "unconstrained") return PolicyKind::Unconstrained;
  throw Error(ErrorCode::ParseError, "unknown policy '" + std::string(text) + "'");
}

namespace detail {

inline void check_step(const BanditState& state, const FairnessConfig& cfg) {
  if (state.num_arms() != cfg.num_arms()) {
    throw Error(ErrorCode::ArmCountMismatch, "state and config disagree on K");
  }
  if (state.clock() >= cfg.horizon()) {
    throw Error(ErrorCode::HorizonExceeded,
                "step " + std::to_string(state.clock() + 1) + " beyond T = " + std::to_string(cfg.horizon()));
  }
}

/// Init phase: step t <= K pulls arm t.
inline bool in_init(const BanditState& state) { return state.clock() < state.num_arms(); }

}  // namespace detail

/// Strictly rate-constrained UCB. Step t = clock + 1 pulls arm t during init,
/// the reserved arm on a prescheduled slot, and the UCB argmax otherwise.
inline Decision select_strict(const BanditState& state, const Schedule& schedule, const FairnessConfig& cfg) {
  detail::check_step(state, cfg);
  if (detail::in_init(state)) return Decision{state.clock(), Provenance::Init, std::nullopt};
  const ArmIndex leader = ucb_argmax(state, cfg.horizon());
  if (auto reserved = schedule.prescheduled_arm(state.clock() + 1)) {
    return Decision{*reserved, Provenance::Prescheduled, leader};
  }
  return Decision{leader, Provenance::UcbArgmax, leader};
}

/// Stochastically rate-constrained UCB: after init, the UCB argmax with
/// probability 1 - Kv, otherwise a uniformly drawn arm. Consumes one draw
/// for the coin and, on the uniform branch, one (rarely more) for the arm.
inline Decision select_stochastic(const BanditState& state, const FairnessConfig& cfg, CounterRng& rng) {
  detail::check_step(state, cfg);
  if (detail::in_init(state)) return Decision{state.clock(), Provenance::Init, std::nullopt};
  const ArmIndex leader = ucb_argmax(state, cfg.horizon());
  if (rng.uniform01() < cfg.exploit_probability()) return Decision{leader, Provenance::UcbArgmax, leader};
  const auto drawn = static_cast<ArmIndex>(rng.uniform_below(cfg.num_arms()));
  return Decision{drawn, Provenance::UniformDraw, leader};
}

/// Plain UCB with the same index and tie-break; ignores the rate.
inline Decision select_unconstrained(const BanditState& state, const FairnessConfig& cfg) {
  detail::check_step(state, cfg);
  if (detail::in_init(state)) return Decision{state.clock(), Provenance::Init, std::nullopt};
  const ArmIndex leader = ucb_argmax(state, cfg.horizon());
  return Decision{leader, Provenance::UcbArgmax, leader};
}

struct MixtureDistribution {
  std::vector<double> probabilities;
};

/// Mass (1 - Kv) + v on `leader`, v on every other arm.
inline MixtureDistribution mixture_around(ArmIndex leader, const FairnessConfig& cfg) {
  if (leader >= cfg.num_arms()) throw Error(ErrorCode::ArmOutOfRange, "leader outside [1, K]");
  const double v = cfg.min_rate();
  MixtureDistribution p{std::vector<double>(cfg.num_arms(), v)};
  p.probabilities[leader] = cfg.exploit_probability() + v;
  return p;
}

/// The stochastic policy's per-step distribution p_t for the current state.
inline MixtureDistribution mixture_of(const BanditState& state, const FairnessConfig& cfg) {
  return mixture_around(ucb_argmax(state, cfg.horizon()), cfg);
}

/// A policy bound to its configuration, so drivers can step any of the three
/// uniformly. Owns the policy rng for the stochastic variant.
class Policy {
 public:
  Policy(PolicyKind kind, FairnessConfig cfg, Schedule schedule, CounterRng rng = {})
      : kind_(kind), cfg_(cfg), schedule_(std::move(schedule)), rng_(rng) {}

  Decision select(const BanditState& state) {
    switch (kind_) {
      case PolicyKind::Strict: return select_strict(state, schedule_, cfg_);
      case PolicyKind::Stochastic: return select_stochastic(state, cfg_, rng_);
      case PolicyKind::Unconstrained: return select_unconstrained(state, cfg_);
    }
    return {};
  }

  PolicyKind kind() const noexcept { return kind_; }
  const FairnessConfig& config() const noexcept { return cfg_; }
  const Schedule& schedule() const noexcept { return schedule_; }
  const CounterRng& rng() const noexcept { return rng_; }

 private:
  PolicyKind kind_;
  FairnessConfig cfg_;
  Schedule schedule_;
  CounterRng rng_;
};

}  // namespace fairbandit
