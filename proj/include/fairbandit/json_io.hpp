#pragma once

// JSON shapes for snapshots and traces. Arms and players are one-based in
// every document; schedule slots are one-based offsets within a block.

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairbandit/config.hpp"
#include "fairbandit/error.hpp"
#include "fairbandit/rng.hpp"
#include "fairbandit/schedule.hpp"
#include "fairbandit/state.hpp"

namespace fairbandit {

using nlohmann::json;

namespace detail {

template <typename Fn>
auto parse_or(ErrorCode code, const char* what, Fn&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw Error(code, std::string(what) + ": " + e.what());
  }
}

inline ArmIndex arm_from_json(const json& j, std::size_t num_arms, ErrorCode code) {
  const auto one_based = j.get<std::uint64_t>();
  if (one_based < 1 || one_based > num_arms) throw Error(code, "arm index out of range");
  return static_cast<ArmIndex>(one_based - 1);
}

}  // namespace detail

inline json to_json(const FairnessConfig& cfg) {
  return {{"num_arms", cfg.num_arms()}, {"min_rate", cfg.rate_string()}, {"horizon", cfg.horizon()}};
}

inline FairnessConfig fairness_config_from_json(const json& j) {
  return detail::parse_or(ErrorCode::ParseError, "fairness config", [&] {
    Rate rate;
    const auto& r = j.at("min_rate");
    if (r.is_string()) {
      rate = parse_rate(r.get<std::string>());
    } else {
      rate = Rate{r.get<std::uint64_t>(), 1};
    }
    return validate_config(j.at("num_arms").get<std::size_t>(), rate, j.at("horizon").get<std::uint64_t>());
  });
}

inline json to_json(const Schedule& s) {
  json assignment = json::object();
  for (std::size_t k = 0; k < s.slots().size(); ++k) {
    assignment[std::to_string(s.slots()[k])] = s.assignment()[k] + 1;
  }
  return {{"block_length", s.block_length()},
          {"slots", s.slots()},
          {"assignment", assignment},
          {"first_block_start", s.first_block_start()}};
}

inline Schedule schedule_from_json(const json& j, const FairnessConfig& cfg) {
  return detail::parse_or(ErrorCode::ParseError, "schedule", [&] {
    if (j.at("block_length").get<std::uint64_t>() != cfg.block_length()) {
      throw Error(ErrorCode::InvalidSlots, "block length disagrees with the rate");
    }
    std::vector<std::uint64_t> slots;
    std::vector<ArmIndex> arms;
    for (auto [slot, arm] : j.at("assignment").items()) {
      slots.push_back(std::stoull(slot));
      arms.push_back(detail::arm_from_json(arm, cfg.num_arms(), ErrorCode::NotBijective));
    }
    return build_schedule(cfg, slots, arms);
  });
}

inline json to_json(const Decision& d) {
  json j{{"arm", d.arm + 1}, {"provenance", std::string(to_string(d.provenance))}};
  j["ucb_argmax_arm"] = d.ucb_argmax_arm ? json(*d.ucb_argmax_arm + 1) : json(nullptr);
  return j;
}

inline Decision decision_from_json(const json& j, std::size_t num_arms) {
  return detail::parse_or(ErrorCode::ParseError, "decision", [&] {
    Decision d;
    d.arm = detail::arm_from_json(j.at("arm"), num_arms, ErrorCode::ArmOutOfRange);
    d.provenance = parse_provenance(j.at("provenance").get<std::string>());
    if (j.contains("ucb_argmax_arm") && !j.at("ucb_argmax_arm").is_null()) {
      d.ucb_argmax_arm = detail::arm_from_json(j.at("ucb_argmax_arm"), num_arms, ErrorCode::ArmOutOfRange);
    }
    return d;
  });
}

inline json to_json(const BanditState& s) {
  json arms = json::array();
  for (ArmIndex i = 0; i < s.num_arms(); ++i) {
    arms.push_back({{"arm", i + 1},
                    {"pull_count", s.pull_count(i)},
                    {"reward_sum", s.reward_sum(i)},
                    {"nonprescheduled_pull_count", s.nonprescheduled_pull_count(i)}});
  }
  return {{"clock", s.clock()}, {"arms", arms}};
}

inline BanditState bandit_state_from_json(const json& j) {
  return detail::parse_or(ErrorCode::CorruptSnapshot, "bandit state", [&] {
    std::vector<std::uint64_t> pulls, free_pulls;
    std::vector<double> sums;
    const auto& arms = j.at("arms");
    for (std::size_t i = 0; i < arms.size(); ++i) {
      if (arms[i].at("arm").get<std::size_t>() != i + 1) {
        throw Error(ErrorCode::CorruptSnapshot, "arms must be listed in order");
      }
      pulls.push_back(arms[i].at("pull_count").get<std::uint64_t>());
      sums.push_back(arms[i].at("reward_sum").get<double>());
      free_pulls.push_back(arms[i].at("nonprescheduled_pull_count").get<std::uint64_t>());
    }
    return BanditState::from_parts(j.at("clock").get<std::uint64_t>(), std::move(pulls), std::move(sums),
                                   std::move(free_pulls));
  });
}

inline json to_json(const CounterRng& rng) { return {{"key", rng.key()}, {"counter", rng.counter()}}; }

inline CounterRng counter_rng_from_json(const json& j) {
  return detail::parse_or(ErrorCode::CorruptSnapshot, "rng", [&] {
    return CounterRng(j.at("key").get<std::uint64_t>(), j.at("counter").get<std::uint64_t>());
  });
}

}  // namespace fairbandit
