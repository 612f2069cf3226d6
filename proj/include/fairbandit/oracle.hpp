#pragma once

// Independent re-implementations used to cross-check the incremental
// policies. Nothing here touches BanditState, Schedule lookup, or the policy
// functions: each decision is recomputed from the raw history.

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "fairbandit/environment.hpp"
#include "fairbandit/error.hpp"
#include "fairbandit/experiment.hpp"
#include "fairbandit/rng.hpp"

namespace fairbandit {

namespace detail {

/// UCB argmax recomputed from the full (arm, reward) history.
inline ArmIndex naive_ucb_choice(const std::vector<std::pair<ArmIndex, double>>& history, std::size_t num_arms,
                                 std::uint64_t horizon) {
  ArmIndex best = 0;
  double best_value = -1.0;
  for (ArmIndex arm = 0; arm < num_arms; ++arm) {
    double total = 0.0;
    std::uint64_t count = 0;
    for (const auto& [a, r] : history) {
      if (a == arm) {
        total += r;
        ++count;
      }
    }
    const double value = total / static_cast<double>(count) +
                         2.0 * std::sqrt(std::log(static_cast<double>(horizon)) / static_cast<double>(count));
    if (arm == 0 || value > best_value) {
      best_value = value;
      best = arm;
    }
  }
  return best;
}

}  // namespace detail

/// Strict-policy decisions for a fixed-reward instance with T <= 12, computed
/// by laying out every block's reserved times up front and re-evaluating the
/// UCB definition from scratch at each free step.
inline std::vector<ArmIndex> brute_force_oracle(const ExperimentConfig& cfg) {
  constexpr std::uint64_t kMaxHorizon = 12;
  const auto& fc = cfg.fairness;
  if (fc.horizon() > kMaxHorizon) throw Error(ErrorCode::HorizonTooLarge, "oracle supports T <= 12");
  if (cfg.policy == PolicyKind::Stochastic) throw Error(ErrorCode::WrongPolicy, "oracle replays the strict policy");
  if (cfg.env.num_arms() != fc.num_arms()) throw Error(ErrorCode::ArmCountMismatch, "env/config K differ");

  std::vector<double> value;
  for (const auto& arm : cfg.env.arms) {
    const auto* fixed = std::get_if<Fixed>(&arm.kind());
    if (!fixed) throw Error(ErrorCode::InvalidDistribution, "oracle needs fixed-value arms");
    value.push_back(fixed->value);
  }

  const std::size_t k = fc.num_arms();
  std::map<std::uint64_t, ArmIndex> reserved;
  if (cfg.policy == PolicyKind::Strict && !fc.unconstrained()) {
    const std::uint64_t d = fc.block_length();
    std::vector<std::uint64_t> slots;
    std::vector<ArmIndex> arms;
    if (cfg.slots) {
      slots = *cfg.slots;
    } else {
      for (std::uint64_t m = 0; m < k; ++m) slots.push_back(1 + m * (d / k));
    }
    if (cfg.assignment) {
      arms = *cfg.assignment;
    } else {
      for (ArmIndex i = 0; i < k; ++i) arms.push_back(i);
    }
    for (std::uint64_t tau = k + 1; tau <= fc.horizon(); tau += d) {
      for (std::size_t s = 0; s < slots.size(); ++s) reserved[tau + slots[s] - 1] = arms[s];
    }
  }

  std::vector<std::pair<ArmIndex, double>> history;
  std::vector<ArmIndex> sequence;
  for (std::uint64_t t = 1; t <= fc.horizon(); ++t) {
    ArmIndex arm;
    if (t <= k) {
      arm = t - 1;
    } else if (auto it = reserved.find(t); it != reserved.end()) {
      arm = it->second;
    } else {
      arm = detail::naive_ucb_choice(history, k, fc.horizon());
    }
    history.emplace_back(arm, value[arm]);
    sequence.push_back(arm);
  }
  return sequence;
}

/// Textbook unconstrained UCB over an environment stream, with its own
/// counters. Draws rewards exactly as run_episode does.
inline std::vector<ArmIndex> reference_ucb(const EnvSpec& env, std::uint64_t horizon, CounterRng env_rng) {
  const std::size_t k = env.num_arms();
  std::vector<double> sum(k, 0.0);
  std::vector<double> count(k, 0.0);
  const double log_horizon = std::log(static_cast<double>(horizon));
  std::vector<ArmIndex> sequence;
  for (std::uint64_t t = 1; t <= horizon; ++t) {
    ArmIndex arm = 0;
    if (t <= k) {
      arm = t - 1;
    } else {
      double best = -1.0;
      for (ArmIndex i = 0; i < k; ++i) {
        const double index = sum[i] / count[i] + 2.0 * std::sqrt(log_horizon / count[i]);
        if (index > best) {
          best = index;
          arm = i;
        }
      }
    }
    sum[arm] += env.arms[arm].sample(env_rng);
    count[arm] += 1.0;
    sequence.push_back(arm);
  }
  return sequence;
}

/// Fisher-Yates on our own generator, so instances match across standard libraries.
template <typename T>
void shuffle_with(std::vector<T>& items, CounterRng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) std::swap(items[i - 1], items[rng.uniform_below(i)]);
}

/// A random tiny strict-policy instance with fixed rewards: K in [2,4],
/// v = 0 or 1/d with d in [K,6], T in [K,12], random slots and assignment.
/// Half the instances draw rewards from a coarse grid so UCB ties occur.
inline ExperimentConfig random_oracle_instance(CounterRng& rng) {
  ExperimentConfig cfg;
  const std::size_t k = 2 + rng.uniform_below(3);
  const bool unconstrained = rng.uniform_below(5) == 0;
  const std::uint64_t d = unconstrained ? 0 : k + rng.uniform_below(6 - k + 1);
  const std::uint64_t horizon = k + rng.uniform_below(12 - k + 1);
  cfg.fairness = validate_config(k, unconstrained ? Rate{0, 1} : Rate{1, d}, horizon);
  cfg.policy = PolicyKind::Strict;
  const bool coarse = rng.uniform_below(2) == 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double value = coarse ? static_cast<double>(rng.uniform_below(5)) / 4.0 : rng.uniform01();
    cfg.env.arms.push_back(Fixed{value});
  }
  if (!unconstrained && rng.uniform_below(2) == 0) {
    std::vector<std::uint64_t> offsets(d);
    for (std::uint64_t o = 0; o < d; ++o) offsets[o] = o + 1;
    shuffle_with(offsets, rng);
    offsets.resize(k);
    std::vector<ArmIndex> arms(k);
    for (std::size_t i = 0; i < k; ++i) arms[i] = i;
    shuffle_with(arms, rng);
    cfg.slots = offsets;
    cfg.assignment = arms;
  }
  cfg.master_seed = rng();
  return cfg;
}

struct OracleReport {
  std::uint64_t instances = 0;
  std::uint64_t mismatches = 0;
  std::optional<std::string> first_mismatch;

  bool passed() const noexcept { return mismatches == 0; }
};

/// Compares run_episode against brute_force_oracle on `count` random instances.
inline OracleReport oracle_sweep(std::uint64_t seed, std::uint64_t count) {
  OracleReport report;
  CounterRng rng = derive_stream(seed, 1, StreamPurpose::Fuzz);
  for (std::uint64_t n = 0; n < count; ++n) {
    const auto cfg = random_oracle_instance(rng);
    ++report.instances;
    const auto simulated = run_episode(cfg, 0).arms();
    const auto expected = brute_force_oracle(cfg);
    if (simulated == expected) continue;
    ++report.mismatches;
    if (!report.first_mismatch) {
      std::ostringstream out;
      out << "instance " << n << ": K=" << cfg.fairness.num_arms() << " v=" << cfg.fairness.rate_string()
          << " T=" << cfg.fairness.horizon() << " env=" << cfg.env.to_json().dump() << " simulated=[";
      for (auto a : simulated) out << a + 1 << ' ';
      out << "] oracle=[";
      for (auto a : expected) out << a + 1 << ' ';
      out << ']';
      report.first_mismatch = out.str();
    }
  }
  return report;
}

}  // namespace fairbandit
