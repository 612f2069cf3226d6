#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <sstream>
#include <string>

#include "fairbandit/config.hpp"
#include "fairbandit/environment.hpp"
#include "fairbandit/experiment.hpp"
#include "fairbandit/policy.hpp"
#include "fairbandit/rng.hpp"
#include "fairbandit/schedule.hpp"

namespace fairbandit {

/// A random valid instance: K in [2,5], 1/v in [K,12], T in [K,max_horizon],
/// Bernoulli means uniform on [0,1].
struct FuzzInstance {
  FairnessConfig fairness;
  EnvSpec env;
};

inline FuzzInstance random_fuzz_instance(CounterRng& rng, std::uint64_t max_horizon = 5000) {
  const std::size_t k = 2 + rng.uniform_below(4);
  const std::uint64_t d = k + rng.uniform_below(12 - k + 1);
  const std::uint64_t horizon = k + rng.uniform_below(max_horizon - k + 1);
  FuzzInstance inst{validate_config(k, Rate{1, d}, horizon), {}};
  for (std::size_t i = 0; i < k; ++i) inst.env.arms.push_back(Bernoulli{rng.uniform01()});
  inst.env.seed = rng();
  return inst;
}

struct FuzzReport {
  std::uint64_t trials = 0;
  std::uint64_t violations = 0;
  std::optional<std::string> first_counterexample;

  bool passed() const noexcept { return violations == 0; }
};

using StrictSelector = std::function<Decision(const BanditState&, const Schedule&, const FairnessConfig&)>;

/// Runs the strict policy (or `selector`, for mutation testing) on random
/// instances and checks n_t(i) >= min_pull_lower_bound(t) after every step.
inline FuzzReport fairness_fuzz(std::uint64_t trials, std::uint64_t seed, StrictSelector selector = select_strict) {
  FuzzReport report;
  CounterRng rng = derive_stream(seed, 0, StreamPurpose::Fuzz);
  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    ++report.trials;
    const auto inst = random_fuzz_instance(rng);
    const auto& cfg = inst.fairness;
    const Schedule schedule = build_schedule(cfg);
    CounterRng env_rng = derive_stream(inst.env.seed, trial, StreamPurpose::Environment);
    BanditState state(cfg.num_arms());
    bool violated = false;
    for (std::uint64_t t = 1; t <= cfg.horizon() && !violated; ++t) {
      const Decision d = selector(state, schedule, cfg);
      state.update(d, sample_reward(inst.env, d.arm, env_rng));
      const std::uint64_t floor = min_pull_lower_bound(t, cfg);
      for (ArmIndex i = 0; i < cfg.num_arms(); ++i) {
        if (state.pull_count(i) >= floor) continue;
        violated = true;
        if (!report.first_counterexample) {
          std::ostringstream out;
          out << "trial " << trial << ": K=" << cfg.num_arms() << " v=" << cfg.rate_string()
              << " T=" << cfg.horizon() << " env=" << inst.env.to_json().dump() << " t=" << t << " arm=" << i + 1
              << " n=" << state.pull_count(i) << " < floor=" << floor;
          report.first_counterexample = out.str();
        }
        break;
      }
    }
    if (violated) ++report.violations;
  }
  return report;
}

}  // namespace fairbandit
