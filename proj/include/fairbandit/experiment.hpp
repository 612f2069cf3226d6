#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "fairbandit/config.hpp"
#include "fairbandit/environment.hpp"
#include "fairbandit/error.hpp"
#include "fairbandit/policy.hpp"
#include "fairbandit/rng.hpp"
#include "fairbandit/schedule.hpp"
#include "fairbandit/state.hpp"

namespace fairbandit {

struct ExperimentConfig {
  PolicyKind policy = PolicyKind::Strict;
  FairnessConfig fairness;
  EnvSpec env;
  std::uint64_t runs = 1;
  std::uint64_t master_seed = 0;
  std::optional<std::vector<std::uint64_t>> slots;   // one-based offsets
  std::optional<std::vector<ArmIndex>> assignment;   // zero-based arms, parallel to slots

  void validate() const {
    if (env.num_arms() != fairness.num_arms()) {
      throw Error(ErrorCode::ArmCountMismatch, "environment has " + std::to_string(env.num_arms()) +
                                                   " arms, config has " + std::to_string(fairness.num_arms()));
    }
    if (runs == 0) throw Error(ErrorCode::EmptyInput, "runs must be positive");
  }

  Schedule schedule() const {
    if (policy != PolicyKind::Strict) return Schedule{};
    return build_schedule(fairness, slots, assignment);
  }
};

enum class SlotClass { Init, Prescheduled, Free };

constexpr std::string_view to_string(SlotClass c) {
  switch (c) {
    case SlotClass::Init: return "init";
    case SlotClass::Prescheduled: return "prescheduled";
    case SlotClass::Free: return "free";
  }
  return "?";
}

constexpr SlotClass slot_class_of(Provenance p) {
  switch (p) {
    case Provenance::Init: return SlotClass::Init;
    case Provenance::Prescheduled: return SlotClass::Prescheduled;
    default: return SlotClass::Free;
  }
}

struct TraceStep {
  Decision decision;
  double reward = 0.0;
  SlotClass slot = SlotClass::Init;
};

struct RunTrace {
  PolicyKind policy = PolicyKind::Strict;
  FairnessConfig fairness;
  std::vector<TraceStep> steps;  // steps[t-1] is step t
  std::vector<std::uint64_t> final_pull_count;
  std::vector<std::uint64_t> final_nonprescheduled_pull_count;

  std::vector<ArmIndex> arms() const {
    std::vector<ArmIndex> out;
    out.reserve(steps.size());
    for (const auto& s : steps) out.push_back(s.decision.arm);
    return out;
  }
};

/// Drives `select` against an environment stream for the full horizon.
/// `select(state)` returns the next decision.
template <typename SelectFn>
RunTrace run_with(SelectFn&& select, PolicyKind kind, const FairnessConfig& cfg, const EnvSpec& env,
                  CounterRng env_rng) {
  RunTrace trace;
  trace.policy = kind;
  trace.fairness = cfg;
  trace.steps.reserve(cfg.horizon());
  BanditState state(cfg.num_arms());
  for (std::uint64_t t = 1; t <= cfg.horizon(); ++t) {
    const Decision d = select(state);
    const double r = sample_reward(env, d.arm, env_rng);
    state.update(d, r);
    trace.steps.push_back({d, r, slot_class_of(d.provenance)});
  }
  trace.final_pull_count = state.pull_counts();
  trace.final_nonprescheduled_pull_count = state.nonprescheduled_pull_counts();
  return trace;
}

/// One full horizon with streams derived from (master_seed, episode_index).
inline RunTrace run_episode(const ExperimentConfig& cfg, std::uint64_t episode_index) {
  cfg.validate();
  Policy policy(cfg.policy, cfg.fairness, cfg.schedule(),
                derive_stream(cfg.master_seed, episode_index, StreamPurpose::Policy));
  return run_with([&](const BanditState& s) { return policy.select(s); }, cfg.policy, cfg.fairness, cfg.env,
                  derive_stream(cfg.master_seed, episode_index, StreamPurpose::Environment));
}

/// Cumulative regret, index t-1 holds the value after step t.
struct RegretCurves {
  std::vector<double> pseudo;
  std::vector<double> realized;
};

inline double best_mean(const EnvSpec& env) {
  const auto mu = env.means();
  return *std::max_element(mu.begin(), mu.end());
}

/// Sum over free slots of (mu* - mu(i_t)); realized uses the observed reward.
inline RegretCurves strict_regret_curves(const RunTrace& trace, const EnvSpec& env) {
  if (trace.policy == PolicyKind::Stochastic) {
    throw Error(ErrorCode::WrongPolicy, "strict regret is undefined for a stochastic-policy trace");
  }
  if (env.num_arms() != trace.fairness.num_arms()) throw Error(ErrorCode::ArmCountMismatch, "env/trace K differ");
  const auto gaps = gap_vector(env);
  const double mu_star = best_mean(env);
  RegretCurves c;
  double pseudo = 0.0, realized = 0.0;
  for (const auto& step : trace.steps) {
    if (step.slot == SlotClass::Free) {
      pseudo += gaps[step.decision.arm];
      realized += mu_star - step.reward;
    }
    c.pseudo.push_back(pseudo);
    c.realized.push_back(realized);
  }
  return c;
}

inline double strict_regret(const RunTrace& trace, const EnvSpec& env) {
  const auto c = strict_regret_curves(trace, env);
  return c.pseudo.empty() ? 0.0 : c.pseudo.back();
}

/// Sum over t > K of <p*, mu> - <p_t, mu> = (1 - Kv)(mu* - mu(argmax_t)),
/// with p_t rebuilt from the recorded argmax. Realized compares <p*, mu>
/// against the observed reward.
inline RegretCurves stochastic_regret_curves(const RunTrace& trace, const EnvSpec& env, const FairnessConfig& cfg) {
  if (trace.policy != PolicyKind::Stochastic) {
    throw Error(ErrorCode::WrongPolicy, "stochastic regret needs a stochastic-policy trace");
  }
  if (env.num_arms() != cfg.num_arms()) throw Error(ErrorCode::ArmCountMismatch, "env/config K differ");
  const auto mu = env.means();
  const auto gaps = gap_vector(env);
  const ArmIndex best = static_cast<ArmIndex>(std::max_element(mu.begin(), mu.end()) - mu.begin());
  const auto p_star = mixture_around(best, cfg).probabilities;
  double benchmark = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) benchmark += p_star[i] * mu[i];

  const double exploit = cfg.exploit_probability();
  RegretCurves c;
  double pseudo = 0.0, realized = 0.0;
  for (const auto& step : trace.steps) {
    if (step.slot != SlotClass::Init) {
      pseudo += exploit * gaps[*step.decision.ucb_argmax_arm];
      realized += benchmark - step.reward;
    }
    c.pseudo.push_back(pseudo);
    c.realized.push_back(realized);
  }
  return c;
}

inline double stochastic_regret(const RunTrace& trace, const EnvSpec& env, const FairnessConfig& cfg) {
  const auto c = stochastic_regret_curves(trace, env, cfg);
  return c.pseudo.empty() ? 0.0 : c.pseudo.back();
}

struct RegretReport {
  std::optional<double> strict_pseudo_regret;
  std::optional<double> stochastic_pseudo_regret;
  std::optional<double> strict_realized_regret;
  std::optional<double> stochastic_realized_regret;
  RegretCurves curves;  // whichever definition applies to the trace's policy
};

inline RegretReport regret_report(const RunTrace& trace, const EnvSpec& env) {
  RegretReport report;
  if (trace.policy == PolicyKind::Stochastic) {
    report.curves = stochastic_regret_curves(trace, env, trace.fairness);
    if (!report.curves.pseudo.empty()) {
      report.stochastic_pseudo_regret = report.curves.pseudo.back();
      report.stochastic_realized_regret = report.curves.realized.back();
    }
  } else {
    report.curves = strict_regret_curves(trace, env);
    if (!report.curves.pseudo.empty()) {
      report.strict_pseudo_regret = report.curves.pseudo.back();
      report.strict_realized_regret = report.curves.realized.back();
    }
  }
  return report;
}

/// One exported row; t is one-based.
struct CurveRow {
  std::uint64_t t = 0;
  double mean_regret = 0.0;
  double stderr_regret = 0.0;
  std::vector<double> pull_fraction;

  friend bool operator==(const CurveRow&, const CurveRow&) = default;
};

struct AggregateStats {
  std::size_t num_arms = 0;
  std::uint64_t runs = 0;
  std::vector<CurveRow> rows;
  /// min_pulls[t-1][i]: smallest n_t(i) over all runs.
  std::vector<std::vector<std::uint64_t>> min_pulls;
};

/// Folds traces in the order given. Welford accumulation keeps the result a
/// pure function of that order.
class Aggregator {
 public:
  explicit Aggregator(const EnvSpec& env) : env_(env) {}

  void add(const RunTrace& trace) {
    const auto report = regret_report(trace, env_);
    const std::size_t horizon = trace.steps.size();
    const std::size_t k = trace.fairness.num_arms();
    if (runs_ == 0) {
      horizon_ = horizon;
      num_arms_ = k;
      mean_.assign(horizon, 0.0);
      m2_.assign(horizon, 0.0);
      fraction_sum_.assign(horizon, std::vector<double>(k, 0.0));
      min_pulls_.assign(horizon, std::vector<std::uint64_t>(k, std::numeric_limits<std::uint64_t>::max()));
    } else if (horizon != horizon_ || k != num_arms_) {
      throw Error(ErrorCode::ArmCountMismatch, "traces are not homogeneous");
    }
    ++runs_;
    std::vector<std::uint64_t> pulls(k, 0);
    for (std::size_t idx = 0; idx < horizon; ++idx) {
      const double x = report.curves.pseudo[idx];
      const double delta = x - mean_[idx];
      mean_[idx] += delta / static_cast<double>(runs_);
      m2_[idx] += delta * (x - mean_[idx]);

      ++pulls[trace.steps[idx].decision.arm];
      const double t = static_cast<double>(idx + 1);
      for (std::size_t i = 0; i < k; ++i) {
        fraction_sum_[idx][i] += static_cast<double>(pulls[i]) / t;
        min_pulls_[idx][i] = std::min(min_pulls_[idx][i], pulls[i]);
      }
    }
  }

  AggregateStats finish() const {
    if (runs_ == 0) throw Error(ErrorCode::EmptyInput, "no traces to aggregate");
    AggregateStats stats;
    stats.num_arms = num_arms_;
    stats.runs = runs_;
    stats.min_pulls = min_pulls_;
    const double n = static_cast<double>(runs_);
    for (std::size_t idx = 0; idx < horizon_; ++idx) {
      CurveRow row;
      row.t = idx + 1;
      row.mean_regret = mean_[idx];
      row.stderr_regret = runs_ > 1 ? std::sqrt(m2_[idx] / (n - 1.0)) / std::sqrt(n) : 0.0;
      for (double s : fraction_sum_[idx]) row.pull_fraction.push_back(s / n);
      stats.rows.push_back(std::move(row));
    }
    return stats;
  }

  std::uint64_t runs() const noexcept { return runs_; }

 private:
  EnvSpec env_;
  std::uint64_t runs_ = 0;
  std::size_t horizon_ = 0;
  std::size_t num_arms_ = 0;
  std::vector<double> mean_, m2_;
  std::vector<std::vector<double>> fraction_sum_;
  std::vector<std::vector<std::uint64_t>> min_pulls_;
};

inline AggregateStats aggregate(std::span<const RunTrace> traces, const EnvSpec& env) {
  if (traces.empty()) throw Error(ErrorCode::EmptyInput, "no traces to aggregate");
  Aggregator agg(env);
  for (const auto& trace : traces) agg.add(trace);
  return agg.finish();
}

/// Runs all episodes, `threads` at a time, and visits every trace in episode
/// order. Episodes are simulated in fixed-size batches so memory stays
/// bounded; the visit order (and thus any fold) does not depend on `threads`.
template <typename Visitor>
void for_each_episode(const ExperimentConfig& cfg, Visitor&& visit, unsigned threads = 0) {
  cfg.validate();
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  constexpr std::uint64_t kBatch = 32;
  std::vector<RunTrace> batch;
  for (std::uint64_t first = 0; first < cfg.runs; first += kBatch) {
    const std::uint64_t count = std::min(kBatch, cfg.runs - first);
    batch.assign(count, RunTrace{});
    const unsigned used = static_cast<unsigned>(std::min<std::uint64_t>(threads, count));
    std::vector<std::exception_ptr> failures(used);
    {
      std::vector<std::jthread> workers;
      for (unsigned w = 0; w < used; ++w) {
        workers.emplace_back([&, w] {
          try {
            for (std::uint64_t i = w; i < count; i += used) batch[i] = run_episode(cfg, first + i);
          } catch (...) {
            failures[w] = std::current_exception();
          }
        });
      }
    }
    for (const auto& failure : failures) {
      if (failure) std::rethrow_exception(failure);
    }
    for (const auto& trace : batch) visit(trace);
  }
}

inline AggregateStats run_experiment(const ExperimentConfig& cfg, unsigned threads = 0) {
  Aggregator agg(cfg.env);
  for_each_episode(cfg, [&](const RunTrace& trace) { agg.add(trace); }, threads);
  return agg.finish();
}

}  // namespace fairbandit
