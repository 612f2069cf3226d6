#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fairbandit/config.hpp"
#include "fairbandit/error.hpp"

namespace fairbandit {

enum class Provenance { Init, Prescheduled, UcbArgmax, UniformDraw };

constexpr std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::Init: return "init";
    case Provenance::Prescheduled: return "prescheduled";
    case Provenance::UcbArgmax: return "ucb-argmax";
    case Provenance::UniformDraw: return "uniform-draw";
  }
  return "?";
}

inline Provenance parse_provenance(std::string_view text) {
  if (text == "init") return Provenance::Init;
  if (text == "prescheduled") return Provenance::Prescheduled;
  if (text == "ucb-argmax") return Provenance::UcbArgmax;
  if (text == "uniform-draw") return Provenance::UniformDraw;
  throw Error(ErrorCode::ParseError, "unknown provenance '" + std::string(text) + "'");
}

struct Decision {
  ArmIndex arm = 0;
  Provenance provenance = Provenance::Init;
  /// Arm maximizing the UCB index at this step; empty during init.
  std::optional<ArmIndex> ucb_argmax_arm;

  friend bool operator==(const Decision&, const Decision&) = default;
};

/// Sufficient statistics shared by every policy.
class BanditState {
 public:
  BanditState() = default;
  explicit BanditState(std::size_t num_arms)
      : pull_count_(num_arms, 0), reward_sum_(num_arms, 0.0), nonprescheduled_pull_count_(num_arms, 0) {
    if (num_arms == 0) throw Error(ErrorCode::ZeroArms, "at least one arm is required");
  }

  std::size_t num_arms() const noexcept { return pull_count_.size(); }
  std::uint64_t clock() const noexcept { return clock_; }
  std::uint64_t pull_count(ArmIndex arm) const { return pull_count_.at(arm); }
  double reward_sum(ArmIndex arm) const { return reward_sum_.at(arm); }
  /// m(i): pulls made in free (ucb-argmax) slots.
  std::uint64_t nonprescheduled_pull_count(ArmIndex arm) const { return nonprescheduled_pull_count_.at(arm); }

  const std::vector<std::uint64_t>& pull_counts() const noexcept { return pull_count_; }
  const std::vector<double>& reward_sums() const noexcept { return reward_sum_; }
  const std::vector<std::uint64_t>& nonprescheduled_pull_counts() const noexcept {
    return nonprescheduled_pull_count_;
  }

  double empirical_mean(ArmIndex arm) const {
    check_arm(arm);
    if (pull_count_[arm] == 0) {
      throw Error(ErrorCode::ArmNeverPulled, "arm " + std::to_string(arm + 1) + " has no pulls");
    }
    return reward_sum_[arm] / static_cast<double>(pull_count_[arm]);
  }

  void update(const Decision& decision, double reward) {
    check_arm(decision.arm);
    if (!(reward >= 0.0 && reward <= 1.0)) {
      throw Error(ErrorCode::RewardOutOfRange, "reward " + std::to_string(reward) + " not in [0,1]");
    }
    ++clock_;
    ++pull_count_[decision.arm];
    reward_sum_[decision.arm] += reward;
    if (decision.provenance == Provenance::UcbArgmax) ++nonprescheduled_pull_count_[decision.arm];
  }

  /// Rebuilds a state from serialized fields, checking every invariant.
  static BanditState from_parts(std::uint64_t clock, std::vector<std::uint64_t> pulls, std::vector<double> sums,
                                std::vector<std::uint64_t> free_pulls) {
    if (pulls.empty() || pulls.size() != sums.size() || pulls.size() != free_pulls.size()) {
      throw Error(ErrorCode::CorruptSnapshot, "per-arm arrays disagree in length");
    }
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < pulls.size(); ++i) {
      total += pulls[i];
      if (free_pulls[i] > pulls[i] || !(sums[i] >= 0.0 && sums[i] <= static_cast<double>(pulls[i]))) {
        throw Error(ErrorCode::CorruptSnapshot, "arm statistics violate invariants");
      }
    }
    if (total != clock) throw Error(ErrorCode::CorruptSnapshot, "pull counts do not sum to clock");
    BanditState state;
    state.clock_ = clock;
    state.pull_count_ = std::move(pulls);
    state.reward_sum_ = std::move(sums);
    state.nonprescheduled_pull_count_ = std::move(free_pulls);
    return state;
  }

  friend bool operator==(const BanditState&, const BanditState&) = default;

 private:
  void check_arm(ArmIndex arm) const {
    if (arm >= num_arms()) {
      throw Error(ErrorCode::ArmOutOfRange, "arm " + std::to_string(arm + 1) + " outside [1, " +
                                                std::to_string(num_arms()) + "]");
    }
  }

  std::uint64_t clock_ = 0;
  std::vector<std::uint64_t> pull_count_;
  std::vector<double> reward_sum_;
  std::vector<std::uint64_t> nonprescheduled_pull_count_;
};

/// Free-function form of BanditState::update.
inline BanditState& update(BanditState& state, const Decision& decision, double reward) {
  state.update(decision, reward);
  return state;
}

/// Empirical mean plus the exploration bonus 2 * sqrt(log_horizon / n).
inline double ucb_index_with_log(const BanditState& state, ArmIndex arm, double log_horizon) {
  const double mean = state.empirical_mean(arm);
  const double n = static_cast<double>(state.pull_count(arm));
  return mean + 2.0 * std::sqrt(log_horizon / n);
}

inline double ucb_index(const BanditState& state, ArmIndex arm, std::uint64_t horizon) {
  return ucb_index_with_log(state, arm, std::log(static_cast<double>(horizon)));
}

/// Arm with the largest UCB index; ties go to the lowest index.
inline ArmIndex ucb_argmax(const BanditState& state, std::uint64_t horizon) {
  ArmIndex best = 0;
  double best_value = ucb_index(state, 0, horizon);
  for (ArmIndex arm = 1; arm < state.num_arms(); ++arm) {
    const double value = ucb_index(state, arm, horizon);
    if (value > best_value) {
      best_value = value;
      best = arm;
    }
  }
  return best;
}

}  // namespace fairbandit
