#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "fairbandit/config.hpp"
#include "fairbandit/error.hpp"

namespace fairbandit {

/// The preschedule of the strict policy. Time after the K init steps is cut
/// into blocks of length 1/v starting at K + 1; inside every block the slot
/// offsets in `slots` (one-based, within [1, 1/v]) are reserved for the arm
/// the assignment maps them to. An empty schedule (block length 0) stands for
/// v = 0: no blocks, no reserved slots.
class Schedule {
 public:
  Schedule() = default;

  std::uint64_t block_length() const noexcept { return block_length_; }
  std::uint64_t first_block_start() const noexcept { return first_block_start_; }
  /// Sorted ascending.
  const std::vector<std::uint64_t>& slots() const noexcept { return slots_; }
  /// assignment()[k] is the arm reserved at slots()[k].
  const std::vector<ArmIndex>& assignment() const noexcept { return assignment_; }
  bool empty() const noexcept { return block_length_ == 0; }

  /// Start time of block j (j >= 1).
  std::uint64_t block_start(std::uint64_t j) const noexcept {
    return first_block_start_ + (j - 1) * block_length_;
  }

  /// Arm reserved at global step t, if t falls on a slot of some block.
  std::optional<ArmIndex> prescheduled_arm(std::uint64_t t) const noexcept {
    if (empty() || t < first_block_start_) return std::nullopt;
    const std::uint64_t offset = (t - first_block_start_) % block_length_ + 1;
    const auto it = std::lower_bound(slots_.begin(), slots_.end(), offset);
    if (it == slots_.end() || *it != offset) return std::nullopt;
    return assignment_[static_cast<std::size_t>(it - slots_.begin())];
  }

  friend bool operator==(const Schedule&, const Schedule&) = default;

  friend Schedule build_schedule(const FairnessConfig&,
                                 const std::optional<std::vector<std::uint64_t>>&,
                                 const std::optional<std::vector<ArmIndex>>&);

 private:
  std::uint64_t block_length_ = 0;
  std::uint64_t first_block_start_ = 1;
  std::vector<std::uint64_t> slots_;
  std::vector<ArmIndex> assignment_;
};

/// Evenly spaced default slots {1 + m * floor(1/(vK))}, m = 0..K-1.
inline std::vector<std::uint64_t> default_slots(const FairnessConfig& cfg) {
  std::vector<std::uint64_t> slots;
  if (cfg.unconstrained()) return slots;
  const std::uint64_t spacing = cfg.block_length() / cfg.num_arms();
  for (std::uint64_t m = 0; m < cfg.num_arms(); ++m) slots.push_back(1 + m * spacing);
  return slots;
}

/// Builds (S, g). `slots` are one-based offsets; `assignment[k]` is the
/// (zero-based) arm for `slots[k]` in the order given. Omitted parts fall back
/// to the evenly spaced slots and the ascending assignment 0..K-1.
inline Schedule build_schedule(const FairnessConfig& cfg,
                               const std::optional<std::vector<std::uint64_t>>& slots = std::nullopt,
                               const std::optional<std::vector<ArmIndex>>& assignment = std::nullopt) {
  Schedule schedule;
  schedule.first_block_start_ = cfg.num_arms() + 1;
  if (cfg.unconstrained()) {
    if ((slots && !slots->empty()) || (assignment && !assignment->empty())) {
      throw Error(ErrorCode::InvalidSlots, "v = 0 admits no prescheduled slots");
    }
    return schedule;
  }
  const std::size_t k = cfg.num_arms();
  const std::uint64_t d = cfg.block_length();

  std::vector<std::uint64_t> s = slots ? *slots : default_slots(cfg);
  if (s.size() != k) {
    throw Error(ErrorCode::InvalidSlots,
                "expected " + std::to_string(k) + " slots, got " + std::to_string(s.size()));
  }
  for (auto o : s) {
    if (o < 1 || o > d) {
      throw Error(ErrorCode::InvalidSlots,
                  "slot " + std::to_string(o) + " outside [1, " + std::to_string(d) + "]");
    }
  }
  {
    auto sorted = s;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw Error(ErrorCode::InvalidSlots, "slots must be distinct");
    }
  }

  std::vector<ArmIndex> g;
  if (assignment) {
    g = *assignment;
  } else {
    for (std::size_t i = 0; i < k; ++i) g.push_back(i);
  }
  if (g.size() != k) throw Error(ErrorCode::NotBijective, "assignment must cover every slot once");
  {
    std::vector<bool> seen(k, false);
    for (auto arm : g) {
      if (arm >= k || seen[arm]) {
        throw Error(ErrorCode::NotBijective, "assignment is not a permutation of the arms");
      }
      seen[arm] = true;
    }
  }

  std::vector<std::size_t> order(k);
  for (std::size_t i = 0; i < k; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return s[a] < s[b]; });
  schedule.block_length_ = d;
  for (auto idx : order) {
    schedule.slots_.push_back(s[idx]);
    schedule.assignment_.push_back(g[idx]);
  }
  return schedule;
}

/// (1/v)! / (1/v - K)!, the number of distinct (S, g) pairs.
inline std::uint64_t count_schedules(const FairnessConfig& cfg) {
  if (cfg.unconstrained()) throw Error(ErrorCode::InvalidRate, "no schedules exist for v = 0");
  std::uint64_t count = 1;
  const std::uint64_t d = cfg.block_length();
  for (std::uint64_t i = 0; i < cfg.num_arms(); ++i) {
    const std::uint64_t factor = d - i;
    if (count > std::numeric_limits<std::uint64_t>::max() / factor) {
      throw Error(ErrorCode::Overflow, "schedule count exceeds 64 bits");
    }
    count *= factor;
  }
  return count;
}

/// All schedules in lexicographic order of (offset for arm 0, offset for arm 1, ...).
/// Stops after `limit` entries.
inline std::vector<Schedule> enumerate_schedules(const FairnessConfig& cfg, std::size_t limit) {
  std::vector<Schedule> out;
  if (cfg.unconstrained()) return out;
  const std::size_t k = cfg.num_arms();
  const std::uint64_t d = cfg.block_length();
  std::vector<std::uint64_t> offsets(k, 0);  // offsets[arm]
  std::vector<bool> used(d + 1, false);

  auto recurse = [&](auto&& self, std::size_t arm) -> void {
    if (out.size() >= limit) return;
    if (arm == k) {
      std::vector<ArmIndex> arms(k);
      for (std::size_t i = 0; i < k; ++i) arms[i] = i;
      out.push_back(build_schedule(cfg, offsets, arms));
      return;
    }
    for (std::uint64_t o = 1; o <= d; ++o) {
      if (used[o]) continue;
      used[o] = true;
      offsets[arm] = o;
      self(self, arm + 1);
      used[o] = false;
    }
  };
  recurse(recurse, 0);
  return out;
}

/// Guaranteed per-arm pull count after t completed steps of the strict policy:
/// max(0, floor((t - K) v) + 1) for t >= K, else 0.
inline std::uint64_t min_pull_lower_bound(std::uint64_t t, const FairnessConfig& cfg) {
  if (t < cfg.num_arms()) return 0;
  if (cfg.unconstrained()) return 1;
  return (t - cfg.num_arms()) / cfg.block_length() + 1;
}

}  // namespace fairbandit
