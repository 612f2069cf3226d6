#pragma once

#include <charconv>
#include <cstdint>
#include <numeric>
#include <string>
#include <string_view>

#include "fairbandit/error.hpp"

namespace fairbandit {

using ArmIndex = std::size_t;  // zero-based internally, one-based at every I/O boundary

/// An exact non-negative rational, as given by the caller before validation.
struct Rate {
  std::uint64_t numerator = 0;
  std::uint64_t denominator = 1;

  friend bool operator==(const Rate&, const Rate&) = default;
};

/// Parses "0", "1/4", "2/8" or a bare integer. Decimals are rejected: the
/// block structure needs an exact reciprocal.
inline Rate parse_rate(std::string_view text) {
  auto parse_u64 = [&](std::string_view part) {
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
    if (part.empty() || ec != std::errc{} || ptr != part.data() + part.size()) {
      throw Error(ErrorCode::InvalidRate, "cannot parse rate '" + std::string(text) + "'");
    }
    return value;
  };
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return Rate{parse_u64(text), 1};
  Rate rate{parse_u64(text.substr(0, slash)), parse_u64(text.substr(slash + 1))};
  if (rate.denominator == 0) {
    throw Error(ErrorCode::InvalidRate, "zero denominator in '" + std::string(text) + "'");
  }
  return rate;
}

/// (K, v, T) after validation. The rate is stored as its block length 1/v;
/// a block length of zero is the unconstrained case v = 0.
class FairnessConfig {
 public:
  std::size_t num_arms() const noexcept { return num_arms_; }
  std::uint64_t block_length() const noexcept { return block_length_; }
  std::uint64_t horizon() const noexcept { return horizon_; }

  bool unconstrained() const noexcept { return block_length_ == 0; }
  double min_rate() const noexcept {
    return unconstrained() ? 0.0 : 1.0 / static_cast<double>(block_length_);
  }
  /// 1 - Kv, computed from integers so Kv = 1 gives exactly zero.
  double exploit_probability() const noexcept {
    if (unconstrained()) return 1.0;
    return static_cast<double>(block_length_ - num_arms_) / static_cast<double>(block_length_);
  }
  Rate rate() const noexcept {
    return unconstrained() ? Rate{0, 1} : Rate{1, block_length_};
  }
  std::string rate_string() const {
    return unconstrained() ? std::string("0") : "1/" + std::to_string(block_length_);
  }

  friend bool operator==(const FairnessConfig&, const FairnessConfig&) = default;

  friend FairnessConfig validate_config(std::size_t, Rate, std::uint64_t);

 private:
  std::size_t num_arms_ = 1;
  std::uint64_t block_length_ = 0;
  std::uint64_t horizon_ = 1;
};

/// Accepts iff K >= 1, T >= 1 and v is zero or 1/d with d >= K.
inline FairnessConfig validate_config(std::size_t num_arms, Rate rate, std::uint64_t horizon) {
  if (num_arms == 0) throw Error(ErrorCode::ZeroArms, "at least one arm is required");
  if (horizon == 0) throw Error(ErrorCode::ZeroHorizon, "horizon must be positive");
  if (rate.denominator == 0) throw Error(ErrorCode::InvalidRate, "zero denominator");

  FairnessConfig cfg;
  cfg.num_arms_ = num_arms;
  cfg.horizon_ = horizon;
  if (rate.numerator == 0) {
    cfg.block_length_ = 0;
    return cfg;
  }
  const auto common = std::gcd(rate.numerator, rate.denominator);
  const auto num = rate.numerator / common;
  const auto den = rate.denominator / common;
  // K * num / den > 1, compared without division.
  if (static_cast<unsigned __int128>(num_arms) * num > den) {
    throw Error(ErrorCode::RateTooHigh,
                "K*v = " + std::to_string(num_arms) + "*" + std::to_string(num) + "/" +
                    std::to_string(den) + " exceeds 1");
  }
  if (num != 1) {
    throw Error(ErrorCode::NonIntegralBlock,
                "1/v = " + std::to_string(den) + "/" + std::to_string(num) + " is not an integer");
  }
  cfg.block_length_ = den;
  return cfg;
}

}  // namespace fairbandit
