#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include <boost/math/special_functions/erf.hpp>
#include <nlohmann/json.hpp>

#include "fairbandit/config.hpp"
#include "fairbandit/error.hpp"
#include "fairbandit/rng.hpp"

namespace fairbandit {

struct Bernoulli {
  double p = 0.5;
};

/// Normal(mean, stddev) clamped to [0, 1].
struct ClippedGaussian {
  double mean = 0.5;
  double stddev = 0.1;
};

struct Fixed {
  double value = 0.5;
};

namespace detail {

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }
inline double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

inline void require_unit(double x, const char* what) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw Error(ErrorCode::InvalidDistribution, std::string(what) + " must lie in [0,1]");
  }
}

}  // namespace detail

class ArmDistribution {
 public:
  using Kind = std::variant<Bernoulli, ClippedGaussian, Fixed>;

  ArmDistribution(Bernoulli d) : ArmDistribution(Kind{d}) {}        // NOLINT(google-explicit-constructor)
  ArmDistribution(ClippedGaussian d) : ArmDistribution(Kind{d}) {}  // NOLINT(google-explicit-constructor)
  ArmDistribution(Fixed d) : ArmDistribution(Kind{d}) {}            // NOLINT(google-explicit-constructor)

  explicit ArmDistribution(Kind kind) : kind_(kind) {
    std::visit(
        [](const auto& d) {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, Bernoulli>) detail::require_unit(d.p, "bernoulli p");
          if constexpr (std::is_same_v<T, Fixed>) detail::require_unit(d.value, "fixed value");
          if constexpr (std::is_same_v<T, ClippedGaussian>) {
            if (!std::isfinite(d.mean) || !(d.stddev >= 0.0) || !std::isfinite(d.stddev)) {
              throw Error(ErrorCode::InvalidDistribution, "gaussian needs finite mean and stddev >= 0");
            }
          }
        },
        kind_);
  }

  const Kind& kind() const noexcept { return kind_; }

  double expected_value() const {
    return std::visit(
        [](const auto& d) -> double {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, Bernoulli>) return d.p;
          if constexpr (std::is_same_v<T, Fixed>) return d.value;
          if constexpr (std::is_same_v<T, ClippedGaussian>) {
            if (d.stddev == 0.0) return std::clamp(d.mean, 0.0, 1.0);
            // E[clamp(X,0,1)] = P(X>1) + E[X; 0<=X<=1]
            const double a = (0.0 - d.mean) / d.stddev;
            const double b = (1.0 - d.mean) / d.stddev;
            const double inside = detail::normal_cdf(b) - detail::normal_cdf(a);
            return (1.0 - detail::normal_cdf(b)) + d.mean * inside +
                   d.stddev * (detail::normal_pdf(a) - detail::normal_pdf(b));
          }
        },
        kind_);
  }

  /// Exactly one rng draw per call.
  double sample(CounterRng& rng) const {
    const double u = rng.uniform01();
    return std::visit(
        [u](const auto& d) -> double {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, Bernoulli>) return u < d.p ? 1.0 : 0.0;
          if constexpr (std::is_same_v<T, Fixed>) return d.value;
          if constexpr (std::is_same_v<T, ClippedGaussian>) {
            if (d.stddev == 0.0) return std::clamp(d.mean, 0.0, 1.0);
            if (u == 0.0) return 0.0;  // quantile(0) = -inf, clamped
            const double z = -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * u);
            return std::clamp(d.mean + d.stddev * z, 0.0, 1.0);
          }
        },
        kind_);
  }

  friend bool operator==(const ArmDistribution& a, const ArmDistribution& b) {
    return a.to_json() == b.to_json();
  }

  nlohmann::json to_json() const {
    return std::visit(
        [](const auto& d) -> nlohmann::json {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, Bernoulli>) return {{"kind", "bernoulli"}, {"p", d.p}};
          if constexpr (std::is_same_v<T, Fixed>) return {{"kind", "fixed"}, {"value", d.value}};
          if constexpr (std::is_same_v<T, ClippedGaussian>) {
            return {{"kind", "clipped-gaussian"}, {"mean", d.mean}, {"stddev", d.stddev}};
          }
        },
        kind_);
  }

  static ArmDistribution from_json(const nlohmann::json& j) {
    try {
      const auto kind = j.at("kind").get<std::string>();
      if (kind == "bernoulli") return Bernoulli{j.at("p").get<double>()};
      if (kind == "fixed") return Fixed{j.at("value").get<double>()};
      if (kind == "clipped-gaussian" || kind == "gaussian") {
        return ClippedGaussian{j.at("mean").get<double>(), j.at("stddev").get<double>()};
      }
      throw Error(ErrorCode::ParseError, "unknown arm kind '" + kind + "'");
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError, std::string("arm distribution: ") + e.what());
    }
  }

 private:
  Kind kind_;
};

struct EnvSpec {
  std::vector<ArmDistribution> arms;
  std::uint64_t seed = 0;

  std::size_t num_arms() const noexcept { return arms.size(); }

  std::vector<double> means() const {
    std::vector<double> mu;
    mu.reserve(arms.size());
    for (const auto& arm : arms) mu.push_back(arm.expected_value());
    return mu;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["arms"] = nlohmann::json::array();
    for (const auto& arm : arms) j["arms"].push_back(arm.to_json());
    j["seed"] = seed;
    return j;
  }

  /// `{"arms":[{"kind":"bernoulli","p":0.9},...],"seed":42}`; seed is optional.
  static EnvSpec from_json(const nlohmann::json& j) {
    EnvSpec env;
    try {
      for (const auto& arm : j.at("arms")) env.arms.push_back(ArmDistribution::from_json(arm));
      if (j.contains("seed")) env.seed = j.at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError, std::string("environment: ") + e.what());
    }
    if (env.arms.empty()) throw Error(ErrorCode::ZeroArms, "environment has no arms");
    return env;
  }
};

inline double sample_reward(const EnvSpec& env, ArmIndex arm, CounterRng& rng) {
  if (arm >= env.num_arms()) {
    throw Error(ErrorCode::ArmOutOfRange,
                "arm " + std::to_string(arm + 1) + " outside [1, " + std::to_string(env.num_arms()) + "]");
  }
  return env.arms[arm].sample(rng);
}

/// Delta_i = max_j mu(j) - mu(i).
inline std::vector<double> gap_vector(const EnvSpec& env) {
  auto mu = env.means();
  if (mu.empty()) return mu;
  const double best = *std::max_element(mu.begin(), mu.end());
  for (auto& m : mu) m = best - m;
  return mu;
}

/// Cumulative game score of one player, turned into a bounded reward.
struct TeammateScore {
  double cumulative_score = 0.0;
  std::uint64_t turns = 0;
  double normalizer = 300.0;
};

/// min(1, S_p / (M n_p)).
inline double teammate_reward(const TeammateScore& score) {
  if (score.turns == 0) throw Error(ErrorCode::ZeroTurns, "player has taken no turns");
  if (!(score.normalizer > 0.0)) throw Error(ErrorCode::InvalidDistribution, "normalizer M must be positive");
  if (!(score.cumulative_score >= 0.0)) throw Error(ErrorCode::NegativePoints, "score must be nonnegative");
  return std::min(1.0, score.cumulative_score / (score.normalizer * static_cast<double>(score.turns)));
}

}  // namespace fairbandit
