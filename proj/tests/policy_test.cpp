#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "fairbandit/experiment.hpp"
#include "fairbandit/oracle.hpp"
#include "fairbandit/policy.hpp"
#include "fairbandit/state.hpp"

namespace fairbandit {
namespace {

BanditState state_with(std::vector<std::pair<ArmIndex, double>> pulls, std::size_t k) {
  BanditState s(k);
  for (auto [arm, r] : pulls) s.update({arm, Provenance::Init, std::nullopt}, r);
  return s;
}

TEST(UcbIndex, UnitExplorationTerm) {
  const auto s = state_with({{0, 0.5}}, 1);
  EXPECT_DOUBLE_EQ(ucb_index_with_log(s, 0, 1.0), 2.5);
}

TEST(UcbIndex, FourPullsLogFour) {
  const auto s = state_with({{0, 0.5}, {0, 0.5}, {0, 0.5}, {0, 0.5}}, 1);
  EXPECT_DOUBLE_EQ(ucb_index_with_log(s, 0, 4.0), 2.5);
}

TEST(UcbIndex, HundredPulls) {
  BanditState s(1);
  for (int i = 0; i < 100; ++i) s.update({0, Provenance::Init, std::nullopt}, i < 90 ? 1.0 : 0.0);
  // 0.9 + 2 sqrt(ln 100 / 100), evaluated independently.
  EXPECT_NEAR(ucb_index(s, 0, 100), 1.3291932052578694, 1e-12);
}

TEST(UcbIndex, NeverPulledArm) {
  BanditState s(2);
  try {
    ucb_index(s, 1, 10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ArmNeverPulled);
  }
}

TEST(Update, Examples) {
  BanditState s(2);
  s.update({0, Provenance::Init, std::nullopt}, 0.7);
  EXPECT_EQ(s.pull_count(0), 1u);
  EXPECT_DOUBLE_EQ(s.reward_sum(0), 0.7);
  EXPECT_EQ(s.clock(), 1u);

  try {
    s.update({0, Provenance::Init, std::nullopt}, 1.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RewardOutOfRange);
  }
  EXPECT_EQ(s.clock(), 1u);

  update(s, {1, Provenance::UcbArgmax, 1}, 0.2);
  update(s, {1, Provenance::Prescheduled, 0}, 0.4);
  EXPECT_DOUBLE_EQ(s.empirical_mean(1), 0.3);
  EXPECT_EQ(s.nonprescheduled_pull_count(1), 1u);
}

TEST(SelectStrict, InitPhasePullsArmT) {
  const auto cfg = validate_config(2, Rate{1, 4}, 30);
  const auto schedule = build_schedule(cfg);
  BanditState s(2);
  auto d = select_strict(s, schedule, cfg);
  EXPECT_EQ(d.arm, 0u);
  EXPECT_EQ(d.provenance, Provenance::Init);
  EXPECT_FALSE(d.ucb_argmax_arm.has_value());
  s.update(d, 0.3);
  d = select_strict(s, schedule, cfg);
  EXPECT_EQ(d.arm, 1u);
  EXPECT_EQ(d.provenance, Provenance::Init);
}

TEST(SelectStrict, FirstSlotOfBlockIsPrescheduledArmOne) {
  const auto cfg = validate_config(2, Rate{1, 4}, 30);
  const auto s = state_with({{0, 0.0}, {1, 1.0}}, 2);  // arm 2 leads on UCB
  const auto d = select_strict(s, build_schedule(cfg), cfg);
  EXPECT_EQ(d.arm, 0u);
  EXPECT_EQ(d.provenance, Provenance::Prescheduled);
  EXPECT_EQ(d.ucb_argmax_arm, 1u);
}

TEST(SelectStrict, FreeSlotTakesUcbArgmax) {
  // T = 8, history (arm1: 1.0, arm2: 0.0, arm1: 1.0): indices 3.04 vs 2.88 at t = 4.
  const auto cfg = validate_config(2, Rate{1, 4}, 8);
  const auto s = state_with({{0, 1.0}, {1, 0.0}, {0, 1.0}}, 2);
  EXPECT_GT(ucb_index(s, 0, 8), ucb_index(s, 1, 8));
  const auto d = select_strict(s, build_schedule(cfg), cfg);
  EXPECT_EQ(d.arm, 0u);
  EXPECT_EQ(d.provenance, Provenance::UcbArgmax);
}

TEST(SelectStrict, TiesGoToLowestIndex) {
  const auto cfg = validate_config(3, Rate{0, 1}, 50);
  const auto s = state_with({{0, 0.5}, {1, 0.5}, {2, 0.5}}, 3);
  EXPECT_EQ(select_strict(s, build_schedule(cfg), cfg).arm, 0u);
}

TEST(SelectStrict, HorizonExceeded) {
  const auto cfg = validate_config(2, Rate{1, 2}, 2);
  const auto s = state_with({{0, 0.5}, {1, 0.5}}, 2);
  try {
    select_strict(s, build_schedule(cfg), cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::HorizonExceeded);
  }
}

TEST(SelectStochastic, FullRateIsAlwaysUniform) {
  const auto cfg = validate_config(2, Rate{1, 2}, 1000);
  CounterRng rng(5);
  auto s = state_with({{0, 0.9}, {1, 0.1}}, 2);
  for (int i = 0; i < 500; ++i) {
    const auto d = select_stochastic(s, cfg, rng);
    ASSERT_EQ(d.provenance, Provenance::UniformDraw);
    ASSERT_EQ(d.ucb_argmax_arm, ucb_argmax(s, cfg.horizon()));
    s.update(d, 0.5);
  }
}

TEST(SelectStochastic, ZeroRateIsAlwaysArgmax) {
  const auto cfg = validate_config(3, Rate{0, 1}, 1000);
  CounterRng rng(6);
  auto s = state_with({{0, 0.9}, {1, 0.1}, {2, 0.4}}, 3);
  for (int i = 0; i < 500; ++i) {
    const auto d = select_stochastic(s, cfg, rng);
    ASSERT_EQ(d.provenance, Provenance::UcbArgmax);
    s.update(d, 0.5);
  }
}

TEST(SelectStochastic, QuarterRateInducesMixture) {
  const auto cfg = validate_config(2, Rate{1, 4}, 1000);
  const auto s = state_with({{0, 0.9}, {1, 0.1}}, 2);
  const ArmIndex leader = ucb_argmax(s, cfg.horizon());
  CounterRng rng(7);
  constexpr int kDraws = 100000;
  int hits = 0;
  for (int i = 0; i < kDraws; ++i) hits += select_stochastic(s, cfg, rng).arm == leader;
  // p(argmax) = 0.75; 4 sigma = 4 sqrt(0.75 * 0.25 / 1e5) = 0.0055.
  EXPECT_NEAR(static_cast<double>(hits) / kDraws, 0.75, 0.0055);
}

TEST(SelectStochastic, DeterministicGivenSeed) {
  const auto cfg = validate_config(3, Rate{1, 5}, 400);
  auto run = [&](std::uint64_t seed) {
    CounterRng rng(seed);
    BanditState s(3);
    std::vector<Decision> out;
    while (s.clock() < cfg.horizon()) {
      out.push_back(select_stochastic(s, cfg, rng));
      s.update(out.back(), (out.back().arm + 1) / 4.0);
    }
    return out;
  };
  EXPECT_EQ(run(11), run(11));
  EXPECT_NE(run(11), run(12));
}

TEST(Mixture, Examples) {
  const auto two = validate_config(2, Rate{1, 4}, 100);
  auto p = mixture_of(state_with({{0, 0.9}, {1, 0.1}}, 2), two).probabilities;
  EXPECT_DOUBLE_EQ(p[0], 0.75);
  EXPECT_DOUBLE_EQ(p[1], 0.25);

  const auto four = validate_config(4, Rate{1, 4}, 100);
  p = mixture_of(state_with({{0, 0.1}, {1, 0.9}, {2, 0.1}, {3, 0.1}}, 4), four).probabilities;
  for (double x : p) EXPECT_DOUBLE_EQ(x, 0.25);

  const auto three = validate_config(3, Rate{1, 6}, 100);
  p = mixture_of(state_with({{0, 0.1}, {1, 0.9}, {2, 0.1}}, 3), three).probabilities;
  EXPECT_NEAR(p[0], 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(p[1], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(p[2], 1.0 / 6.0, 1e-15);

  try {
    mixture_of(BanditState(2), two);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ArmNeverPulled);
  }
}

TEST(MixtureProperty, SumsToOneWithFloorV) {
  CounterRng rng(99);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t k = 1 + rng.uniform_below(6);
    const bool zero = rng.uniform_below(4) == 0;
    const auto cfg = validate_config(k, zero ? Rate{0, 1} : Rate{1, k + rng.uniform_below(20)}, 100);
    const auto p = mixture_around(rng.uniform_below(k), cfg).probabilities;
    const double total = std::accumulate(p.begin(), p.end(), 0.0);
    ASSERT_NEAR(total, 1.0, 1e-12);
    int heavy = 0;
    for (double x : p) {
      ASSERT_GE(x, cfg.min_rate());
      heavy += x == cfg.exploit_probability() + cfg.min_rate();
    }
    ASSERT_GE(heavy, 1);
  }
}

// Shifting every arm's empirical mean by the same constant leaves the argmax alone.
TEST(ArgmaxProperty, InvariantUnderCommonShift) {
  CounterRng rng(3);
  int checked = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t k = 2 + rng.uniform_below(4);
    const std::uint64_t horizon = 10 + rng.uniform_below(1000);
    BanditState base(k), shifted(k);
    const double c = 0.25;
    for (ArmIndex i = 0; i < k; ++i) {
      const auto n = 1 + rng.uniform_below(20);
      for (std::uint64_t j = 0; j < n; ++j) {
        const double r = static_cast<double>(rng.uniform_below(7)) / 8.0;  // <= 0.75
        base.update({i, Provenance::Init, std::nullopt}, r);
        shifted.update({i, Provenance::Init, std::nullopt}, r + c);
      }
    }
    std::vector<double> idx;
    for (ArmIndex i = 0; i < k; ++i) idx.push_back(ucb_index(base, i, horizon));
    auto sorted = idx;
    std::sort(sorted.rbegin(), sorted.rend());
    if (sorted[0] - sorted[1] < 1e-9) continue;  // rounding may split exact ties
    ++checked;
    ASSERT_EQ(ucb_argmax(base, horizon), ucb_argmax(shifted, horizon));
  }
  EXPECT_GT(checked, 1000);
}

TEST(StateProperty, AccountingHoldsForEveryPolicy) {
  CounterRng rng(17);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t k = 2 + rng.uniform_below(3);
    const auto cfg = validate_config(k, Rate{1, k + rng.uniform_below(6)}, 50 + rng.uniform_below(300));
    const auto kind = static_cast<PolicyKind>(rng.uniform_below(3));
    Policy policy(kind, cfg, kind == PolicyKind::Strict ? build_schedule(cfg) : Schedule{}, CounterRng(rng()));
    BanditState s(k);
    std::uint64_t argmax_decisions = 0;
    while (s.clock() < cfg.horizon()) {
      const auto d = policy.select(s);
      if (s.clock() >= k) {
        ASSERT_NE(d.provenance, Provenance::Init);
      }
      if (d.provenance == Provenance::Prescheduled) {
        ASSERT_EQ(kind, PolicyKind::Strict);
      }
      if (d.provenance == Provenance::UniformDraw) {
        ASSERT_EQ(kind, PolicyKind::Stochastic);
      }
      argmax_decisions += d.provenance == Provenance::UcbArgmax;
      s.update(d, rng.uniform01());
      std::uint64_t n_total = 0, m_total = 0;
      for (ArmIndex i = 0; i < k; ++i) {
        n_total += s.pull_count(i);
        m_total += s.nonprescheduled_pull_count(i);
        ASSERT_LE(s.nonprescheduled_pull_count(i), s.pull_count(i));
        ASSERT_LE(s.reward_sum(i), static_cast<double>(s.pull_count(i)));
      }
      ASSERT_EQ(n_total, s.clock());
      ASSERT_EQ(m_total, argmax_decisions);
    }
  }
}

TEST(StrictProperty, FullRateCountsDifferByAtMostOne) {
  for (std::size_t k = 1; k <= 5; ++k) {
    for (std::uint64_t horizon = k; horizon <= 60; ++horizon) {
      const auto cfg = validate_config(k, Rate{1, k}, horizon);
      const auto schedule = build_schedule(cfg);
      BanditState s(k);
      while (s.clock() < horizon) {
        const auto d = select_strict(s, schedule, cfg);
        if (s.clock() >= k) {
          ASSERT_EQ(d.provenance, Provenance::Prescheduled);
        }
        s.update(d, 0.5);
      }
      const auto [lo, hi] = std::minmax_element(s.pull_counts().begin(), s.pull_counts().end());
      ASSERT_LE(*hi - *lo, 1u);
    }
  }
}

TEST(ZeroRate, StrictAndStochasticMatchReferenceUcb) {
  CounterRng rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    ExperimentConfig cfg;
    const std::size_t k = 2 + rng.uniform_below(3);
    cfg.fairness = validate_config(k, Rate{0, 1}, 300);
    for (std::size_t i = 0; i < k; ++i) cfg.env.arms.push_back(Bernoulli{rng.uniform01()});
    cfg.master_seed = rng();
    const auto expected = reference_ucb(cfg.env, 300, derive_stream(cfg.master_seed, 0, StreamPurpose::Environment));
    for (auto kind : {PolicyKind::Strict, PolicyKind::Stochastic, PolicyKind::Unconstrained}) {
      cfg.policy = kind;
      ASSERT_EQ(run_episode(cfg, 0).arms(), expected);
    }
  }
}

}  // namespace
}  // namespace fairbandit
