// Steps the strict policy by hand for the 30-turn, 1/3-rate setting and
// prints the allocation pattern.

#include <iostream>

#include "fairbandit/fairbandit.hpp"

int main() {
  using namespace fairbandit;
  const auto cfg = validate_config(2, parse_rate("1/3"), 30);
  const auto schedule = build_schedule(cfg);
  EnvSpec env{{Bernoulli{0.8}, Bernoulli{0.4}}, 1};
  CounterRng rng = derive_stream(env.seed, 0, StreamPurpose::Environment);

  BanditState state(cfg.num_arms());
  while (state.clock() < cfg.horizon()) {
    const Decision d = select_strict(state, schedule, cfg);
    state.update(d, sample_reward(env, d.arm, rng));
    std::cout << (d.arm == 0 ? 'A' : 'B') << (d.provenance == Provenance::Prescheduled ? '*' : ' ');
  }
  std::cout << "\nturns: A=" << state.pull_count(0) << " B=" << state.pull_count(1)
            << " (floor " << min_pull_lower_bound(cfg.horizon(), cfg) << ")\n";
}
