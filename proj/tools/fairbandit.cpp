// fairbandit: simulation, verification, and allocation-service front end.
//
// Exit codes: 0 success, 1 invariant or fuzz failure, 2 usage error.

#include <csignal>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "fairbandit/fairbandit.hpp"
#include "fairbandit/service/http_api.hpp"
#include "fairbandit/service/session.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kInvariantFailure = 1;
constexpr int kUsageError = 2;

std::vector<std::uint64_t> parse_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream in(text);
  std::string cell;
  while (std::getline(in, cell, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoull(cell, &used));
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw fairbandit::Error(fairbandit::ErrorCode::ParseError, "bad list element '" + cell + "'");
    }
  }
  return out;
}

fairbandit::EnvSpec load_env(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw fairbandit::Error(fairbandit::ErrorCode::IoFailure, "cannot read '" + path + "'");
  const auto doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw fairbandit::Error(fairbandit::ErrorCode::ParseError, path + " is not JSON");
  return fairbandit::EnvSpec::from_json(doc);
}

struct SimOptions {
  std::string policy = "strict";
  std::string arms_path;
  std::string rate = "0";
  std::uint64_t horizon = 0;
  std::uint64_t runs = 1;
  std::optional<std::uint64_t> seed;
  std::string slots;
  std::string assign;
  std::string out;
  std::string format = "csv";
  unsigned threads = 0;
};

int run_sim(const SimOptions& o) {
  using namespace fairbandit;
  ExperimentConfig cfg;
  cfg.policy = parse_policy(o.policy);
  cfg.env = load_env(o.arms_path);
  cfg.fairness = validate_config(cfg.env.num_arms(), parse_rate(o.rate), o.horizon);
  cfg.runs = o.runs;
  cfg.master_seed = o.seed.value_or(cfg.env.seed);
  if (!o.slots.empty()) cfg.slots = parse_list(o.slots);
  if (!o.assign.empty()) {
    std::vector<ArmIndex> arms;
    for (auto a : parse_list(o.assign)) {
      if (a == 0) throw Error(ErrorCode::NotBijective, "arms are one-based");
      arms.push_back(a - 1);
    }
    cfg.assignment = arms;
  }
  cfg.schedule();  // validates slots/assignment before any work
  const auto stats = run_experiment(cfg, o.threads);
  export_stats(stats, parse_export_format(o.format), o.out);
  const auto& last = stats.rows.back();
  std::cout << "policy=" << to_string(cfg.policy) << " K=" << cfg.fairness.num_arms()
            << " v=" << cfg.fairness.rate_string() << " T=" << cfg.fairness.horizon() << " runs=" << cfg.runs
            << " mean_regret=" << last.mean_regret << " stderr=" << last.stderr_regret << " -> " << o.out << "\n";
  return kOk;
}

int run_fuzz(std::uint64_t trials, std::uint64_t seed) {
  const auto report = fairbandit::fairness_fuzz(trials, seed);
  std::cout << "fuzz: " << report.trials << " trials, " << report.violations << " violations\n";
  if (report.first_counterexample) std::cout << "counterexample: " << *report.first_counterexample << "\n";
  return report.passed() ? kOk : kInvariantFailure;
}

int run_oracle_check(std::uint64_t seed, std::uint64_t instances) {
  const auto report = fairbandit::oracle_sweep(seed, instances);
  std::cout << "oracle-check: " << report.instances << " instances, " << report.mismatches << " mismatches\n";
  if (report.first_mismatch) std::cout << "mismatch: " << *report.first_mismatch << "\n";
  return report.passed() ? kOk : kInvariantFailure;
}

int run_schedules(std::size_t arms, const std::string& rate) {
  using namespace fairbandit;
  const auto cfg = validate_config(arms, parse_rate(rate), 1);
  const auto count = count_schedules(cfg);
  std::cout << "count: " << count << "\n";
  if (count > 1000) return kOk;
  for (const auto& s : enumerate_schedules(cfg, 1000)) {
    std::cout << "S={";
    for (std::size_t k = 0; k < s.slots().size(); ++k) std::cout << (k ? "," : "") << s.slots()[k];
    std::cout << "} g:";
    for (std::size_t k = 0; k < s.slots().size(); ++k) {
      std::cout << " " << s.slots()[k] << "->" << s.assignment()[k] + 1;
    }
    std::cout << "\n";
  }
  return kOk;
}

struct ServeOptions {
  std::string listen = "127.0.0.1";
  int port = 8080;
  double default_m = fairbandit::service::kDefaultNormalizer;
  std::string snapshot_dir;
};

httplib::Server* g_server = nullptr;

int run_serve(const ServeOptions& o) {
  fairbandit::service::SessionStore::Options options;
  options.default_normalizer = o.default_m;
  if (!o.snapshot_dir.empty()) options.snapshot_dir = o.snapshot_dir;
  fairbandit::service::SessionStore store(options);
  httplib::Server server;
  fairbandit::service::mount(server, store);
  g_server = &server;
  std::signal(SIGINT, [](int) {
    if (g_server) g_server->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_server) g_server->stop();
  });
  std::cout << "listening on " << o.listen << ":" << o.port << std::endl;
  if (!server.listen(o.listen, o.port)) {
    std::cerr << "cannot bind " << o.listen << ":" << o.port << "\n";
    return kUsageError;
  }
  return kOk;
}

template <typename T>
T env_or(const char* name, T fallback) {
  const char* value = std::getenv(name);
  if (!value || !*value) return fallback;
  std::istringstream in(value);
  T parsed{};
  return (in >> parsed) ? parsed : fallback;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Minimum-rate-constrained UCB: simulation, verification and live allocation"};
  app.require_subcommand(1);

  SimOptions sim;
  auto* sim_cmd = app.add_subcommand("sim", "run seeded Monte-Carlo episodes and export regret curves");
  sim_cmd->add_option("--policy", sim.policy, "strict | stochastic | ucb")->check(CLI::IsMember({"strict", "stochastic", "ucb"}));
  sim_cmd->add_option("--arms", sim.arms_path, "environment JSON file")->required();
  sim_cmd->add_option("--rate", sim.rate, "minimum pull rate, e.g. 1/4 or 0")->required();
  sim_cmd->add_option("--horizon", sim.horizon, "horizon T")->required();
  sim_cmd->add_option("--runs", sim.runs, "number of episodes");
  sim_cmd->add_option("--seed", sim.seed, "master seed (defaults to the environment's seed)");
  sim_cmd->add_option("--slots", sim.slots, "prescheduled slot offsets, e.g. 1,3");
  sim_cmd->add_option("--assign", sim.assign, "arm for each slot, e.g. 1,2");
  sim_cmd->add_option("--out", sim.out, "output path")->required();
  sim_cmd->add_option("--format", sim.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  sim_cmd->add_option("--threads", sim.threads, "worker threads (0 = hardware concurrency)");

  std::uint64_t fuzz_trials = 1000, fuzz_seed = 1;
  auto* fuzz_cmd = app.add_subcommand("fuzz", "check the anytime pull floor on random strict-policy instances");
  fuzz_cmd->add_option("--trials", fuzz_trials, "number of random instances");
  fuzz_cmd->add_option("--seed", fuzz_seed, "seed");

  std::uint64_t oracle_seed = 1, oracle_instances = 50;
  auto* oracle_cmd = app.add_subcommand("oracle-check", "compare simulation with the brute-force oracle");
  oracle_cmd->add_option("--seed", oracle_seed, "seed");
  oracle_cmd->add_option("--instances", oracle_instances, "number of tiny instances");

  std::size_t sched_arms = 2;
  std::string sched_rate;
  auto* sched_cmd = app.add_subcommand("schedules", "count (and list, when at most 1000) the valid preschedules");
  sched_cmd->add_option("--arms", sched_arms, "number of arms K")->required();
  sched_cmd->add_option("--rate", sched_rate, "minimum pull rate 1/d")->required();

  ServeOptions serve;
  serve.listen = env_or<std::string>("FAIRBANDIT_LISTEN", serve.listen);
  serve.port = env_or<int>("FAIRBANDIT_PORT", serve.port);
  serve.default_m = env_or<double>("FAIRBANDIT_DEFAULT_M", serve.default_m);
  serve.snapshot_dir = env_or<std::string>("FAIRBANDIT_SNAPSHOT_DIR", serve.snapshot_dir);
  auto* serve_cmd = app.add_subcommand("serve", "run the HTTP/JSON allocation service");
  serve_cmd->add_option("--listen", serve.listen, "listen address");
  serve_cmd->add_option("--port", serve.port, "listen port");
  serve_cmd->add_option("--default-m", serve.default_m, "score normalizer M for new sessions");
  serve_cmd->add_option("--snapshot-dir", serve.snapshot_dir, "directory for session snapshots");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (*sim_cmd) return run_sim(sim);
    if (*fuzz_cmd) return run_fuzz(fuzz_trials, fuzz_seed);
    if (*oracle_cmd) return run_oracle_check(oracle_seed, oracle_instances);
    if (*sched_cmd) return run_schedules(sched_arms, sched_rate);
    if (*serve_cmd) return run_serve(serve);
  } catch (const fairbandit::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  }
  return kUsageError;
}
