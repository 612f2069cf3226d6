#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "fairbandit/export.hpp"

namespace fairbandit {
namespace {

AggregateStats sample_stats(std::uint64_t horizon, std::uint64_t runs) {
  ExperimentConfig cfg;
  cfg.policy = PolicyKind::Strict;
  cfg.fairness = validate_config(2, Rate{1, 4}, horizon);
  cfg.env.arms = {Bernoulli{0.9}, ClippedGaussian{0.5, 0.3}};
  cfg.runs = runs;
  cfg.master_seed = 99;
  return run_experiment(cfg, 2);
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

TEST(ExportCsv, ThreeStepsGiveThreeRows) {
  const auto stats = sample_stats(3, 4);
  const std::string csv = to_csv(stats);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "t,mean_regret,stderr,pull_fraction_1,pull_fraction_2");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 3);
}

TEST(ExportCsv, EmptyStatsWriteHeaderOnly) {
  AggregateStats empty;
  empty.num_arms = 3;
  EXPECT_EQ(to_csv(empty), "t,mean_regret,stderr,pull_fraction_1,pull_fraction_2,pull_fraction_3\n");
  EXPECT_TRUE(stats_from_csv(to_csv(empty)).rows.empty());
}

TEST(ExportCsv, RoundTripIsExact) {
  const auto stats = sample_stats(200, 9);
  const auto back = stats_from_csv(to_csv(stats));
  EXPECT_EQ(back.num_arms, stats.num_arms);
  EXPECT_EQ(back.rows, stats.rows);
}

TEST(ExportJson, RoundTripIsExact) {
  const auto stats = sample_stats(200, 9);
  const auto back = stats_from_json(nlohmann::json::parse(render(stats, ExportFormat::Json)));
  EXPECT_EQ(back.num_arms, stats.num_arms);
  EXPECT_EQ(back.runs, 9u);
  EXPECT_EQ(back.rows, stats.rows);
}

TEST(ExportJson, RejectsMalformedInput) {
  EXPECT_THROW(stats_from_json(nlohmann::json::parse(R"({"num_arms":2})")), Error);
  EXPECT_THROW(stats_from_csv("t,mean,stderr\n"), Error);
  EXPECT_THROW(stats_from_csv("t,mean_regret,stderr,pull_fraction_1\n1,0,0\n"), Error);
  EXPECT_THROW(parse_export_format("xml"), Error);
}

TEST(ExportStats, WritesByteIdenticalFiles) {
  const auto dir = std::filesystem::temp_directory_path() / "fairbandit_export_test";
  std::filesystem::create_directories(dir);
  for (auto format : {ExportFormat::Csv, ExportFormat::Json}) {
    export_stats(sample_stats(100, 5), format, (dir / "a").string());
    export_stats(sample_stats(100, 5), format, (dir / "b").string());
    EXPECT_EQ(slurp(dir / "a"), slurp(dir / "b"));
    EXPECT_EQ(slurp(dir / "a"), render(sample_stats(100, 5), format));
  }
  std::filesystem::remove_all(dir);
}

TEST(ExportStats, UnwritablePathIsIoFailure) {
  try {
    export_stats(sample_stats(3, 1), ExportFormat::Csv, "/nonexistent-dir/x/out.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoFailure);
  }
}

}  // namespace
}  // namespace fairbandit
