#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairbandit/error.hpp"
#include "fairbandit/experiment.hpp"

namespace fairbandit {

enum class ExportFormat { Csv, Json };

inline ExportFormat parse_export_format(std::string_view text) {
  if (text == "csv") return ExportFormat::Csv;
  if (text == "json") return ExportFormat::Json;
  throw Error(ErrorCode::ParseError, "unknown format '" + std::string(text) + "'");
}

namespace detail {

/// Shortest representation that parses back to the same double.
inline std::string format_double(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

inline double parse_double(std::string_view text) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::ParseError, "bad number '" + std::string(text) + "'");
  }
  return value;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace detail

/// Header `t,mean_regret,stderr,pull_fraction_1..K`, one row per step.
inline std::string to_csv(const AggregateStats& stats) {
  std::string out = "t,mean_regret,stderr";
  for (std::size_t i = 1; i <= stats.num_arms; ++i) out += ",pull_fraction_" + std::to_string(i);
  out += '\n';
  for (const auto& row : stats.rows) {
    out += std::to_string(row.t);
    out += ',' + detail::format_double(row.mean_regret);
    out += ',' + detail::format_double(row.stderr_regret);
    for (double f : row.pull_fraction) out += ',' + detail::format_double(f);
    out += '\n';
  }
  return out;
}

inline nlohmann::json to_json(const AggregateStats& stats) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : stats.rows) {
    rows.push_back({{"t", row.t},
                    {"mean_regret", row.mean_regret},
                    {"stderr", row.stderr_regret},
                    {"pull_fraction", row.pull_fraction}});
  }
  return {{"num_arms", stats.num_arms}, {"runs", stats.runs}, {"rows", rows}};
}

/// Parses what to_csv writes. `runs` is not part of the CSV and comes back 0.
inline AggregateStats stats_from_csv(std::string_view text) {
  AggregateStats stats;
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, "missing CSV header");
  const auto header = detail::split(line, ',');
  if (header.size() < 3 || header[0] != "t" || header[1] != "mean_regret" || header[2] != "stderr") {
    throw Error(ErrorCode::ParseError, "unexpected CSV header");
  }
  stats.num_arms = header.size() - 3;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = detail::split(line, ',');
    if (cells.size() != header.size()) throw Error(ErrorCode::ParseError, "ragged CSV row");
    CurveRow row;
    row.t = static_cast<std::uint64_t>(detail::parse_double(cells[0]));
    row.mean_regret = detail::parse_double(cells[1]);
    row.stderr_regret = detail::parse_double(cells[2]);
    for (std::size_t i = 3; i < cells.size(); ++i) row.pull_fraction.push_back(detail::parse_double(cells[i]));
    stats.rows.push_back(std::move(row));
  }
  return stats;
}

inline AggregateStats stats_from_json(const nlohmann::json& j) {
  try {
    AggregateStats stats;
    stats.num_arms = j.at("num_arms").get<std::size_t>();
    stats.runs = j.at("runs").get<std::uint64_t>();
    for (const auto& r : j.at("rows")) {
      stats.rows.push_back(CurveRow{r.at("t").get<std::uint64_t>(), r.at("mean_regret").get<double>(),
                                    r.at("stderr").get<double>(), r.at("pull_fraction").get<std::vector<double>>()});
    }
    return stats;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("stats: ") + e.what());
  }
}

inline std::string render(const AggregateStats& stats, ExportFormat format) {
  return format == ExportFormat::Csv ? to_csv(stats) : to_json(stats).dump(2) + "\n";
}

inline void export_stats(const AggregateStats& stats, ExportFormat format, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open '" + path + "' for writing");
  out << render(stats, format);
  out.flush();
  if (!out) throw Error(ErrorCode::IoFailure, "write to '" + path + "' failed");
}

}  // namespace fairbandit
