#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "wgflow/harness/config.hpp"

namespace wgf::harness {

inline constexpr const char* kCsvHeader = "run_id,seed,iteration,env_steps,metric,value";
inline constexpr const char* kCodeVersion = "wgflow 0.1.0";

struct CsvRow {
  std::string run_id;
  std::uint64_t seed = 0;
  long iteration = 0;
  long env_steps = 0;
  std::string metric;
  double value = 0.0;
};

/// Shortest text that parses back to the same double ("%.17g").
std::string format_value(double v);

/// run.csv writer. The header is written on open; every row is flushed as soon as it is
/// written, so a run stopped at any point leaves a parseable file.
class CsvLog {
 public:
  explicit CsvLog(const std::filesystem::path& path, bool write_header = true);
  void write(const CsvRow& row);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

/// Reads a run.csv. Throws ParseError (row, column) on a wrong header or malformed row.
std::vector<CsvRow> read_run_csv(const std::filesystem::path& path);

struct SeedOutcome {
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::map<std::string, double> final_metrics;
};

struct RunSummary {
  std::string experiment;
  std::string run_id;
  double wall_time_seconds = 0.0;
  std::vector<SeedOutcome> seeds;
  bool all_failed() const;
};

/// summary.json: config echo, wall time, per-seed final metrics and errors, code version.
void write_summary(const std::filesystem::path& path, const RunConfig& cfg, const RunSummary& summary);

}  // namespace wgf::harness
