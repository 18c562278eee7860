#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "wgflow/envs/env.hpp"
#include "wgflow/flow/jko.hpp"
#include "wgflow/harness/config.hpp"
#include "wgflow/harness/runlog.hpp"
#include "wgflow/rl/direct.hpp"
#include "wgflow/rl/indirect.hpp"

namespace wgf::harness {

/// Receives (iteration, env_steps, metric, value) for one seed.
using MetricSink = std::function<void(long iteration, long env_steps, const std::string& metric, double value)>;

/// Builders from a RunConfig.
flow::JkoConfig jko_config(const RunConfig& cfg);
envs::EnvSpec env_spec(const RunConfig& cfg);
rl::IndirectConfig indirect_config(const RunConfig& cfg);
rl::DirectConfig direct_config(const RunConfig& cfg, const envs::EnvSpec& env);

/// Per-environment defaults used when direct.reward_scale / direct.epoch_steps are "auto".
double default_reward_scale(const std::string& env_name);
int default_epoch_steps(const std::string& env_name);

/// Runs one seed of the configured experiment, streaming metrics to `sink`. Files
/// (particle snapshots, checkpoints) go under `out_dir` when it is non-empty. Returns the
/// metrics of the last logged iteration.
std::map<std::string, double> run_seed(const RunConfig& cfg, std::uint64_t seed, const MetricSink& sink,
                                       const std::filesystem::path& out_dir);

struct RunOptions {
  int parallel_seeds = 1;        // worker threads, one seed each at a time
  long abort_after_rows = -1;    // test hook: throw after this many CSV rows (simulated interruption)
};

/// Runs every seed, writes out_dir/run.csv (flushed row by row) and out_dir/summary.json.
/// A failing seed is recorded in the summary and does not stop the others. With several
/// workers, each seed writes its own file and the files are merged in seed order, so
/// run.csv is identical to the sequential one.
RunSummary run_experiment(const RunConfig& cfg, const std::filesystem::path& out_dir, const RunOptions& options = {});

/// One run per value of `key`, each in out_dir/<key>=<value>/.
std::vector<RunSummary> run_sweep(const RunConfig& cfg, const std::string& key, const std::vector<std::string>& values,
                                  const std::filesystem::path& out_dir, const RunOptions& options = {});

/// Whitespace-separated particle dump: one particle per line, coordinates in "%.17g".
void write_particle_snapshot(const std::filesystem::path& path, const Eigen::MatrixXd& points);
/// Inverse of write_particle_snapshot (points are d x M). Throws ParseError on ragged or non-numeric input.
Eigen::MatrixXd read_particle_snapshot(const std::filesystem::path& path);

}  // namespace wgf::harness
