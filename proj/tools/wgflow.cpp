#include <CLI11.hpp>

#include <exception>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "wgflow/error.hpp"
#include "wgflow/harness/config.hpp"
#include "wgflow/harness/experiments.hpp"

namespace {

using namespace wgf::harness;

struct CommonArgs {
  std::string config;
  std::vector<std::string> overrides;
  std::string out = "out";
  int parallel_seeds = 1;
  bool print_defaults = false;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--config", a.config, "key = value config file");
  cmd->add_option("--set", a.overrides, "override key=value (repeatable)");
  cmd->add_option("--out", a.out, "output directory");
  cmd->add_option("--parallel-seeds", a.parallel_seeds, "seeds run concurrently, one CSV each, merged at the end")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--print-defaults", a.print_defaults, "print every key with its default and exit");
}

RunConfig build_config(Experiment e, const CommonArgs& a) {
  std::vector<std::pair<std::string, std::string>> ov;
  for (const auto& s : a.overrides) ov.push_back(parse_override(s));
  const std::filesystem::path path(a.config);
  return load_config(e, a.config.empty() ? nullptr : &path, ov);
}

int report(const std::vector<RunSummary>& runs) {
  bool any_ok = false;
  for (const auto& r : runs) {
    for (const auto& s : r.seeds) {
      if (s.ok) {
        any_ok = true;
      } else {
        std::cerr << r.run_id << " seed " << s.seed << " failed: " << s.error << '\n';
      }
    }
  }
  return any_ok ? 0 : 1;
}

std::vector<std::string> split_values(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string v;
  while (std::getline(ss, v, ';')) {
    if (!v.empty()) out.push_back(v);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Particle Wasserstein gradient flow experiments"};
  app.require_subcommand(1);

  CommonArgs args;
  const std::vector<std::string> names = {"sample", "regress", "rl-indirect", "rl-direct"};
  std::vector<CLI::App*> runs;
  for (const auto& n : names) {
    CLI::App* cmd = app.add_subcommand(n, "run the " + n + " experiment");
    add_common(cmd, args);
    runs.push_back(cmd);
  }
  std::string sweep_experiment;
  std::string sweep_key;
  std::string sweep_values;
  CLI::App* sweep = app.add_subcommand("sweep", "one run per value of a key, each in <out>/<key>=<value>");
  add_common(sweep, args);
  sweep->add_option("--experiment", sweep_experiment, "sample|regress|rl-indirect|rl-direct")->required();
  sweep->add_option("--key", sweep_key, "config key to vary")->required();
  sweep->add_option("--values", sweep_values, "values separated by ';'")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    RunOptions options;
    options.parallel_seeds = args.parallel_seeds;
    if (sweep->parsed()) {
      const Experiment e = parse_experiment(sweep_experiment);
      if (args.print_defaults) {
        std::cout << describe_defaults(e);
        return 0;
      }
      const RunConfig cfg = build_config(e, args);
      return report(run_sweep(cfg, sweep_key, split_values(sweep_values), args.out, options));
    }
    for (std::size_t i = 0; i < runs.size(); ++i) {
      if (!runs[i]->parsed()) continue;
      const Experiment e = parse_experiment(names[i]);
      if (args.print_defaults) {
        std::cout << describe_defaults(e);
        return 0;
      }
      const RunConfig cfg = build_config(e, args);
      return report({run_experiment(cfg, args.out, options)});
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
