#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace wgf::harness {

enum class Experiment { sample, regress, rl_indirect, rl_direct };

/// "sample", "regress", "rl-indirect", "rl-direct".
Experiment parse_experiment(std::string_view name);
std::string to_string(Experiment e);

enum class ValueType { real, integer, boolean, text, int_list, real_list };

struct KeySpec {
  std::string key;
  ValueType type;
  std::string default_value;
  std::string doc;
  std::map<Experiment, std::string> experiment_defaults;  // overrides default_value per experiment
};

/// Every key the harness understands, in display order.
const std::vector<KeySpec>& config_keys();
const KeySpec* find_key(std::string_view key);

/// Flat key = value configuration. Values are stored as text and validated against the
/// key's type whenever they are set; typed getters convert on read.
class RunConfig {
 public:
  /// All keys at their defaults for this experiment.
  explicit RunConfig(Experiment experiment);

  Experiment experiment() const { return experiment_; }

  /// Throws InputError naming the key if it is unknown or the value does not parse.
  void set(const std::string& key, const std::string& value);

  const std::string& text(const std::string& key) const;
  double real(const std::string& key) const;
  long integer(const std::string& key) const;
  bool boolean(const std::string& key) const;
  std::vector<long> int_list(const std::string& key) const;
  std::vector<double> real_list(const std::string& key) const;

  std::vector<std::uint64_t> seeds() const;

  /// Sorted key/value pairs, for the summary echo.
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  Experiment experiment_;
  std::map<std::string, std::string> values_;
};

/// Parses `key = value` lines; `#` starts a comment; blank lines are skipped.
/// Throws ParseError (with the line number) on a line without '=' and InputError on bad keys or values.
std::vector<std::pair<std::string, std::string>> parse_config_text(std::string_view text);

/// One `key=value` override from the command line.
std::pair<std::string, std::string> parse_override(std::string_view text);

/// Defaults, then the file (if any), then overrides, each later source winning. If the file or
/// an override sets `experiment`, it must agree with `experiment`.
RunConfig load_config(Experiment experiment, const std::filesystem::path* file,
                      const std::vector<std::pair<std::string, std::string>>& overrides);

/// Every key with its default for `experiment` and its documentation, as a config file.
std::string describe_defaults(Experiment experiment);

}  // namespace wgf::harness
