#include "wgflow/harness/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "wgflow/error.hpp"

namespace wgf::harness {

namespace {

using E = Experiment;
using T = ValueType;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

bool parse_real(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, out);
  return r.ec == std::errc() && r.ptr == end;
}

bool parse_long(const std::string& s, long& out) {
  if (s.empty()) return false;
  const char* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, out);
  return r.ec == std::errc() && r.ptr == end;
}

bool parse_bool(const std::string& s, bool& out) {
  if (s == "true" || s == "1" || s == "yes") {
    out = true;
    return true;
  }
  if (s == "false" || s == "0" || s == "no") {
    out = false;
    return true;
  }
  return false;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> parts;
  if (trim(s).empty()) return parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(trim(item));
  return parts;
}

bool valid_value(ValueType type, const std::string& v) {
  switch (type) {
    case T::real: {
      double d;
      return parse_real(v, d);
    }
    case T::integer: {
      long l;
      return parse_long(v, l);
    }
    case T::boolean: {
      bool b;
      return parse_bool(v, b);
    }
    case T::text:
      return true;
    case T::int_list:
      for (const auto& p : split_list(v)) {
        long l;
        if (!parse_long(p, l)) return false;
      }
      return true;
    case T::real_list:
      for (const auto& p : split_list(v)) {
        double d;
        if (!parse_real(p, d)) return false;
      }
      return true;
  }
  return false;
}

std::vector<KeySpec> build_keys() {
  std::vector<KeySpec> k = {
      // general
      {"experiment", T::text, "sample", "experiment family: sample, regress, rl-indirect, rl-direct",
       {{E::regress, "regress"}, {E::rl_indirect, "rl-indirect"}, {E::rl_direct, "rl-direct"}}},
      {"run_id", T::text, "run", "label written to every CSV row", {}},
      {"seeds", T::int_list, "0", "master seeds; each expands into named sub-streams", {}},
      {"iterations", T::integer, "2000", "flow steps (sample, regress), policy iterations (rl-indirect) or epochs (rl-direct)",
       {{E::rl_indirect, "100"}, {E::rl_direct, "200"}}},
      {"log_every", T::integer, "1", "write metrics every this many iterations (the last one is always written)",
       {{E::sample, "10"}, {E::regress, "50"}}},
      {"snapshot_every", T::integer, "0", "sample: dump particles every this many iterations (0 = first and last only)", {}},
      {"checkpoint", T::boolean, "true", "write final network checkpoints (regress, rl-indirect, rl-direct)", {}},
      {"particles", T::integer, "64", "number of particles (parameter particles, or action particles per state in rl-direct)",
       {{E::regress, "16"}, {E::rl_indirect, "16"}, {E::rl_direct, "32"}}},

      // flow
      {"jko.stepsize", T::real, "0.1", "h, weights the transport term of the monitored objective", {}},
      {"jko.w2_scale", T::real, "0.4", "epsilon, scale of the W2 term (0 gives the SVGD / SVPG ablation)", {}},
      {"jko.lambda", T::text, "auto", "entropic lambda: a positive number or auto (median heuristic)", {}},
      {"jko.bandwidth", T::text, "auto", "kernel bandwidth: a positive number or auto (median heuristic)", {}},
      {"jko.inner_steps", T::integer, "1", "optimizer steps per JKO block", {}},
      {"jko.coupling", T::text, "matched", "previous particles entering the W2 term: all or matched", {}},
      {"jko.optimizer", T::text, "adam", "sgd, rmsprop or adam", {{E::sample, "rmsprop"}, {E::regress, "rmsprop"}}},
      {"jko.learning_rate", T::real, "0.05", "particle optimizer learning rate",
       {{E::sample, "0.01"}, {E::regress, "0.001"}, {E::rl_indirect, "0.005"}, {E::rl_direct, "0.0003"}}},

      // sample
      {"target.name", T::text, "gaussian", "sample target: gaussian or mixture1d", {}},
      {"target.mean", T::real_list, "0,0", "gaussian target mean", {}},
      {"target.variance", T::real_list, "1,4", "gaussian target diagonal variance", {}},
      {"target.offset", T::real, "3", "mixture1d: unit-variance modes at -offset and +offset", {}},
      {"init.mean", T::real, "0", "initial particles: every coordinate ~ N(init.mean, init.std^2)", {}},
      {"init.std", T::real, "1", "see init.mean", {}},
      {"sample.method", T::text, "jko", "jko or langevin (unadjusted Langevin oracle)", {}},
      {"langevin.stepsize", T::real, "0.01", "Langevin step size", {}},
      {"metrics.mode_radius", T::real, "1.5", "a particle occupies a mode when within this distance of its mean", {}},

      // regress
      {"data.source", T::text, "sine", "sine (synthetic y = sin x + noise) or csv", {}},
      {"data.path", T::text, "", "csv: path to a numeric CSV with a header row", {}},
      {"data.target_column", T::text, "y", "csv: name of the response column", {}},
      {"data.n", T::integer, "200", "sine: number of points", {}},
      {"data.noise", T::real, "0.1", "sine: noise standard deviation", {}},
      {"data.train_ratio", T::real, "0.9", "fraction of rows used for training", {}},
      {"bnn.hidden", T::integer, "50", "hidden units of the one-hidden-layer network", {}},
      {"bnn.prior_precision", T::real, "1", "precision of the Gaussian weight prior", {}},
      {"bnn.noise_shape", T::real, "1", "Gamma shape of the noise-precision prior", {}},
      {"bnn.noise_rate", T::real, "0.1", "Gamma rate of the noise-precision prior", {}},
      {"bnn.batch_size", T::integer, "100", "minibatch size for the likelihood (0 = full batch)", {}},

      // rl shared
      {"env.name", T::text, "cartpole", "cartpole, cartpole_swingup, double_pendulum or multigoal",
       {{E::rl_direct, "multigoal"}}},
      {"env.horizon", T::integer, "0", "episode horizon (0 = the environment's own)", {}},
      {"gamma", T::real, "0.99", "discount", {}},

      // rl-indirect
      {"indirect.batch_size", T::integer, "5000", "environment steps per iteration, split evenly across particles", {}},
      {"indirect.alpha", T::real, "8", "temperature; the particle target gradient is grad J / alpha", {}},
      {"indirect.estimator", T::text, "reinforce", "reinforce or a2c", {}},
      {"indirect.standardize_returns", T::boolean, "true", "standardize the return signal across the batch", {}},
      {"indirect.per_step_average", T::boolean, "false", "divide each trajectory's contribution by its length", {}},
      {"indirect.hidden", T::int_list, "25,16", "policy hidden layers (tanh)", {}},
      {"indirect.prior_variance", T::real, "0.01", "initial particles ~ N(0, prior_variance)", {}},
      {"indirect.init_log_std", T::real, "0", "initial policy log standard deviation", {}},
      {"indirect.critic_hidden", T::int_list, "32", "a2c critic hidden layers", {}},
      {"indirect.critic_learning_rate", T::real, "0.01", "a2c critic SGD learning rate", {}},
      {"indirect.critic_steps", T::integer, "10", "critic TD passes per iteration", {}},
      {"indirect.eval_episodes", T::integer, "1", "evaluation episodes per particle per iteration", {}},
      {"indirect.eval_deterministic", T::boolean, "true", "evaluate the mean action", {}},

      // rl-direct
      {"direct.variant", T::text, "dp_wgf_v", "dp_wgf (sampling network) or dp_wgf_v (explicit policy and V network)", {}},
      {"direct.hidden", T::int_list, "128,128", "hidden layers of the policy, Q and V networks (ReLU)", {}},
      {"direct.batch_size", T::integer, "64", "replay minibatch size", {}},
      {"direct.tau", T::real, "0.01", "target smoothing coefficient", {}},
      {"direct.reward_scale", T::text, "auto", "reward multiplier; auto uses the per-environment table", {}},
      {"direct.replay_capacity", T::integer, "1000000", "FIFO replay pool size", {}},
      {"direct.noise_dim", T::integer, "0", "sampling network noise size (0 = action dimension)", {}},
      {"direct.components", T::text, "auto", "dp_wgf_v: policy mixture components; auto uses the per-environment table", {}},
      {"direct.value_samples", T::integer, "32", "dp_wgf: proposal draws per soft value estimate", {}},
      {"direct.v_actions", T::integer, "8", "dp_wgf_v: policy draws per state for the V target", {}},
      {"direct.exact_v_target", T::boolean, "false", "dp_wgf_v: log-mean-exp form of the V target", {}},
      {"direct.gradient_steps", T::integer, "1", "updates per environment step", {}},
      {"direct.epoch_steps", T::text, "auto", "environment steps per epoch; auto uses the per-environment table", {}},
      {"direct.eval_episodes", T::integer, "10", "evaluation rollouts per epoch", {}},
      {"direct.snapshot", T::text, "moving_average", "previous-policy snapshot: last or moving_average", {}},
      {"direct.snapshot_tau", T::real, "0.01", "moving_average snapshot coefficient", {}},
  };
  return k;
}

}  // namespace

Experiment parse_experiment(std::string_view name) {
  if (name == "sample") return E::sample;
  if (name == "regress") return E::regress;
  if (name == "rl-indirect") return E::rl_indirect;
  if (name == "rl-direct") return E::rl_direct;
  throw InputError("unknown experiment '" + std::string(name) + "' (expected sample, regress, rl-indirect or rl-direct)");
}

std::string to_string(Experiment e) {
  switch (e) {
    case E::sample: return "sample";
    case E::regress: return "regress";
    case E::rl_indirect: return "rl-indirect";
    case E::rl_direct: return "rl-direct";
  }
  return "sample";
}

const std::vector<KeySpec>& config_keys() {
  static const std::vector<KeySpec> keys = build_keys();
  return keys;
}

const KeySpec* find_key(std::string_view key) {
  for (const auto& k : config_keys())
    if (k.key == key) return &k;
  return nullptr;
}

RunConfig::RunConfig(Experiment experiment) : experiment_(experiment) {
  for (const auto& k : config_keys()) {
    const auto it = k.experiment_defaults.find(experiment);
    values_[k.key] = it == k.experiment_defaults.end() ? k.default_value : it->second;
  }
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const KeySpec* spec = find_key(key);
  if (!spec) throw InputError("config: unknown key '" + key + "'");
  const std::string v = trim(value);
  if (!valid_value(spec->type, v)) throw InputError("config: key '" + key + "' cannot take the value '" + v + "'");
  if (key == "experiment" && parse_experiment(v) != experiment_)
    throw InputError("config: key 'experiment' is '" + v + "' but the command runs " + to_string(experiment_));
  values_[key] = v;
}

const std::string& RunConfig::text(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw InputError("config: unknown key '" + key + "'");
  return it->second;
}

double RunConfig::real(const std::string& key) const {
  double d;
  if (!parse_real(text(key), d)) throw InputError("config: key '" + key + "' is not a number");
  return d;
}

long RunConfig::integer(const std::string& key) const {
  long l;
  if (!parse_long(text(key), l)) throw InputError("config: key '" + key + "' is not an integer");
  return l;
}

bool RunConfig::boolean(const std::string& key) const {
  bool b;
  if (!parse_bool(text(key), b)) throw InputError("config: key '" + key + "' is not a boolean");
  return b;
}

std::vector<long> RunConfig::int_list(const std::string& key) const {
  std::vector<long> out;
  for (const auto& p : split_list(text(key))) {
    long l;
    if (!parse_long(p, l)) throw InputError("config: key '" + key + "' is not an integer list");
    out.push_back(l);
  }
  return out;
}

std::vector<double> RunConfig::real_list(const std::string& key) const {
  std::vector<double> out;
  for (const auto& p : split_list(text(key))) {
    double d;
    if (!parse_real(p, d)) throw InputError("config: key '" + key + "' is not a number list");
    out.push_back(d);
  }
  return out;
}

std::vector<std::uint64_t> RunConfig::seeds() const {
  std::vector<std::uint64_t> out;
  for (long s : int_list("seeds")) {
    if (s < 0) throw InputError("config: seeds must be non-negative");
    out.push_back(static_cast<std::uint64_t>(s));
  }
  if (out.empty()) throw InputError("config: at least one seed is required");
  return out;
}

std::vector<std::pair<std::string, std::string>> parse_config_text(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string t = trim(line);
    if (!t.empty()) {
      const std::size_t eq = t.find('=');
      if (eq == std::string::npos) throw ParseError("config line " + std::to_string(line_no) + ": expected key = value", line_no, 0);
      const std::string key = trim(std::string_view(t).substr(0, eq));
      if (key.empty()) throw ParseError("config line " + std::to_string(line_no) + ": empty key", line_no, 1);
      out.emplace_back(key, trim(std::string_view(t).substr(eq + 1)));
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return out;
}

std::pair<std::string, std::string> parse_override(std::string_view text) {
  const std::size_t eq = text.find('=');
  if (eq == std::string_view::npos) throw InputError("override '" + std::string(text) + "' is not key=value");
  std::string key = trim(text.substr(0, eq));
  if (key.empty()) throw InputError("override '" + std::string(text) + "' has an empty key");
  return {key, trim(text.substr(eq + 1))};
}

RunConfig load_config(Experiment experiment, const std::filesystem::path* file,
                      const std::vector<std::pair<std::string, std::string>>& overrides) {
  RunConfig cfg(experiment);
  if (file) {
    std::ifstream in(*file);
    if (!in) throw InputError("config: cannot open " + file->string());
    std::stringstream ss;
    ss << in.rdbuf();
    for (const auto& [k, v] : parse_config_text(ss.str())) cfg.set(k, v);
  }
  for (const auto& [k, v] : overrides) cfg.set(k, v);
  return cfg;
}

std::string describe_defaults(Experiment experiment) {
  const RunConfig cfg(experiment);
  std::ostringstream out;
  for (const auto& k : config_keys()) {
    out << "# " << k.doc << "\n" << k.key << " = " << cfg.text(k.key) << "\n";
  }
  return out.str();
}

}  // namespace wgf::harness
