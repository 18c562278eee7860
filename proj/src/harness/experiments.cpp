#include "wgflow/harness/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "wgflow/error.hpp"
#include "wgflow/nn/checkpoint.hpp"
#include "wgflow/rng.hpp"
#include "wgflow/targets/bnn.hpp"
#include "wgflow/targets/dataset.hpp"
#include "wgflow/targets/mixture.hpp"

namespace wgf::harness {

namespace {

std::optional<double> auto_or_positive(const RunConfig& cfg, const std::string& key) {
  const std::string& v = cfg.text(key);
  if (v == "auto") return std::nullopt;
  const double d = cfg.real(key);
  if (!(d > 0.0)) throw InputError("config: key '" + key + "' must be auto or a positive number");
  return d;
}

int positive_int(const RunConfig& cfg, const std::string& key, long min = 1) {
  const long v = cfg.integer(key);
  if (v < min) throw InputError("config: key '" + key + "' must be >= " + std::to_string(min));
  return static_cast<int>(v);
}

std::vector<int> int_vector(const RunConfig& cfg, const std::string& key) {
  std::vector<int> out;
  for (long v : cfg.int_list(key)) {
    if (v < 1) throw InputError("config: key '" + key + "' must list positive sizes");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

bool should_log(long iteration, long last, long every) { return iteration == last || iteration % every == 0; }

// sample ------------------------------------------------------------------

targets::GaussianMixture sample_target(const RunConfig& cfg) {
  const std::string& name = cfg.text("target.name");
  if (name == "mixture1d") return targets::GaussianMixture::two_mode_1d(cfg.real("target.offset"));
  if (name == "gaussian") {
    const auto mean = cfg.real_list("target.mean");
    const auto var = cfg.real_list("target.variance");
    if (mean.empty() || mean.size() != var.size())
      throw InputError("config: target.mean and target.variance must have the same non-zero length");
    return targets::GaussianMixture::gaussian(Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size())),
                                              Eigen::Map<const Eigen::VectorXd>(var.data(), static_cast<Eigen::Index>(var.size())));
  }
  throw InputError("config: target.name must be gaussian or mixture1d");
}

std::map<std::string, double> sample_metrics(const targets::GaussianMixture& gm, const Eigen::MatrixXd& pts,
                                             double mode_radius) {
  std::map<std::string, double> m;
  const Eigen::Index d = pts.rows();
  const double n = static_cast<double>(pts.cols());
  Eigen::VectorXd target_mean = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd second = Eigen::VectorXd::Zero(d);
  for (std::size_t k = 0; k < gm.weights.size(); ++k) {
    target_mean += gm.weights[k] * gm.means[k];
    second += gm.weights[k] * (gm.variances[k] + gm.means[k].cwiseAbs2());
  }
  const Eigen::VectorXd target_var = second - target_mean.cwiseAbs2();
  const Eigen::VectorXd mean = pts.rowwise().mean();
  const Eigen::VectorXd var = (pts.colwise() - mean).cwiseAbs2().rowwise().sum() / n;
  m["mean_error"] = (mean - target_mean).norm();
  m["var_rel_error"] = ((var - target_var).cwiseAbs().array() / target_var.array()).maxCoeff();
  for (Eigen::Index i = 0; i < d; ++i) {
    m["mean_" + std::to_string(i)] = mean[i];
    m["var_" + std::to_string(i)] = var[i];
  }
  if (gm.weights.size() > 1) {
    std::vector<int> counts(gm.weights.size(), 0);
    for (Eigen::Index j = 0; j < pts.cols(); ++j) {
      std::size_t best = 0;
      double best_dist = (pts.col(j) - gm.means[0]).norm();
      for (std::size_t k = 1; k < gm.means.size(); ++k) {
        const double dist = (pts.col(j) - gm.means[k]).norm();
        if (dist < best_dist) {
          best = k;
          best_dist = dist;
        }
      }
      if (best_dist <= mode_radius) ++counts[best];
    }
    for (std::size_t k = 0; k < counts.size(); ++k) m["mode_occupancy_" + std::to_string(k)] = counts[k] / n;
  }
  return m;
}

std::map<std::string, double> run_sample(const RunConfig& cfg, std::uint64_t seed, const MetricSink& sink,
                                         const std::filesystem::path& out_dir) {
  const targets::GaussianMixture gm = sample_target(cfg);
  gm.validate();
  const int m = positive_int(cfg, "particles");
  const long iterations = positive_int(cfg, "iterations", 0);
  const long log_every = positive_int(cfg, "log_every");
  const long snapshot_every = positive_int(cfg, "snapshot_every", 0);
  const double radius = cfg.real("metrics.mode_radius");
  const std::string& method = cfg.text("sample.method");
  if (method != "jko" && method != "langevin") throw InputError("config: sample.method must be jko or langevin");

  Rng init = Rng::stream(seed, "init");
  Rng noise = Rng::stream(seed, "langevin");
  Eigen::MatrixXd pts = cfg.real("init.std") * init.normal_matrix(gm.dim(), m);
  pts.array() += cfg.real("init.mean");
  flow::ParticleEnsemble current(pts);
  flow::ParticleEnsemble previous = current;
  const flow::ScoreFn score = targets::mixture_score(gm);
  const flow::JkoConfig jcfg = jko_config(cfg);
  const double langevin_step = cfg.real("langevin.stepsize");
  nn::OptimizerState opt(jcfg.optimizer);

  std::filesystem::path snap_dir;
  if (!out_dir.empty()) {
    snap_dir = out_dir / "snapshots";
    std::filesystem::create_directories(snap_dir);
  }
  const auto snapshot = [&](long it) {
    if (snap_dir.empty()) return;
    const bool due = it == 0 || it == iterations || (snapshot_every > 0 && it % snapshot_every == 0);
    if (due) write_particle_snapshot(snap_dir / ("seed" + std::to_string(seed) + "_iter" + std::to_string(it) + ".txt"),
                                     current.points);
  };

  std::map<std::string, double> last;
  flow::JkoStepInfo info;
  const auto log = [&](long it) {
    last = sample_metrics(gm, current.points, radius);
    if (method == "jko" && it > 0) {
      last["bandwidth"] = info.bandwidth;
      last["lambda"] = info.lambda;
    }
    for (const auto& [k, v] : last) sink(it, 0, k, v);
  };
  log(0);
  snapshot(0);
  for (long it = 1; it <= iterations; ++it) {
    if (method == "jko") {
      flow::ParticleEnsemble next = flow::jko_step(current, previous, score, jcfg, opt, &info);
      previous = std::move(current);
      current = std::move(next);
    } else {
      current = flow::langevin_step(current, score, langevin_step, noise);
    }
    if (should_log(it, iterations, log_every)) log(it);
    snapshot(it);
  }
  return last;
}

// regress -----------------------------------------------------------------

std::map<std::string, double> run_regress(const RunConfig& cfg, std::uint64_t seed, const MetricSink& sink,
                                          const std::filesystem::path& out_dir) {
  const double ratio = cfg.real("data.train_ratio");
  targets::RegressionDataset data;
  const std::string& source = cfg.text("data.source");
  if (source == "sine") {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    targets::synthetic_sine(positive_int(cfg, "data.n"), cfg.real("data.noise"), seed, x, y);
    data = targets::make_dataset(x, y, ratio, seed);
  } else if (source == "csv") {
    data = targets::load_csv_dataset(cfg.text("data.path"), cfg.text("data.target_column"), ratio, seed);
  } else {
    throw InputError("config: data.source must be sine or csv");
  }

  targets::BnnPosteriorSpec spec;
  spec.input_dim = data.feature_dim();
  spec.hidden = positive_int(cfg, "bnn.hidden");
  spec.weight_prior_precision = cfg.real("bnn.prior_precision");
  spec.noise_shape = cfg.real("bnn.noise_shape");
  spec.noise_rate = cfg.real("bnn.noise_rate");

  const int m = positive_int(cfg, "particles");
  const long iterations = positive_int(cfg, "iterations", 0);
  const long log_every = positive_int(cfg, "log_every");
  const long n_train = data.x_train.cols();
  const long batch_cfg = positive_int(cfg, "bnn.batch_size", 0);
  const long batch = batch_cfg == 0 ? n_train : std::min(batch_cfg, n_train);

  Rng init = Rng::stream(seed, "init");
  Rng mb = Rng::stream(seed, "minibatch");
  Eigen::MatrixXd pts(spec.particle_size(), m);
  for (int i = 0; i < m; ++i) pts.col(i) = targets::bnn_initial_particle(spec, init);
  flow::ParticleEnsemble current(pts);
  flow::ParticleEnsemble previous = current;
  const flow::JkoConfig jcfg = jko_config(cfg);
  nn::OptimizerState opt(jcfg.optimizer);

  std::vector<long> order(static_cast<std::size_t>(n_train));
  std::iota(order.begin(), order.end(), 0L);
  long cursor = n_train;
  Eigen::MatrixXd xb(data.x_train.rows(), batch);
  Eigen::VectorXd yb(batch);
  double last_logp = 0.0;
  const flow::ScoreFn score = [&](const Eigen::MatrixXd& p) {
    Eigen::MatrixXd g(p.rows(), p.cols());
    double total = 0.0;
    for (Eigen::Index i = 0; i < p.cols(); ++i) {
      const auto r = targets::bnn_logp_grad(spec, p.col(i), xb, yb, static_cast<double>(n_train));
      g.col(i) = r.grad;
      total += r.logp;
    }
    last_logp = total / static_cast<double>(p.cols());
    return g;
  };

  std::map<std::string, double> last;
  const auto particles_list = [&] {
    std::vector<Eigen::VectorXd> v;
    for (Eigen::Index i = 0; i < current.count(); ++i) v.emplace_back(current.point(i));
    return v;
  };
  const auto log = [&](long it) {
    const targets::RegressionMetrics rm = targets::regression_metrics(particles_list(), spec, data);
    last = {{"test_rmse", rm.rmse}, {"test_ll", rm.log_likelihood}};
    if (it > 0) last["train_logp"] = last_logp;
    for (const auto& [k, v] : last) sink(it, 0, k, v);
  };
  log(0);
  for (long it = 1; it <= iterations; ++it) {
    for (long b = 0; b < batch; ++b) {
      if (cursor >= n_train) {
        std::shuffle(order.begin(), order.end(), mb.engine());
        cursor = 0;
      }
      const long idx = order[static_cast<std::size_t>(cursor++)];
      xb.col(b) = data.x_train.col(idx);
      yb[b] = data.y_train[idx];
    }
    flow::ParticleEnsemble next = flow::jko_step(current, previous, score, jcfg, opt);
    previous = std::move(current);
    current = std::move(next);
    if (should_log(it, iterations, log_every)) log(it);
  }
  if (!out_dir.empty() && cfg.boolean("checkpoint")) {
    std::filesystem::create_directories(out_dir / "checkpoints");
    nn::NamedTensor t{"particles", current.points.cols(), current.points.rows(), {}};
    for (Eigen::Index i = 0; i < current.points.cols(); ++i)
      for (Eigen::Index r = 0; r < current.points.rows(); ++r) t.values.push_back(current.points(r, i));
    nn::write_checkpoint(out_dir / "checkpoints" / ("seed" + std::to_string(seed) + ".ckpt"), {t});
  }
  return last;
}

// rl ----------------------------------------------------------------------

std::map<std::string, double> run_rl_indirect(const RunConfig& cfg, std::uint64_t seed, const MetricSink& sink,
                                              const std::filesystem::path& out_dir) {
  const envs::EnvSpec env = env_spec(cfg);
  const rl::IndirectConfig icfg = indirect_config(cfg);
  icfg.validate();
  const long iterations = positive_int(cfg, "iterations", 0);
  const long log_every = positive_int(cfg, "log_every");
  Rng init = Rng::stream(seed, "policy-init");
  Rng rollout = Rng::stream(seed, "rollout");
  Rng critic_init = Rng::stream(seed, "critic-init");
  rl::PolicyParticleSet set = rl::make_policy_particles(env, icfg, init);
  rl::CriticParams critic = rl::make_critic(env.obs_dim, icfg.critic_hidden, icfg.critic_learning_rate, icfg.gamma, critic_init);

  std::map<std::string, double> last;
  long env_steps = 0;
  for (long it = 1; it <= iterations; ++it) {
    const rl::IndirectStats st = rl::ip_wgf_iteration(set, env, &critic, icfg, rollout);
    env_steps += st.env_steps;
    if (!should_log(it, iterations, log_every)) continue;
    last = {{"mean_return", st.mean_return}, {"std_return", st.std_return}, {"best_return", st.best_return},
            {"train_return", st.train_return}, {"bandwidth", st.bandwidth}, {"lambda", st.lambda}};
    if (icfg.estimator == rl::Estimator::a2c) last["critic_loss"] = st.critic_loss;
    for (const auto& [k, v] : last) sink(it, env_steps, k, v);
  }
  if (!out_dir.empty() && cfg.boolean("checkpoint")) {
    std::filesystem::create_directories(out_dir / "checkpoints");
    std::vector<nn::NamedTensor> tensors;
    for (Eigen::Index i = 0; i < set.current.count(); ++i)
      tensors.push_back(nn::vector_tensor("particle" + std::to_string(i), set.current.point(i)));
    nn::write_checkpoint(out_dir / "checkpoints" / ("seed" + std::to_string(seed) + ".ckpt"), tensors);
  }
  return last;
}

std::map<std::string, double> run_rl_direct(const RunConfig& cfg, std::uint64_t seed, const MetricSink& sink,
                                            const std::filesystem::path& out_dir) {
  const envs::EnvSpec env = env_spec(cfg);
  const rl::DirectConfig dcfg = direct_config(cfg, env);
  const long epochs = positive_int(cfg, "iterations", 0);
  const long log_every = positive_int(cfg, "log_every");
  rl::DirectLearner learner = rl::make_direct_learner(env, dcfg, seed);
  std::map<std::string, double> last;
  for (long ep = 1; ep <= epochs; ++ep) {
    const bool log = should_log(ep, epochs, log_every);
    learner.cfg.eval_episodes = log ? dcfg.eval_episodes : 0;
    const rl::DirectStats st = rl::direct_epoch(learner);
    if (!log) continue;
    last = {{"train_return", st.train_return}, {"q_loss", st.q_loss}, {"bandwidth", st.bandwidth}, {"lambda", st.lambda}};
    if (dcfg.eval_episodes > 0) {
      last["mean_return"] = st.mean_return;
      last["std_return"] = st.std_return;
    }
    if (dcfg.variant == rl::DirectVariant::dp_wgf_v) last["v_loss"] = st.v_loss;
    for (std::size_t g = 0; g < st.goal_counts.size(); ++g)
      last["goal_" + std::to_string(g)] = static_cast<double>(st.goal_counts[g]);
    for (const auto& [k, v] : last) sink(ep, st.env_steps, k, v);
  }
  if (!out_dir.empty() && cfg.boolean("checkpoint")) {
    std::filesystem::create_directories(out_dir / "checkpoints");
    std::vector<nn::NamedTensor> tensors = nn::to_tensors(learner.actor.net, "actor");
    const auto q = nn::to_tensors(learner.q, "q");
    tensors.insert(tensors.end(), q.begin(), q.end());
    if (dcfg.variant == rl::DirectVariant::dp_wgf_v) {
      const auto v = nn::to_tensors(learner.v, "v");
      tensors.insert(tensors.end(), v.begin(), v.end());
    }
    nn::write_checkpoint(out_dir / "checkpoints" / ("seed" + std::to_string(seed) + ".ckpt"), tensors);
  }
  return last;
}

struct RowLimit {
  long limit;
  std::atomic<long> written{0};
  void tick() {
    if (limit >= 0 && ++written > limit) throw std::runtime_error("run interrupted by the row-limit test hook");
  }
};

SeedOutcome run_one(const RunConfig& cfg, std::uint64_t seed, CsvLog& log, const std::filesystem::path& out_dir,
                    RowLimit& limit) {
  SeedOutcome o;
  o.seed = seed;
  const std::string run_id = cfg.text("run_id");
  const MetricSink sink = [&](long it, long steps, const std::string& metric, double value) {
    limit.tick();
    log.write({run_id, seed, it, steps, metric, value});
  };
  try {
    o.final_metrics = run_seed(cfg, seed, sink, out_dir);
    o.ok = true;
  } catch (const std::runtime_error& e) {
    if (limit.limit >= 0 && limit.written > limit.limit) throw;
    o.error = e.what();
  } catch (const std::logic_error& e) {
    o.error = e.what();
  }
  return o;
}

}  // namespace

flow::JkoConfig jko_config(const RunConfig& cfg) {
  flow::JkoConfig j;
  j.stepsize = cfg.real("jko.stepsize");
  j.w2_scale = cfg.real("jko.w2_scale");
  j.entropic_lambda = auto_or_positive(cfg, "jko.lambda");
  j.kernel_bandwidth = auto_or_positive(cfg, "jko.bandwidth");
  j.inner_steps = positive_int(cfg, "jko.inner_steps");
  j.coupling = flow::parse_w2_coupling(cfg.text("jko.coupling"));
  j.optimizer.kind = nn::parse_optimizer_kind(cfg.text("jko.optimizer"));
  j.optimizer.learning_rate = cfg.real("jko.learning_rate");
  j.validate();
  return j;
}

envs::EnvSpec env_spec(const RunConfig& cfg) {
  envs::EnvSpec env = envs::make_env_spec(cfg.text("env.name"));
  const long h = cfg.integer("env.horizon");
  if (h < 0) throw InputError("config: env.horizon must be >= 0");
  if (h > 0) env.horizon = static_cast<int>(h);
  env.validate();
  return env;
}

rl::IndirectConfig indirect_config(const RunConfig& cfg) {
  rl::IndirectConfig c;
  const envs::EnvSpec env = env_spec(cfg);
  c.particles = positive_int(cfg, "particles");
  c.batch_size = positive_int(cfg, "indirect.batch_size");
  c.alpha = cfg.real("indirect.alpha");
  c.gamma = cfg.real("gamma");
  c.estimator = rl::parse_estimator(cfg.text("indirect.estimator"));
  c.standardize_returns = cfg.boolean("indirect.standardize_returns");
  c.per_step_average = cfg.boolean("indirect.per_step_average");
  c.hidden = int_vector(cfg, "indirect.hidden");
  c.prior_variance = cfg.real("indirect.prior_variance");
  c.init_log_std = cfg.real("indirect.init_log_std");
  c.horizon = env.horizon;
  c.critic_hidden = int_vector(cfg, "indirect.critic_hidden");
  c.critic_learning_rate = cfg.real("indirect.critic_learning_rate");
  c.critic_steps = positive_int(cfg, "indirect.critic_steps", 0);
  c.eval_episodes = positive_int(cfg, "indirect.eval_episodes", 0);
  c.eval_deterministic = cfg.boolean("indirect.eval_deterministic");
  c.jko = jko_config(cfg);
  c.validate();
  return c;
}

double default_reward_scale(const std::string& env_name) { return env_name == "multigoal" ? 1.0 : 1.0; }

int default_epoch_steps(const std::string& env_name) { return env_name == "multigoal" ? 100 : 1000; }

int default_components(const std::string& env_name) { return env_name == "multigoal" ? 4 : 1; }

rl::DirectConfig direct_config(const RunConfig& cfg, const envs::EnvSpec& env) {
  rl::DirectConfig c;
  c.variant = rl::parse_direct_variant(cfg.text("direct.variant"));
  c.hidden = int_vector(cfg, "direct.hidden");
  c.batch_size = positive_int(cfg, "direct.batch_size");
  c.learning_rate = cfg.real("jko.learning_rate");
  c.gamma = cfg.real("gamma");
  c.tau = cfg.real("direct.tau");
  c.reward_scale = cfg.text("direct.reward_scale") == "auto" ? default_reward_scale(env.name) : cfg.real("direct.reward_scale");
  c.replay_capacity = static_cast<std::size_t>(positive_int(cfg, "direct.replay_capacity"));
  c.particles = positive_int(cfg, "particles");
  c.noise_dim = positive_int(cfg, "direct.noise_dim", 0);
  c.components = cfg.text("direct.components") == "auto" ? default_components(env.name)
                                                           : positive_int(cfg, "direct.components");
  c.value_samples = positive_int(cfg, "direct.value_samples");
  c.v_actions = positive_int(cfg, "direct.v_actions");
  c.exact_v_target = cfg.boolean("direct.exact_v_target");
  c.gradient_steps = positive_int(cfg, "direct.gradient_steps", 0);
  c.epoch_steps = cfg.text("direct.epoch_steps") == "auto" ? default_epoch_steps(env.name)
                                                             : positive_int(cfg, "direct.epoch_steps");
  c.horizon = env.horizon;
  c.eval_episodes = positive_int(cfg, "direct.eval_episodes", 0);
  c.snapshot = rl::parse_snapshot_strategy(cfg.text("direct.snapshot"));
  c.snapshot_tau = cfg.real("direct.snapshot_tau");
  c.jko = jko_config(cfg);
  c.validate();
  return c;
}

std::map<std::string, double> run_seed(const RunConfig& cfg, std::uint64_t seed, const MetricSink& sink,
                                       const std::filesystem::path& out_dir) {
  switch (cfg.experiment()) {
    case Experiment::sample: return run_sample(cfg, seed, sink, out_dir);
    case Experiment::regress: return run_regress(cfg, seed, sink, out_dir);
    case Experiment::rl_indirect: return run_rl_indirect(cfg, seed, sink, out_dir);
    case Experiment::rl_direct: return run_rl_direct(cfg, seed, sink, out_dir);
  }
  throw InputError("unknown experiment");
}

RunSummary run_experiment(const RunConfig& cfg, const std::filesystem::path& out_dir, const RunOptions& options) {
  if (options.parallel_seeds < 1) throw InputError("parallel seeds must be >= 1");
  std::filesystem::create_directories(out_dir);
  const auto seeds = cfg.seeds();
  const auto t0 = std::chrono::steady_clock::now();
  RunSummary summary;
  summary.experiment = to_string(cfg.experiment());
  summary.run_id = cfg.text("run_id");
  RowLimit limit{options.abort_after_rows};

  if (options.parallel_seeds == 1 || seeds.size() == 1) {
    CsvLog log(out_dir / "run.csv");
    for (std::uint64_t s : seeds) summary.seeds.push_back(run_one(cfg, s, log, out_dir, limit));
  } else {
    std::vector<SeedOutcome> outcomes(seeds.size());
    std::vector<std::filesystem::path> parts(seeds.size());
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr fatal;
    const auto worker = [&] {
      for (;;) {
        const std::size_t i = next++;
        if (i >= seeds.size()) return;
        try {
          parts[i] = out_dir / ("run.seed" + std::to_string(seeds[i]) + ".csv.part");
          CsvLog log(parts[i], false);
          outcomes[i] = run_one(cfg, seeds[i], log, out_dir, limit);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!fatal) fatal = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    const int n = std::min<int>(options.parallel_seeds, static_cast<int>(seeds.size()));
    for (int w = 0; w < n; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (fatal) std::rethrow_exception(fatal);
    {
      std::ofstream merged(out_dir / "run.csv");
      merged << kCsvHeader << '\n';
      for (const auto& p : parts) {
        std::ifstream in(p);
        merged << in.rdbuf();
      }
    }
    for (const auto& p : parts) std::filesystem::remove(p);
    summary.seeds = std::move(outcomes);
  }
  summary.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_summary(out_dir / "summary.json", cfg, summary);
  return summary;
}

std::vector<RunSummary> run_sweep(const RunConfig& cfg, const std::string& key, const std::vector<std::string>& values,
                                  const std::filesystem::path& out_dir, const RunOptions& options) {
  if (!find_key(key)) throw InputError("sweep: unknown key '" + key + "'");
  if (values.empty()) throw InputError("sweep: no values given");
  std::vector<RunSummary> out;
  for (const auto& v : values) {
    RunConfig c = cfg;
    c.set(key, v);
    out.push_back(run_experiment(c, out_dir / (key + "=" + v), options));
  }
  return out;
}

void write_particle_snapshot(const std::filesystem::path& path, const Eigen::MatrixXd& points) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open " + path.string() + " for writing");
  for (Eigen::Index j = 0; j < points.cols(); ++j) {
    for (Eigen::Index i = 0; i < points.rows(); ++i) out << (i ? " " : "") << format_value(points(i, j));
    out << '\n';
  }
}

Eigen::MatrixXd read_particle_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t row_no = 0;
  while (std::getline(in, line)) {
    ++row_no;
    std::istringstream ss(line);
    std::vector<double> r;
    std::string tok;
    std::size_t col = 0;
    while (ss >> tok) {
      ++col;
      double v;
      const char* end = tok.data() + tok.size();
      const auto res = std::from_chars(tok.data(), end, v);
      if (res.ec != std::errc() || res.ptr != end) throw ParseError("snapshot: non-numeric value '" + tok + "'", row_no, col);
      r.push_back(v);
    }
    if (r.empty()) continue;
    if (!rows.empty() && r.size() != rows.front().size())
      throw ParseError("snapshot: row has " + std::to_string(r.size()) + " values, expected " + std::to_string(rows.front().size()),
                       row_no, 0);
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw ParseError("snapshot: no particles", 0, 0);
  Eigen::MatrixXd pts(static_cast<Eigen::Index>(rows.front().size()), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t j = 0; j < rows.size(); ++j)
    for (std::size_t i = 0; i < rows[j].size(); ++i) pts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[j][i];
  return pts;
}

}  // namespace wgf::harness
