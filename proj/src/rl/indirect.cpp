#include "wgflow/rl/indirect.hpp"

#include <cmath>
#include <numeric>

#include "wgflow/error.hpp"

namespace wgf::rl {
namespace {

struct StepBatch {
  Eigen::MatrixXd states, actions, next_states;
  Eigen::VectorXd rewards, not_done;
};

StepBatch stack(const std::vector<envs::Trajectory>& trajectories) {
  Eigen::Index n = 0;
  for (const auto& t : trajectories) n += static_cast<Eigen::Index>(t.steps.size());
  if (n == 0) throw InputError("empty trajectory batch");
  const auto& first = trajectories.front().steps.empty() ? trajectories.back().steps.front() : trajectories.front().steps.front();
  StepBatch b;
  b.states.resize(first.state.size(), n);
  b.next_states.resize(first.state.size(), n);
  b.actions.resize(first.action.size(), n);
  b.rewards.resize(n);
  b.not_done.resize(n);
  Eigen::Index k = 0;
  for (const auto& t : trajectories)
    for (const auto& tr : t.steps) {
      b.states.col(k) = tr.state;
      b.next_states.col(k) = tr.next_state;
      b.actions.col(k) = tr.action;
      b.rewards[k] = tr.reward;
      b.not_done[k] = tr.done ? 0.0 : 1.0;
      ++k;
    }
  return b;
}

void check_nonempty(const std::vector<envs::Trajectory>& trajectories) {
  if (trajectories.empty()) throw InputError("policy gradient: no trajectories");
  for (const auto& t : trajectories)
    if (t.steps.empty()) throw InputError("policy gradient: empty trajectory");
}

void standardize_in_place(Eigen::VectorXd& v) {
  const double mean = v.mean();
  const double sd = std::sqrt((v.array() - mean).square().mean());
  v = (v.array() - mean) / std::max(sd, 1e-8);
}

// Per-step weights (1/T) gamma^(t-1) * signal_t, trajectories averaged.
Eigen::VectorXd step_weights(const std::vector<envs::Trajectory>& trajectories, const Eigen::VectorXd& signal,
                             double gamma, bool per_step) {
  Eigen::VectorXd w(signal.size());
  Eigen::Index k = 0;
  const double n_traj = static_cast<double>(trajectories.size());
  for (const auto& t : trajectories) {
    const double inv_len = per_step ? 1.0 / static_cast<double>(t.steps.size()) : 1.0;
    double disc = 1.0;
    for (std::size_t s = 0; s < t.steps.size(); ++s, ++k) {
      w[k] = inv_len * disc * signal[k] / n_traj;
      disc *= gamma;
    }
  }
  return w;
}

}  // namespace

CriticParams make_critic(int obs_dim, const std::vector<int>& hidden, double learning_rate, double gamma, Rng& rng) {
  std::vector<int> sizes{obs_dim};
  std::vector<nn::Activation> acts;
  for (int h : hidden) {
    sizes.push_back(h);
    acts.push_back(nn::Activation::tanh);
  }
  sizes.push_back(1);
  acts.push_back(nn::Activation::identity);
  CriticParams c;
  c.value = nn::MlpParams::glorot(sizes, acts, rng);
  c.learning_rate = learning_rate;
  c.gamma = gamma;
  return c;
}

Eigen::VectorXd reinforce_grad(const GaussianPolicyLayout& layout, const Eigen::Ref<const Eigen::VectorXd>& particle,
                               const std::vector<envs::Trajectory>& trajectories, double gamma, bool standardize,
                               bool per_step) {
  check_nonempty(trajectories);
  const StepBatch b = stack(trajectories);
  Eigen::VectorXd q(b.rewards.size());
  Eigen::Index end = 0;
  for (const auto& t : trajectories) {
    end += static_cast<Eigen::Index>(t.steps.size());
    double acc = 0.0;
    for (Eigen::Index k = end - 1; k >= end - static_cast<Eigen::Index>(t.steps.size()); --k) {
      acc = b.rewards[k] + gamma * acc;
      q[k] = acc;
    }
  }
  if (standardize) standardize_in_place(q);
  return weighted_log_prob_grad(layout, particle, b.states, b.actions, step_weights(trajectories, q, gamma, per_step));
}

Eigen::VectorXd a2c_grad(const GaussianPolicyLayout& layout, const Eigen::Ref<const Eigen::VectorXd>& particle,
                         const std::vector<envs::Trajectory>& trajectories, const CriticParams& critic,
                         bool standardize, bool per_step) {
  check_nonempty(trajectories);
  if (critic.value.input_dim() != layout.obs_dim()) throw InputError("a2c_grad: critic input dimension mismatch");
  const StepBatch b = stack(trajectories);
  const Eigen::VectorXd v = nn::mlp_predict(critic.value, b.states).row(0).transpose();
  const Eigen::VectorXd v_next = nn::mlp_predict(critic.value, b.next_states).row(0).transpose();
  Eigen::VectorXd adv = b.rewards + critic.gamma * b.not_done.cwiseProduct(v_next) - v;
  if (standardize) standardize_in_place(adv);
  return weighted_log_prob_grad(layout, particle, b.states, b.actions, step_weights(trajectories, adv, critic.gamma, per_step));
}

double critic_td_loss(const CriticParams& critic, const std::vector<envs::Trajectory>& trajectories) {
  const StepBatch b = stack(trajectories);
  const Eigen::VectorXd v = nn::mlp_predict(critic.value, b.states).row(0).transpose();
  const Eigen::VectorXd v_next = nn::mlp_predict(critic.value, b.next_states).row(0).transpose();
  const Eigen::VectorXd y = b.rewards + critic.gamma * b.not_done.cwiseProduct(v_next);
  return 0.5 * (v - y).squaredNorm() / static_cast<double>(v.size());
}

CriticParams critic_td_update(const CriticParams& critic, const std::vector<envs::Trajectory>& trajectories) {
  const StepBatch b = stack(trajectories);
  const Eigen::VectorXd v_next = nn::mlp_predict(critic.value, b.next_states).row(0).transpose();
  const Eigen::VectorXd y = b.rewards + critic.gamma * b.not_done.cwiseProduct(v_next);
  const nn::MlpForward fwd = nn::mlp_forward(critic.value, b.states);
  const Eigen::MatrixXd dout = (fwd.output.row(0) - y.transpose()) / static_cast<double>(y.size());
  const Eigen::VectorXd grad = nn::mlp_backward(critic.value, fwd.cache, dout).params;
  CriticParams next = critic;
  next.value.flat() -= critic.learning_rate * grad;
  return next;
}

Estimator parse_estimator(std::string_view name) {
  if (name == "reinforce") return Estimator::reinforce;
  if (name == "a2c") return Estimator::a2c;
  throw InputError("unknown estimator '" + std::string(name) + "' (expected reinforce or a2c)");
}

std::string to_string(Estimator e) { return e == Estimator::reinforce ? "reinforce" : "a2c"; }

IndirectConfig::IndirectConfig() {
  jko.stepsize = 0.1;
  jko.w2_scale = 0.4;
  jko.optimizer.kind = nn::OptimizerKind::adam;
  jko.optimizer.learning_rate = 5e-3;
}

void IndirectConfig::validate() const {
  if (particles < 1) throw InputError("indirect: particles must be >= 1");
  if (batch_size < particles) throw InputError("indirect: batch_size must be >= particles");
  if (!(alpha > 0.0)) throw InputError("indirect: alpha must be positive");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw InputError("indirect: gamma must be in [0, 1]");
  if (horizon < 1) throw InputError("indirect: horizon must be >= 1");
  if (critic_steps < 0) throw InputError("indirect: critic_steps must be >= 0");
  if (eval_episodes < 0) throw InputError("indirect: eval_episodes must be >= 0");
  jko.validate();
}

PolicyParticleSet make_policy_particles(const envs::EnvSpec& env, const IndirectConfig& cfg, Rng& rng) {
  PolicyParticleSet set;
  set.layout = GaussianPolicyLayout::make(env.obs_dim, cfg.hidden, env.action_dim);
  Eigen::MatrixXd pts(set.layout.particle_size(), cfg.particles);
  for (int i = 0; i < cfg.particles; ++i)
    pts.col(i) = gaussian_policy_init(set.layout, cfg.prior_variance, cfg.init_log_std, rng);
  set.current = flow::ParticleEnsemble(pts);
  set.previous = set.current;
  set.alpha = cfg.alpha;
  set.optimizer = nn::OptimizerState(cfg.jko.optimizer);
  return set;
}

std::vector<envs::Trajectory> collect_steps(const envs::EnvSpec& env, const GaussianPolicyLayout& layout,
                                            const Eigen::Ref<const Eigen::VectorXd>& particle, long steps,
                                            int horizon, Rng& rng) {
  const Eigen::VectorXd p = particle;
  const nn::MlpParams net = layout.network(p);
  const Eigen::ArrayXd std_dev = p.tail(layout.action_dim()).array().exp();
  const envs::Policy policy = [&](const Eigen::VectorXd& s, Rng& r) -> Eigen::VectorXd {
    const Eigen::VectorXd mean = nn::mlp_predict(net, s).col(0);
    return mean + (std_dev * r.normal_vector(layout.action_dim()).array()).matrix();
  };
  std::vector<envs::Trajectory> out;
  long left = steps;
  while (left > 0) {
    const int h = static_cast<int>(std::min<long>(left, horizon));
    out.push_back(envs::rollout(env, policy, h, rng));
    left -= static_cast<long>(out.back().steps.size());
  }
  return out;
}

Eigen::MatrixXd policy_scores(const envs::EnvSpec& env, const GaussianPolicyLayout& layout,
                              const Eigen::Ref<const Eigen::MatrixXd>& particles, const CriticParams* critic,
                              const IndirectConfig& cfg, Rng& rng, std::vector<std::vector<envs::Trajectory>>* data) {
  const Eigen::Index m = particles.cols();
  if (cfg.estimator == Estimator::a2c && critic == nullptr) throw InputError("policy_scores: a2c needs a critic");
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(m));
  for (auto& s : seeds) s = rng.next_u64();
  const long budget = cfg.batch_size / m;

  Eigen::MatrixXd scores(particles.rows(), m);
  if (data) data->assign(static_cast<std::size_t>(m), {});
  for (Eigen::Index i = 0; i < m; ++i) {
    Rng prng(seeds[static_cast<std::size_t>(i)]);
    auto trajs = collect_steps(env, layout, particles.col(i), budget, cfg.horizon, prng);
    const Eigen::VectorXd g = cfg.estimator == Estimator::reinforce
                                  ? reinforce_grad(layout, particles.col(i), trajs, cfg.gamma, cfg.standardize_returns,
                                                   cfg.per_step_average)
                                  : a2c_grad(layout, particles.col(i), trajs, *critic, cfg.standardize_returns,
                                             cfg.per_step_average);
    scores.col(i) = g / cfg.alpha;
    if (data) (*data)[static_cast<std::size_t>(i)] = std::move(trajs);
  }
  return scores;
}

std::vector<double> evaluate_particles(const envs::EnvSpec& env, const PolicyParticleSet& set, int horizon,
                                       int episodes, Rng& rng, bool deterministic) {
  const Eigen::Index m = set.current.count();
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(m));
  for (auto& s : seeds) s = rng.next_u64();
  std::vector<double> out(static_cast<std::size_t>(m), 0.0);
  for (Eigen::Index i = 0; i < m; ++i) {
    Rng prng(seeds[static_cast<std::size_t>(i)]);
    const Eigen::VectorXd p = set.current.point(i);
    const nn::MlpParams net = set.layout.network(p);
    const Eigen::ArrayXd std_dev = deterministic ? Eigen::ArrayXd::Zero(set.layout.action_dim())
                                                 : Eigen::ArrayXd(p.tail(set.layout.action_dim()).array().exp());
    const envs::Policy policy = [&](const Eigen::VectorXd& s, Rng& r) -> Eigen::VectorXd {
      const Eigen::VectorXd mean = nn::mlp_predict(net, s).col(0);
      return mean + (std_dev * r.normal_vector(set.layout.action_dim()).array()).matrix();
    };
    double total = 0.0;
    for (int e = 0; e < episodes; ++e) total += envs::rollout(env, policy, horizon, prng).total_reward();
    out[static_cast<std::size_t>(i)] = episodes > 0 ? total / episodes : 0.0;
  }
  return out;
}

IndirectStats ip_wgf_iteration(PolicyParticleSet& set, const envs::EnvSpec& env, CriticParams* critic,
                               const IndirectConfig& cfg, Rng& rng) {
  cfg.validate();
  if (set.current.count() != cfg.particles) throw InputError("ip_wgf_iteration: particle count differs from config");
  std::vector<std::vector<envs::Trajectory>> data;
  const flow::ScoreFn score = [&](const Eigen::MatrixXd& pts) {
    return policy_scores(env, set.layout, pts, critic, cfg, rng, &data);
  };

  flow::JkoConfig jcfg = cfg.jko;
  flow::JkoStepInfo info;
  flow::ParticleEnsemble next = flow::jko_step(set.current, set.previous, score, jcfg, set.optimizer, &info);

  IndirectStats st;
  st.bandwidth = info.bandwidth;
  st.lambda = info.lambda;
  std::vector<envs::Trajectory> all;
  double complete = 0.0, all_total = 0.0;
  int n_complete = 0;
  for (auto& per : data)
    for (auto& t : per) {
      st.env_steps += static_cast<long>(t.steps.size());
      const double r = t.total_reward();
      all_total += r;
      if (!t.truncated || static_cast<int>(t.steps.size()) == cfg.horizon) {
        complete += r;
        ++n_complete;
      }
      all.push_back(std::move(t));
    }
  st.episodes = static_cast<int>(all.size());
  st.train_return = n_complete > 0 ? complete / n_complete : all_total / std::max<std::size_t>(all.size(), 1);

  if (cfg.estimator == Estimator::a2c && critic != nullptr) {
    for (int k = 0; k < cfg.critic_steps; ++k) *critic = critic_td_update(*critic, all);
    st.critic_loss = critic_td_loss(*critic, all);
  }

  set.previous = set.current;
  set.current = std::move(next);

  if (cfg.eval_episodes > 0) {
    st.particle_returns = evaluate_particles(env, set, cfg.horizon, cfg.eval_episodes, rng, cfg.eval_deterministic);
    const double n = static_cast<double>(st.particle_returns.size());
    st.mean_return = std::accumulate(st.particle_returns.begin(), st.particle_returns.end(), 0.0) / n;
    double var = 0.0;
    st.best_return = st.particle_returns.front();
    for (double r : st.particle_returns) {
      var += (r - st.mean_return) * (r - st.mean_return);
      st.best_return = std::max(st.best_return, r);
    }
    st.std_return = std::sqrt(var / n);
  }
  return st;
}

}  // namespace wgf::rl
