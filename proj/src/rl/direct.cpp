#include "wgflow/rl/direct.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wgflow/error.hpp"
#include "wgflow/flow/particles.hpp"

namespace wgf::rl {

namespace {

std::vector<int> sizes(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> s{in};
  s.insert(s.end(), hidden.begin(), hidden.end());
  s.push_back(out);
  return s;
}

std::vector<nn::Activation> relu_then_identity(std::size_t hidden_layers) {
  std::vector<nn::Activation> a(hidden_layers, nn::Activation::relu);
  a.push_back(nn::Activation::identity);
  return a;
}

Eigen::MatrixXd concat_rows(const Eigen::Ref<const Eigen::MatrixXd>& top, const Eigen::Ref<const Eigen::MatrixXd>& bottom) {
  if (top.cols() != bottom.cols()) throw InputError("q network: state and action batches differ in size");
  Eigen::MatrixXd out(top.rows() + bottom.rows(), top.cols());
  out.topRows(top.rows()) = top;
  out.bottomRows(bottom.rows()) = bottom;
  return out;
}

double log_mean_exp(const Eigen::Ref<const Eigen::VectorXd>& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) throw NumericError("log_mean_exp: non-finite input");
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += std::exp(v[i] - m);
  return m + std::log(s / static_cast<double>(v.size()));
}

void check_scalar_net(const nn::MlpParams& net, Eigen::Index input_dim, const char* what) {
  if (net.output_dim() != 1 || net.input_dim() != input_dim)
    throw InputError(std::string(what) + ": network shape does not match the batch");
}

}  // namespace

ActionProposal uniform_box_proposal(const Eigen::VectorXd& low, const Eigen::VectorXd& high) {
  if (low.size() != high.size() || low.size() == 0) throw InputError("uniform proposal: bounds have mismatched lengths");
  if (!((high - low).array() > 0.0).all()) throw InputError("uniform proposal: need low < high");
  const double log_volume = (high - low).array().log().sum();
  ActionProposal p;
  p.sample = [low, high](int n, Rng& rng) {
    Eigen::MatrixXd a(low.size(), n);
    for (int j = 0; j < n; ++j)
      for (Eigen::Index d = 0; d < low.size(); ++d) a(d, j) = rng.uniform(low[d], high[d]);
    return a;
  };
  p.log_density = [log_volume](const Eigen::MatrixXd& actions) {
    return Eigen::VectorXd::Constant(actions.cols(), -log_volume);
  };
  p.entropy = log_volume;
  return p;
}

double soft_v_estimate(const ActionValueFn& q, const ActionProposal& proposal, int n_samples, Rng& rng) {
  if (n_samples < 1) throw InputError("soft_v_estimate: need at least one sample");
  const Eigen::MatrixXd actions = proposal.sample(n_samples, rng);
  const Eigen::VectorXd values = q(actions);
  const Eigen::VectorXd log_q = proposal.log_density(actions);
  if (values.size() != n_samples || log_q.size() != n_samples)
    throw InputError("soft_v_estimate: value or density function returned the wrong length");
  return log_mean_exp(values - log_q) - proposal.entropy;
}

nn::MlpParams make_q_network(int obs_dim, int action_dim, const std::vector<int>& hidden, Rng& rng) {
  return nn::MlpParams::glorot(sizes(obs_dim + action_dim, hidden, 1), relu_then_identity(hidden.size()), rng);
}

nn::MlpParams make_v_network(int obs_dim, const std::vector<int>& hidden, Rng& rng) {
  return nn::MlpParams::glorot(sizes(obs_dim, hidden, 1), relu_then_identity(hidden.size()), rng);
}

Eigen::VectorXd q_values(const nn::MlpParams& q, const Eigen::Ref<const Eigen::MatrixXd>& states,
                         const Eigen::Ref<const Eigen::MatrixXd>& actions) {
  check_scalar_net(q, states.rows() + actions.rows(), "q_values");
  return nn::mlp_predict(q, concat_rows(states, actions)).row(0).transpose();
}

Eigen::MatrixXd q_action_gradient(const nn::MlpParams& q, const Eigen::Ref<const Eigen::MatrixXd>& states,
                                  const Eigen::Ref<const Eigen::MatrixXd>& actions) {
  check_scalar_net(q, states.rows() + actions.rows(), "q_action_gradient");
  const nn::MlpForward fwd = nn::mlp_forward(q, concat_rows(states, actions));
  return nn::mlp_input_gradient(q, fwd.cache, Eigen::MatrixXd::Ones(1, actions.cols())).bottomRows(actions.rows());
}

Eigen::VectorXd bellman_target(const Eigen::Ref<const Eigen::VectorXd>& rewards,
                               const Eigen::Ref<const Eigen::VectorXd>& dones,
                               const Eigen::Ref<const Eigen::VectorXd>& next_values, double gamma, double reward_scale) {
  if (rewards.size() != dones.size() || rewards.size() != next_values.size())
    throw InputError("bellman_target: batch sizes differ");
  if (rewards.size() == 0) throw InputError("bellman_target: empty batch");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw InputError("bellman_target: gamma must lie in [0, 1]");
  return reward_scale * rewards.array() + gamma * (1.0 - dones.array()) * next_values.array();
}

ValueMode parse_value_mode(std::string_view name) {
  if (name == "importance") return ValueMode::importance;
  if (name == "v_net") return ValueMode::v_net;
  throw InputError("unknown value mode '" + std::string(name) + "' (expected importance or v_net)");
}

std::string to_string(ValueMode m) { return m == ValueMode::importance ? "importance" : "v_net"; }

Eigen::VectorXd q_target(const TransitionBatch& batch, const TargetNets& targets, const QTargetSettings& settings,
                         const ActionProposal& proposal, Rng& rng) {
  const Eigen::Index n = batch.size();
  if (n == 0) throw InputError("q_target: empty batch");
  Eigen::VectorXd next_values(n);
  if (settings.mode == ValueMode::v_net) {
    check_scalar_net(targets.v, batch.next_states.rows(), "q_target");
    next_values = nn::mlp_predict(targets.v, batch.next_states).row(0).transpose();
  } else {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (batch.dones[i] != 0.0) {
        next_values[i] = 0.0;
        continue;
      }
      const Eigen::VectorXd s = batch.next_states.col(i);
      const ActionValueFn qfn = [&](const Eigen::MatrixXd& actions) {
        const Eigen::MatrixXd states = s.replicate(1, actions.cols());
        return q_values(targets.q, states, actions);
      };
      next_values[i] = soft_v_estimate(qfn, proposal, settings.value_samples, rng);
    }
  }
  return bellman_target(batch.rewards, batch.dones, next_values, settings.gamma, settings.reward_scale);
}

double jq_step(nn::MlpParams& q, nn::OptimizerState& opt, const Eigen::Ref<const Eigen::MatrixXd>& states,
               const Eigen::Ref<const Eigen::MatrixXd>& actions, const Eigen::Ref<const Eigen::VectorXd>& targets) {
  check_scalar_net(q, states.rows() + actions.rows(), "jq_step");
  if (targets.size() != states.cols()) throw InputError("jq_step: target count does not match the batch");
  const double b = static_cast<double>(targets.size());
  const nn::MlpForward fwd = nn::mlp_forward(q, concat_rows(states, actions));
  const Eigen::RowVectorXd residual = fwd.output.row(0) - targets.transpose();
  const double loss = 0.5 * residual.squaredNorm() / b;
  const Eigen::VectorXd grad = nn::mlp_backward(q, fwd.cache, residual / b).params;
  nn::optimizer_update(q.flat(), grad, opt);
  return loss;
}

Eigen::VectorXd v_regression_target(const nn::MlpParams& q, const Actor& policy,
                                    const Eigen::Ref<const Eigen::MatrixXd>& states, int n_actions, bool exact,
                                    Rng& rng) {
  if (n_actions < 1) throw InputError("v target: need at least one action per state");
  if (policy.kind != ActorKind::explicit_gaussian) throw InputError("v target: needs an explicit policy density");
  const ActionSamples s = sample_actions(policy, states, n_actions, rng);
  Eigen::MatrixXd rep(states.rows(), s.actions.cols());
  for (Eigen::Index j = 0; j < rep.cols(); ++j) rep.col(j) = states.col(j / n_actions);
  const Eigen::VectorXd qv = q_values(q, rep, s.actions);
  Eigen::VectorXd out(states.cols());
  for (Eigen::Index b = 0; b < states.cols(); ++b) {
    const auto qb = qv.segment(b * n_actions, n_actions);
    const auto lp = s.log_prob.segment(b * n_actions, n_actions);
    if (exact) {
      out[b] = log_mean_exp(qb - lp) + lp.mean();
    } else {
      out[b] = (qb - lp).mean();
    }
  }
  return out;
}

double jv_step(nn::MlpParams& v, nn::OptimizerState& opt, const nn::MlpParams& q, const Actor& policy,
               const Eigen::Ref<const Eigen::MatrixXd>& states, int n_actions, Rng& rng, bool exact) {
  check_scalar_net(v, states.rows(), "jv_step");
  const Eigen::VectorXd target = v_regression_target(q, policy, states, n_actions, exact, rng);
  const double b = static_cast<double>(states.cols());
  const nn::MlpForward fwd = nn::mlp_forward(v, states);
  const Eigen::RowVectorXd residual = fwd.output.row(0) - target.transpose();
  const double loss = 0.5 * residual.squaredNorm() / b;
  const Eigen::VectorXd grad = nn::mlp_backward(v, fwd.cache, residual / b).params;
  nn::optimizer_update(v.flat(), grad, opt);
  return loss;
}

Eigen::MatrixXd policy_particle_direction(const nn::MlpParams& q, const Eigen::Ref<const Eigen::MatrixXd>& states,
                                          const ActionSamples& current, const ActionSamples& snapshot,
                                          const flow::JkoConfig& cfg, PolicyStepInfo* info) {
  const int m = current.per_state;
  if (snapshot.per_state != m || snapshot.actions.cols() != current.actions.cols())
    throw InputError("policy step: snapshot samples do not match the current samples");
  if (current.actions.cols() != states.cols() * m) throw InputError("policy step: sample count does not match states");
  Eigen::MatrixXd rep(states.rows(), current.actions.cols());
  for (Eigen::Index j = 0; j < rep.cols(); ++j) rep.col(j) = states.col(j / m);
  const Eigen::MatrixXd scores = q_action_gradient(q, rep, current.actions);

  Eigen::MatrixXd dir(current.actions.rows(), current.actions.cols());
  double bw = 0.0, lam = 0.0;
  for (Eigen::Index b = 0; b < states.cols(); ++b) {
    const flow::ParticleEnsemble cur(current.actions.middleCols(b * m, m));
    const flow::ParticleEnsemble prev(snapshot.actions.middleCols(b * m, m));
    flow::JkoStepInfo step;
    dir.middleCols(b * m, m) = flow::jko_direction(cur, prev, scores.middleCols(b * m, m), cfg, &step);
    bw += step.bandwidth;
    lam += step.lambda;
  }
  if (info) {
    info->bandwidth = bw / static_cast<double>(states.cols());
    info->lambda = lam / static_cast<double>(states.cols());
  }
  return dir;
}

void policy_wgf_step(Actor& actor, nn::OptimizerState& opt, const nn::MlpParams& q,
                     const Eigen::Ref<const Eigen::MatrixXd>& states, const Actor& snapshot, int particles,
                     const flow::JkoConfig& cfg, Rng& rng, PolicyStepInfo* info) {
  cfg.validate();
  if (particles < 1) throw InputError("policy step: need at least one particle");
  if (states.cols() == 0) throw InputError("policy step: empty state batch");
  const Eigen::MatrixXd noise = rng.normal_matrix(actor.noise_dim, states.cols() * particles);
  const ActionSamples cur = actions_from_noise(actor, states, particles, noise);
  const ActionSamples prev = actions_from_noise(snapshot, states, particles, noise);
  const Eigen::MatrixXd dir = policy_particle_direction(q, states, cur, prev, cfg, info);
  const Eigen::VectorXd ascent = actor_backward(actor, cur, dir / static_cast<double>(states.cols()));
  if (!ascent.allFinite()) throw NumericError("policy step: non-finite actor gradient");
  if (info) info->grad_norm = ascent.norm();
  opt.settings = cfg.optimizer;
  nn::optimizer_update(actor.net.flat(), -ascent, opt);
}

void polyak_update(const Eigen::Ref<const Eigen::VectorXd>& live, Eigen::Ref<Eigen::VectorXd> target, double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) throw ContractError("polyak_update: tau must lie in (0, 1]");
  if (live.size() != target.size()) throw InputError("polyak_update: shape mismatch");
  target += tau * (live - target);
}

void polyak_update(const nn::MlpParams& live, nn::MlpParams& target, double tau) {
  if (live.layer_sizes() != target.layer_sizes()) throw InputError("polyak_update: architectures differ");
  polyak_update(live.flat(), target.flat(), tau);
}

SnapshotStrategy parse_snapshot_strategy(std::string_view name) {
  if (name == "last") return SnapshotStrategy::last;
  if (name == "moving_average") return SnapshotStrategy::moving_average;
  throw InputError("unknown snapshot strategy '" + std::string(name) + "' (expected last or moving_average)");
}

std::string to_string(SnapshotStrategy s) { return s == SnapshotStrategy::last ? "last" : "moving_average"; }

DirectVariant parse_direct_variant(std::string_view name) {
  if (name == "dp_wgf") return DirectVariant::dp_wgf;
  if (name == "dp_wgf_v") return DirectVariant::dp_wgf_v;
  throw InputError("unknown direct variant '" + std::string(name) + "' (expected dp_wgf or dp_wgf_v)");
}

std::string to_string(DirectVariant v) { return v == DirectVariant::dp_wgf ? "dp_wgf" : "dp_wgf_v"; }

DirectConfig::DirectConfig() {
  jko.w2_scale = 0.4;
  jko.optimizer.kind = nn::OptimizerKind::adam;
}

void DirectConfig::validate() const {
  jko.validate();
  if (hidden.empty()) throw InputError("direct: need at least one hidden layer");
  for (int h : hidden)
    if (h < 1) throw InputError("direct: hidden sizes must be positive");
  if (batch_size < 1) throw InputError("direct: batch_size must be positive");
  if (!(learning_rate >= 0.0)) throw InputError("direct: learning_rate must be non-negative");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw InputError("direct: gamma must lie in [0, 1]");
  if (!(tau > 0.0 && tau <= 1.0)) throw InputError("direct: tau must lie in (0, 1]");
  if (!(snapshot_tau > 0.0 && snapshot_tau <= 1.0)) throw InputError("direct: snapshot_tau must lie in (0, 1]");
  if (replay_capacity < static_cast<std::size_t>(batch_size))
    throw InputError("direct: replay capacity must hold at least one batch");
  if (particles < 1 || value_samples < 1 || v_actions < 1 || gradient_steps < 0 || epoch_steps < 1 ||
      eval_episodes < 0 || noise_dim < 0 || horizon < 0 || components < 1)
    throw InputError("direct: counts must be positive");
}

DirectLearner make_direct_learner(const envs::EnvSpec& env, const DirectConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  env.validate();
  Rng actor_rng = Rng::stream(seed, "actor-init");
  Rng q_rng = Rng::stream(seed, "q-init");
  Rng v_rng = Rng::stream(seed, "v-init");
  const int noise_dim = cfg.noise_dim > 0 ? cfg.noise_dim : env.action_dim;
  Actor actor = cfg.variant == DirectVariant::dp_wgf
                    ? Actor::sampling_network(env.obs_dim, env.action_dim, noise_dim, cfg.hidden, env.action_low,
                                              env.action_high, actor_rng)
                    : Actor::explicit_gaussian(env.obs_dim, env.action_dim, cfg.hidden, env.action_low,
                                               env.action_high, actor_rng, cfg.components);
  nn::MlpParams q = make_q_network(env.obs_dim, env.action_dim, cfg.hidden, q_rng);
  nn::MlpParams v = make_v_network(env.obs_dim, cfg.hidden, v_rng);

  nn::OptimizerSettings opt;
  opt.kind = nn::OptimizerKind::adam;
  opt.learning_rate = cfg.learning_rate;

  DirectLearner l{
      .env = std::make_shared<const envs::EnvSpec>(env),
      .cfg = cfg,
      .actor = actor,
      .snapshot = actor,
      .q = q,
      .q_target = q,
      .v = v,
      .v_target = v,
      .actor_opt = nn::OptimizerState(opt),
      .q_opt = nn::OptimizerState(opt),
      .v_opt = nn::OptimizerState(opt),
      .buffer = ReplayBuffer(cfg.replay_capacity),
      .state = {},
      .env_rng = Rng::stream(seed, "env"),
      .noise_rng = Rng::stream(seed, "noise"),
      .replay_rng = Rng::stream(seed, "replay"),
      .eval_rng = Rng::stream(seed, "eval"),
  };
  l.state = envs::env_reset(*l.env, l.env_rng.next_u64());
  return l;
}

Eigen::VectorXd actor_act(const Actor& actor, const Eigen::Ref<const Eigen::VectorXd>& observation, Rng& rng) {
  return sample_actions(actor, observation, 1, rng).actions.col(0);
}

DirectStats evaluate_actor(const envs::EnvSpec& env, const Actor& actor, int episodes, int horizon, Rng& rng) {
  DirectStats st;
  if (env.kind == envs::EnvKind::multigoal) st.goal_counts.assign(env.goals.size(), 0);
  if (episodes < 1) return st;
  const envs::Policy policy = [&actor](const Eigen::VectorXd& obs, Rng& r) { return actor_act(actor, obs, r); };
  std::vector<double> returns;
  for (int e = 0; e < episodes; ++e) {
    const envs::Trajectory t = envs::rollout(env, policy, horizon, rng);
    returns.push_back(t.total_reward());
    if (t.final_goal >= 0 && !st.goal_counts.empty()) ++st.goal_counts[static_cast<std::size_t>(t.final_goal)];
  }
  const Eigen::Map<const Eigen::VectorXd> r(returns.data(), static_cast<Eigen::Index>(returns.size()));
  st.mean_return = r.mean();
  st.std_return = std::sqrt((r.array() - st.mean_return).square().mean());
  return st;
}

DirectStats direct_epoch(DirectLearner& l) {
  const DirectConfig& cfg = l.cfg;
  const envs::EnvSpec& env = *l.env;
  const int horizon = cfg.horizon > 0 ? cfg.horizon : env.horizon;
  const ActionProposal proposal = uniform_box_proposal(env.action_low, env.action_high);
  const QTargetSettings qts{.mode = cfg.variant == DirectVariant::dp_wgf ? ValueMode::importance : ValueMode::v_net,
                            .gamma = cfg.gamma,
                            .reward_scale = cfg.reward_scale,
                            .value_samples = cfg.value_samples};
  flow::JkoConfig jko = cfg.jko;
  jko.optimizer.learning_rate = cfg.learning_rate;
  l.finished_returns.clear();
  double q_loss = 0.0, v_loss = 0.0, bw = 0.0, lam = 0.0;
  long epoch_updates = 0;

  for (int t = 0; t < cfg.epoch_steps; ++t) {
    const Eigen::VectorXd action = actor_act(l.actor, l.state.observation, l.noise_rng);
    const envs::StepResult sr = envs::env_step(l.state, action);
    l.buffer.push({l.state.observation, action, sr.reward, sr.state.observation, sr.terminal});
    l.episode_return += sr.reward;
    ++l.total_steps;
    if (sr.done || sr.state.step >= horizon) {
      l.finished_returns.push_back(l.episode_return);
      l.episode_return = 0.0;
      l.state = envs::env_reset(env, l.env_rng.next_u64());
    } else {
      l.state = sr.state;
    }

    for (int g = 0; g < cfg.gradient_steps; ++g) {
      const auto sampled = l.buffer.sample(static_cast<std::size_t>(cfg.batch_size), l.replay_rng);
      if (!sampled) break;
      const TransitionBatch batch = make_batch(*sampled);

      const TargetNets targets{l.q_target, l.v_target};
      const Eigen::VectorXd y = q_target(batch, targets, qts, proposal, l.noise_rng);
      q_loss += jq_step(l.q, l.q_opt, batch.states, batch.actions, y);
      if (cfg.variant == DirectVariant::dp_wgf_v)
        v_loss += jv_step(l.v, l.v_opt, l.q, l.actor, batch.states, cfg.v_actions, l.noise_rng, cfg.exact_v_target);

      const Eigen::VectorXd before = l.actor.net.flat();
      PolicyStepInfo info;
      policy_wgf_step(l.actor, l.actor_opt, l.q, batch.states, l.snapshot, cfg.particles, jko, l.noise_rng, &info);
      bw += info.bandwidth;
      lam += info.lambda;
      if (cfg.snapshot == SnapshotStrategy::last) {
        l.snapshot.net.flat() = before;
      } else {
        polyak_update(before, l.snapshot.net.flat(), cfg.snapshot_tau);
      }

      if (cfg.variant == DirectVariant::dp_wgf) {
        polyak_update(l.q, l.q_target, cfg.tau);
      } else {
        polyak_update(l.v, l.v_target, cfg.tau);
      }
      ++epoch_updates;
      ++l.updates;
    }
  }

  DirectStats st = evaluate_actor(env, l.actor, cfg.eval_episodes, horizon, l.eval_rng);
  if (!l.finished_returns.empty()) {
    double s = 0.0;
    for (double r : l.finished_returns) s += r;
    st.train_return = s / static_cast<double>(l.finished_returns.size());
  }
  st.env_steps = l.total_steps;
  st.updates = l.updates;
  if (epoch_updates > 0) {
    const double n = static_cast<double>(epoch_updates);
    st.q_loss = q_loss / n;
    st.v_loss = v_loss / n;
    st.bandwidth = bw / n;
    st.lambda = lam / n;
  }
  ++l.epoch;
  return st;
}

}  // namespace wgf::rl
