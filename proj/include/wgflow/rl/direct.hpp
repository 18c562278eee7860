#pragma once

#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "wgflow/envs/env.hpp"
#include "wgflow/flow/jko.hpp"
#include "wgflow/nn/mlp.hpp"
#include "wgflow/nn/optimizer.hpp"
#include "wgflow/rl/actor.hpp"
#include "wgflow/rl/replay.hpp"
#include "wgflow/rng.hpp"

namespace wgf::rl {

/// Distribution q over actions used by the importance estimate of the soft value.
struct ActionProposal {
  std::function<Eigen::MatrixXd(int n, Rng& rng)> sample;                        // act_dim x n
  std::function<Eigen::VectorXd(const Eigen::MatrixXd& actions)> log_density;  // one entry per column
  double entropy = 0.0;
};

/// Uniform over the box [low, high]: log q = -log Vol, H(q) = log Vol.
ActionProposal uniform_box_proposal(const Eigen::VectorXd& low, const Eigen::VectorXd& high);

/// Q values of a batch of actions (act_dim x n) at one fixed state.
using ActionValueFn = std::function<Eigen::VectorXd(const Eigen::MatrixXd& actions)>;

/// log E_q[exp(Q(a)) / q(a)] - H(q), with the expectation replaced by the mean over n
/// proposal draws and evaluated as a log-sum-exp.
double soft_v_estimate(const ActionValueFn& q, const ActionProposal& proposal, int n_samples, Rng& rng);

/// Q network on concat(state, action), scalar output.
nn::MlpParams make_q_network(int obs_dim, int action_dim, const std::vector<int>& hidden, Rng& rng);
/// V network on the state, scalar output.
nn::MlpParams make_v_network(int obs_dim, const std::vector<int>& hidden, Rng& rng);

Eigen::VectorXd q_values(const nn::MlpParams& q, const Eigen::Ref<const Eigen::MatrixXd>& states,
                         const Eigen::Ref<const Eigen::MatrixXd>& actions);
/// grad_a Q(s, a) for every column (act_dim x B).
Eigen::MatrixXd q_action_gradient(const nn::MlpParams& q, const Eigen::Ref<const Eigen::MatrixXd>& states,
                                  const Eigen::Ref<const Eigen::MatrixXd>& actions);

/// reward_scale * r + gamma * (1 - done) * V(s')
Eigen::VectorXd bellman_target(const Eigen::Ref<const Eigen::VectorXd>& rewards,
                               const Eigen::Ref<const Eigen::VectorXd>& dones,
                               const Eigen::Ref<const Eigen::VectorXd>& next_values, double gamma, double reward_scale);

enum class ValueMode {
  importance,  // soft_v_estimate on the target Q network
  v_net,       // target V network
};

ValueMode parse_value_mode(std::string_view name);
std::string to_string(ValueMode m);

struct TargetNets {
  nn::MlpParams q;  // used by importance mode
  nn::MlpParams v;  // used by v_net mode
};

struct QTargetSettings {
  ValueMode mode = ValueMode::importance;
  double gamma = 0.99;
  double reward_scale = 1.0;
  int value_samples = 32;  // importance mode only
};

/// Per-transition regression targets for the soft Q network. `proposal` is used by importance mode.
Eigen::VectorXd q_target(const TransitionBatch& batch, const TargetNets& targets, const QTargetSettings& settings,
                         const ActionProposal& proposal, Rng& rng);

/// One optimizer step on mean 0.5 (Q(s,a) - target)^2 with the targets held fixed. Returns the loss before the step.
double jq_step(nn::MlpParams& q, nn::OptimizerState& opt, const Eigen::Ref<const Eigen::MatrixXd>& states,
               const Eigen::Ref<const Eigen::MatrixXd>& actions, const Eigen::Ref<const Eigen::VectorXd>& targets);

/// Regression target of the V network at each state from n_actions fresh actions of the explicit policy:
///   approximate: mean_k [Q(s, a_k) - log pi(a_k | s)]
///   exact:       log mean_k exp(Q(s, a_k) - log pi(a_k | s)) + mean_k log pi(a_k | s)
Eigen::VectorXd v_regression_target(const nn::MlpParams& q, const Actor& policy,
                                    const Eigen::Ref<const Eigen::MatrixXd>& states, int n_actions, bool exact,
                                    Rng& rng);

/// One optimizer step on mean 0.5 (V(s) - target)^2, target from v_regression_target and held fixed.
/// Returns the loss before the step.
double jv_step(nn::MlpParams& v, nn::OptimizerState& opt, const nn::MlpParams& q, const Actor& policy,
               const Eigen::Ref<const Eigen::MatrixXd>& states, int n_actions, Rng& rng, bool exact = false);

struct PolicyStepInfo {
  double bandwidth = 0.0;  // averaged over states
  double lambda = 0.0;
  double grad_norm = 0.0;
};

/// Per-state action-particle direction (act_dim x B*M, same column order as the samples):
/// jko_direction with grad_a Q as the score field and the snapshot particles at the same state
/// as the previous ensemble.
Eigen::MatrixXd policy_particle_direction(const nn::MlpParams& q, const Eigen::Ref<const Eigen::MatrixXd>& states,
                                          const ActionSamples& current, const ActionSamples& snapshot,
                                          const flow::JkoConfig& cfg, PolicyStepInfo* info = nullptr);

/// One WGF step on the actor. Current and snapshot actions share the noise draws. The
/// particle directions are averaged over states, pulled back through the actor and applied
/// as an ascent step with cfg.optimizer settings.
void policy_wgf_step(Actor& actor, nn::OptimizerState& opt, const nn::MlpParams& q,
                     const Eigen::Ref<const Eigen::MatrixXd>& states, const Actor& snapshot, int particles,
                     const flow::JkoConfig& cfg, Rng& rng, PolicyStepInfo* info = nullptr);

/// target <- target + tau (live - target), tau in (0, 1].
void polyak_update(const nn::MlpParams& live, nn::MlpParams& target, double tau);
void polyak_update(const Eigen::Ref<const Eigen::VectorXd>& live, Eigen::Ref<Eigen::VectorXd> target, double tau);

enum class SnapshotStrategy {
  last,            // snapshot <- parameters before the latest update
  moving_average,  // snapshot <- (1 - tau) snapshot + tau * parameters before the latest update
};

SnapshotStrategy parse_snapshot_strategy(std::string_view name);
std::string to_string(SnapshotStrategy s);

enum class DirectVariant { dp_wgf, dp_wgf_v };

DirectVariant parse_direct_variant(std::string_view name);
std::string to_string(DirectVariant v);

struct DirectConfig {
  DirectVariant variant = DirectVariant::dp_wgf_v;
  std::vector<int> hidden{128, 128};
  int batch_size = 64;
  double learning_rate = 3e-4;  // Q, V and policy
  double gamma = 0.99;
  double tau = 0.01;            // target smoothing
  double reward_scale = 1.0;
  std::size_t replay_capacity = 1000000;
  int particles = 32;           // action particles per state in the policy step
  int noise_dim = 0;            // sampling network noise size; 0 means action_dim
  int components = 1;           // explicit policy mixture components (dp_wgf_v)
  int value_samples = 32;       // importance estimate draws (dp_wgf)
  int v_actions = 8;            // policy draws per state for the V target (dp_wgf_v)
  bool exact_v_target = false;
  int gradient_steps = 1;       // per environment step
  int epoch_steps = 1000;       // environment steps per epoch
  int horizon = 0;              // 0 means the environment horizon
  int eval_episodes = 10;
  SnapshotStrategy snapshot = SnapshotStrategy::moving_average;
  double snapshot_tau = 0.01;
  flow::JkoConfig jko;          // policy step rules; its learning rate is replaced by learning_rate

  DirectConfig();
  void validate() const;
};

/// Complete learner state for DP-WGF / DP-WGF-V.
struct DirectLearner {
  std::shared_ptr<const envs::EnvSpec> env;
  DirectConfig cfg;
  Actor actor;
  Actor snapshot;
  nn::MlpParams q, q_target;
  nn::MlpParams v, v_target;  // dp_wgf_v only
  nn::OptimizerState actor_opt, q_opt, v_opt;
  ReplayBuffer buffer;
  envs::EnvState state;
  Rng env_rng, noise_rng, replay_rng, eval_rng;
  long total_steps = 0;
  long updates = 0;
  int epoch = 0;
  double episode_return = 0.0;
  std::vector<double> finished_returns{};  // training episodes completed in the current epoch
};

/// Networks initialized from the "actor-init", "q-init" and "v-init" streams of `seed`;
/// environment, exploration noise, replay sampling and evaluation get their own streams.
DirectLearner make_direct_learner(const envs::EnvSpec& env, const DirectConfig& cfg, std::uint64_t seed);

struct DirectStats {
  double mean_return = 0.0;  // evaluation episodes
  double std_return = 0.0;
  double train_return = 0.0;  // mean over training episodes finished this epoch (0 if none)
  long env_steps = 0;         // total so far
  long updates = 0;
  double q_loss = 0.0;        // mean over this epoch's updates
  double v_loss = 0.0;
  double bandwidth = 0.0;
  double lambda = 0.0;
  std::vector<int> goal_counts;  // multigoal: evaluation episodes ending at each goal
};

/// One stochastic action for the current observation.
Eigen::VectorXd actor_act(const Actor& actor, const Eigen::Ref<const Eigen::VectorXd>& observation, Rng& rng);

/// Evaluation rollouts with the stochastic actor.
DirectStats evaluate_actor(const envs::EnvSpec& env, const Actor& actor, int episodes, int horizon, Rng& rng);

/// One epoch of Algorithm-1 style training: for each environment step, collect a transition,
/// then (once the buffer holds a batch) update Q, V (dp_wgf_v), the policy, the snapshot and
/// the targets. Evaluation rollouts close the epoch.
DirectStats direct_epoch(DirectLearner& learner);

}  // namespace wgf::rl
