#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "wgflow/envs/env.hpp"
#include "wgflow/flow/jko.hpp"
#include "wgflow/nn/mlp.hpp"
#include "wgflow/rl/gaussian_policy.hpp"

namespace wgf::rl {

/// State-value network trained by one-step TD.
struct CriticParams {
  nn::MlpParams value;
  double learning_rate = 1e-2;
  double gamma = 0.99;
};

CriticParams make_critic(int obs_dim, const std::vector<int>& hidden, double learning_rate, double gamma, Rng& rng);

/// Ascent direction of J for one particle:
///   mean over trajectories of (1/T) sum_t gamma^(t-1) grad log pi(a_t|s_t) Q_t,
/// Q_t the discounted return-to-go and T the trajectory length. With `standardize`, Q_t is
/// shifted and scaled to zero mean, unit variance across the whole batch first.
Eigen::VectorXd reinforce_grad(const GaussianPolicyLayout& layout, const Eigen::Ref<const Eigen::VectorXd>& particle,
                               const std::vector<envs::Trajectory>& trajectories, double gamma,
                               bool standardize = false, bool per_step = true);

/// Same outer structure with Q_t replaced by the one-step advantage
/// r_t + gamma (1 - done_t) V(s_{t+1}) - V(s_t).
Eigen::VectorXd a2c_grad(const GaussianPolicyLayout& layout, const Eigen::Ref<const Eigen::VectorXd>& particle,
                         const std::vector<envs::Trajectory>& trajectories, const CriticParams& critic,
                         bool standardize = false, bool per_step = true);

/// Mean of 0.5 (V(s) - y)^2 with y = r + gamma (1 - done) V(s') held fixed.
double critic_td_loss(const CriticParams& critic, const std::vector<envs::Trajectory>& trajectories);

/// One full-batch SGD step on critic_td_loss.
CriticParams critic_td_update(const CriticParams& critic, const std::vector<envs::Trajectory>& trajectories);

enum class Estimator { reinforce, a2c };
Estimator parse_estimator(std::string_view name);
std::string to_string(Estimator e);

struct IndirectConfig {
  int particles = 16;
  int batch_size = 5000;  // environment steps per iteration, split evenly across particles
  double alpha = 8.0;     // temperature: target gradient is grad J / alpha
  double gamma = 0.99;
  Estimator estimator = Estimator::reinforce;
  bool standardize_returns = true;
  bool per_step_average = false;  // true applies the 1/T factor per trajectory
  std::vector<int> hidden{25, 16};
  double prior_variance = 0.01;  // initial particles ~ N(0, prior_variance)
  double init_log_std = 0.0;
  int horizon = 500;
  std::vector<int> critic_hidden{32};
  double critic_learning_rate = 1e-2;
  int critic_steps = 10;
  int eval_episodes = 1;  // full-horizon episodes per particle after each update
  bool eval_deterministic = true;  // evaluate the mean action instead of sampling
  flow::JkoConfig jko;

  IndirectConfig();
  void validate() const;
};

struct PolicyParticleSet {
  GaussianPolicyLayout layout;
  flow::ParticleEnsemble current;   // particle_size x M
  flow::ParticleEnsemble previous;  // particles before the last update
  double alpha = 8.0;
  nn::OptimizerState optimizer;
};

PolicyParticleSet make_policy_particles(const envs::EnvSpec& env, const IndirectConfig& cfg, Rng& rng);

struct IndirectStats {
  double mean_return = 0.0;  // evaluation episodes, averaged over particles
  double std_return = 0.0;   // across particles
  double best_return = 0.0;
  double train_return = 0.0;  // mean return of completed training episodes
  long env_steps = 0;         // training steps used this iteration
  int episodes = 0;
  double bandwidth = 0.0;
  double lambda = 0.0;
  double critic_loss = 0.0;
  std::vector<double> particle_returns;
};

/// Runs `steps` environment steps with one particle's policy, restarting episodes as needed.
std::vector<envs::Trajectory> collect_steps(const envs::EnvSpec& env, const GaussianPolicyLayout& layout,
                                            const Eigen::Ref<const Eigen::VectorXd>& particle, long steps,
                                            int horizon, Rng& rng);

/// Per-particle target gradients grad J / alpha (particle_size x M) from fresh rollouts.
/// Also returns the trajectories used, per particle, through `data` when non-null.
Eigen::MatrixXd policy_scores(const envs::EnvSpec& env, const GaussianPolicyLayout& layout,
                              const Eigen::Ref<const Eigen::MatrixXd>& particles, const CriticParams* critic,
                              const IndirectConfig& cfg, Rng& rng,
                              std::vector<std::vector<envs::Trajectory>>* data = nullptr);

/// One IP-WGF iteration: rollouts, target gradients, critic TD steps (A2C), then a JKO
/// step against the particles saved before the previous update.
IndirectStats ip_wgf_iteration(PolicyParticleSet& set, const envs::EnvSpec& env, CriticParams* critic,
                               const IndirectConfig& cfg, Rng& rng);

/// Return of one stochastic episode per particle (evaluation only).
std::vector<double> evaluate_particles(const envs::EnvSpec& env, const PolicyParticleSet& set, int horizon,
                                       int episodes, Rng& rng, bool deterministic = false);

}  // namespace wgf::rl
