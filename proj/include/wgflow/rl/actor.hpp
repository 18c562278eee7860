#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "wgflow/nn/mlp.hpp"
#include "wgflow/rng.hpp"

namespace wgf::rl {

enum class ActorKind {
  sampling_network,   // a = squash(f(concat(s, xi))), xi ~ N(0, I_k)
  explicit_gaussian,  // a = squash(mean_c(s) + std_c(s) * xi), equal-weight mixture over c, exact log-density
};

ActorKind parse_actor_kind(std::string_view name);
std::string to_string(ActorKind k);

inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 2.0;

/// Reparameterized stochastic policy over a box action space. Both kinds squash with
/// squash(u) = center + half_range * tanh(u), so every action lies inside the box.
struct Actor {
  ActorKind kind = ActorKind::sampling_network;
  nn::MlpParams net;
  int obs_dim = 0;
  int action_dim = 0;
  int noise_dim = 0;
  int components = 1;  // explicit only: mixture components, output block c holds (mean_c, log_std_c)
  Eigen::VectorXd center;
  Eigen::VectorXd half_range;

  /// ReLU hidden layers, Glorot initialization.
  static Actor sampling_network(int obs_dim, int action_dim, int noise_dim, const std::vector<int>& hidden,
                                const Eigen::VectorXd& low, const Eigen::VectorXd& high, Rng& rng);
  static Actor explicit_gaussian(int obs_dim, int action_dim, const std::vector<int>& hidden,
                                 const Eigen::VectorXd& low, const Eigen::VectorXd& high, Rng& rng,
                                 int components = 1);
};

/// Actions for B states with M particles each. Column b * M + i is particle i at state b.
struct ActionSamples {
  int per_state = 0;
  Eigen::MatrixXd actions;      // act_dim x B*M
  Eigen::MatrixXd noise;        // noise_dim x B*M, already multiplied by noise_scale
  Eigen::MatrixXd squashed;     // tanh(u), act_dim x B*M
  std::vector<int> component;   // explicit only: mixture component of each column
  Eigen::MatrixXd stddev;       // explicit only: act_dim x B*M
  Eigen::MatrixXd log_std_free; // explicit only: 1 where log std was inside its clamp range
  Eigen::VectorXd log_prob;     // explicit only: log density of each action
  nn::MlpCache cache;
};

/// Draws noise_dim x B*M normals from `rng` (consumed even when noise_scale = 0). Mixture components are
/// stratified (particle i uses component i mod K) when K divides M, otherwise drawn uniformly from `rng`
/// after the noise.
ActionSamples sample_actions(const Actor& actor, const Eigen::Ref<const Eigen::MatrixXd>& states, int per_state,
                             Rng& rng, double noise_scale = 1.0);

/// Same mapping with caller-supplied noise (noise_dim x B*M) and components (empty = stratified).
ActionSamples actions_from_noise(const Actor& actor, const Eigen::Ref<const Eigen::MatrixXd>& states, int per_state,
                                 const Eigen::Ref<const Eigen::MatrixXd>& noise,
                                 const std::vector<int>& components = {});

/// M actions at one state.
ActionSamples policy_particles(const Actor& actor, const Eigen::Ref<const Eigen::VectorXd>& state, int m, Rng& rng,
                               double noise_scale = 1.0);

/// Gradient with respect to the actor parameters of sum_n <action_grad_n, a_n>, holding the noise fixed.
Eigen::VectorXd actor_backward(const Actor& actor, const ActionSamples& samples,
                               const Eigen::Ref<const Eigen::MatrixXd>& action_grad);

}  // namespace wgf::rl
