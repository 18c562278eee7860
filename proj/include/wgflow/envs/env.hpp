#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "wgflow/rng.hpp"

namespace wgf::envs {

enum class EnvKind { cartpole_balance, cartpole_swingup, double_pendulum, multigoal };

/// Every constant an environment uses. Actions live in [action_low, action_high] and are
/// clamped there before integration.
struct EnvSpec {
  std::string name;
  EnvKind kind = EnvKind::cartpole_balance;
  int obs_dim = 0;
  int action_dim = 0;
  Eigen::VectorXd action_low, action_high;
  int horizon = 500;
  double dt = 0.02;

  // cart-pole (frictionless, Barto et al. constants)
  double cart_mass = 1.0;
  double pole_mass = 0.1;
  double pole_half_length = 0.5;
  double gravity = 9.8;
  double force_scale = 10.0;  // newtons per unit action
  double angle_limit = 0.21;  // balance: fail beyond this many radians
  double track_limit = 2.4;   // balance: fail; swing-up: wall

  // double pendulum (point masses on massless rods, torque at the shoulder)
  double link_mass1 = 1.0, link_mass2 = 1.0;
  double link_length1 = 1.0, link_length2 = 1.0;
  double torque_scale = 5.0;

  // multi-goal point mass
  std::vector<Eigen::Vector2d> goals;
  double goal_radius = 0.5;
  double arena_bound = 7.0;
  double action_cost = 0.01;

  double reset_noise = 0.05;  // half-width of the uniform start perturbation

  void validate() const;
};

/// Names: cartpole, cartpole_swingup, double_pendulum, multigoal.
EnvSpec make_env_spec(const std::string& name);
std::vector<std::string> env_names();

struct EnvState {
  std::shared_ptr<const EnvSpec> spec;
  Eigen::VectorXd physical;  // task-specific coordinates
  Eigen::VectorXd observation;
  int step = 0;
  bool done = false;
};

struct StepResult {
  EnvState state;
  double reward = 0.0;
  bool done = false;      // episode over, for any reason
  bool terminal = false;  // ended by failure or goal, not by the horizon
};

EnvState env_reset(const EnvSpec& spec, std::uint64_t seed);
/// Throws InputError on a non-finite action or wrong length and ContractError on a finished episode.
StepResult env_step(const EnvState& state, const Eigen::Ref<const Eigen::VectorXd>& action);

/// Total mechanical energy of a double-pendulum state (kinetic + potential).
double double_pendulum_energy(const EnvSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& physical);

/// Index of the goal within goal_radius of the state's position, or -1.
int multigoal_reached(const EnvState& state);

struct Transition {
  Eigen::VectorXd state;
  Eigen::VectorXd action;  // as produced by the policy, before clamping
  double reward = 0.0;
  Eigen::VectorXd next_state;
  bool done = false;      // terminal; bootstrapping stops here
};

struct Trajectory {
  std::vector<Transition> steps;
  bool truncated = false;  // stopped by the step budget or horizon rather than a terminal state
  int final_goal = -1;     // multi-goal only
  double total_reward() const;
};

using Policy = std::function<Eigen::VectorXd(const Eigen::VectorXd& observation, Rng& rng)>;

/// Resets with a seed drawn from `rng`, then steps until done or `horizon` transitions.
Trajectory rollout(const EnvSpec& spec, const Policy& policy, int horizon, Rng& rng);

}  // namespace wgf::envs
