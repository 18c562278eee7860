#include "wgflow/envs/env.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "wgflow/error.hpp"

namespace wgf::envs {
namespace {

using Vec = Eigen::VectorXd;

Vec cartpole_deriv(const EnvSpec& s, const Vec& q, double force) {
  const double theta = q[2], omega = q[3];
  const double total = s.cart_mass + s.pole_mass;
  const double sin_t = std::sin(theta), cos_t = std::cos(theta);
  const double temp = (force + s.pole_mass * s.pole_half_length * omega * omega * sin_t) / total;
  const double theta_acc = (s.gravity * sin_t - cos_t * temp) /
                           (s.pole_half_length * (4.0 / 3.0 - s.pole_mass * cos_t * cos_t / total));
  const double x_acc = temp - s.pole_mass * s.pole_half_length * theta_acc * cos_t / total;
  Vec d(4);
  d << q[1], x_acc, omega, theta_acc;
  return d;
}

// Absolute angles measured from the downward vertical.
Vec pendulum_deriv(const EnvSpec& s, const Vec& q, double torque) {
  const double t1 = q[0], t2 = q[1], w1 = q[2], w2 = q[3];
  const double m1 = s.link_mass1, m2 = s.link_mass2, l1 = s.link_length1, l2 = s.link_length2, g = s.gravity;
  const double delta = t1 - t2;
  const double a11 = (m1 + m2) * l1 * l1;
  const double a12 = m2 * l1 * l2 * std::cos(delta);
  const double a22 = m2 * l2 * l2;
  const double b1 = -m2 * l1 * l2 * std::sin(delta) * w2 * w2 - (m1 + m2) * g * l1 * std::sin(t1) + torque;
  const double b2 = m2 * l1 * l2 * std::sin(delta) * w1 * w1 - m2 * g * l2 * std::sin(t2);
  const double det = a11 * a22 - a12 * a12;
  Vec d(4);
  d << w1, w2, (b1 * a22 - b2 * a12) / det, (a11 * b2 - a12 * b1) / det;
  return d;
}

template <typename F>
Vec rk4(const Vec& q, double dt, F&& f) {
  const Vec k1 = f(q);
  const Vec k2 = f(q + 0.5 * dt * k1);
  const Vec k3 = f(q + 0.5 * dt * k2);
  const Vec k4 = f(q + dt * k3);
  return q + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Vec observe(const EnvSpec& s, const Vec& q) {
  switch (s.kind) {
    case EnvKind::cartpole_balance:
      return q;
    case EnvKind::cartpole_swingup: {
      Vec o(5);
      o << q[0], q[1], std::cos(q[2]), std::sin(q[2]), q[3];
      return o;
    }
    case EnvKind::double_pendulum: {
      Vec o(6);
      o << std::cos(q[0]), std::sin(q[0]), std::cos(q[1]), std::sin(q[1]), q[2], q[3];
      return o;
    }
    case EnvKind::multigoal:
      return q;
  }
  return q;
}

double nearest_goal(const EnvSpec& s, const Vec& q, int* index) {
  double best = std::numeric_limits<double>::infinity();
  int arg = -1;
  for (std::size_t k = 0; k < s.goals.size(); ++k) {
    const double d = std::hypot(q[0] - s.goals[k][0], q[1] - s.goals[k][1]);
    if (d < best) {
      best = d;
      arg = static_cast<int>(k);
    }
  }
  if (index) *index = arg;
  return best;
}

}  // namespace

void EnvSpec::validate() const {
  if (obs_dim < 1 || action_dim < 1) throw InputError("env spec '" + name + "': dimensions must be positive");
  if (action_low.size() != action_dim || action_high.size() != action_dim)
    throw InputError("env spec '" + name + "': action bounds have the wrong length");
  if (!action_low.allFinite() || !action_high.allFinite() || (action_low.array() >= action_high.array()).any())
    throw InputError("env spec '" + name + "': action bounds must be finite with low < high");
  if (horizon < 1) throw InputError("env spec '" + name + "': horizon must be >= 1");
  if (!(dt > 0.0)) throw InputError("env spec '" + name + "': dt must be positive");
}

std::vector<std::string> env_names() { return {"cartpole", "cartpole_swingup", "double_pendulum", "multigoal"}; }

EnvSpec make_env_spec(const std::string& name) {
  EnvSpec s;
  s.name = name;
  s.action_dim = 1;
  if (name == "cartpole") {
    s.kind = EnvKind::cartpole_balance;
    s.obs_dim = 4;
  } else if (name == "cartpole_swingup") {
    s.kind = EnvKind::cartpole_swingup;
    s.obs_dim = 5;
  } else if (name == "double_pendulum") {
    s.kind = EnvKind::double_pendulum;
    s.obs_dim = 6;
  } else if (name == "multigoal") {
    s.kind = EnvKind::multigoal;
    s.obs_dim = 2;
    s.action_dim = 2;
    s.horizon = 30;
    s.reset_noise = 0.1;
    s.goals = {{5.0, 0.0}, {-5.0, 0.0}, {0.0, 5.0}, {0.0, -5.0}};
  } else {
    throw InputError("unknown environment '" + name + "'");
  }
  s.action_low = Eigen::VectorXd::Constant(s.action_dim, -1.0);
  s.action_high = Eigen::VectorXd::Constant(s.action_dim, 1.0);
  return s;
}

EnvState env_reset(const EnvSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  const double w = spec.reset_noise;
  EnvState st;
  st.spec = std::make_shared<const EnvSpec>(spec);
  switch (spec.kind) {
    case EnvKind::cartpole_balance:
    case EnvKind::cartpole_swingup:
    case EnvKind::double_pendulum:
      st.physical = Vec(4);
      for (int k = 0; k < 4; ++k) st.physical[k] = rng.uniform(-w, w);
      if (spec.kind == EnvKind::cartpole_swingup) st.physical[2] += std::numbers::pi;
      break;
    case EnvKind::multigoal:
      st.physical = Vec(2);
      for (int k = 0; k < 2; ++k) st.physical[k] = rng.uniform(-w, w);
      break;
  }
  st.observation = observe(spec, st.physical);
  return st;
}

StepResult env_step(const EnvState& state, const Eigen::Ref<const Eigen::VectorXd>& action) {
  if (!state.spec) throw ContractError("env_step: state was not produced by env_reset");
  if (state.done) throw ContractError("env_step: episode already finished");
  const EnvSpec& s = *state.spec;
  if (action.size() != s.action_dim) throw InputError("env_step: action has the wrong length");
  if (!action.allFinite()) throw InputError("env_step: non-finite action");
  const Vec a = action.cwiseMax(s.action_low).cwiseMin(s.action_high);

  StepResult out;
  out.state = state;
  Vec& q = out.state.physical;
  switch (s.kind) {
    case EnvKind::cartpole_balance: {
      const double f = s.force_scale * a[0];
      q = rk4(q, s.dt, [&](const Vec& y) { return cartpole_deriv(s, y, f); });
      out.reward = 1.0;
      out.terminal = std::abs(q[2]) > s.angle_limit || std::abs(q[0]) > s.track_limit;
      break;
    }
    case EnvKind::cartpole_swingup: {
      const double f = s.force_scale * a[0];
      q = rk4(q, s.dt, [&](const Vec& y) { return cartpole_deriv(s, y, f); });
      if (std::abs(q[0]) > s.track_limit) {
        q[0] = std::copysign(s.track_limit, q[0]);
        q[1] = 0.0;
      }
      out.reward = std::cos(q[2]);
      break;
    }
    case EnvKind::double_pendulum: {
      const double tq = s.torque_scale * a[0];
      q = rk4(q, s.dt, [&](const Vec& y) { return pendulum_deriv(s, y, tq); });
      const double tip = -s.link_length1 * std::cos(q[0]) - s.link_length2 * std::cos(q[1]);
      out.reward = tip / (s.link_length1 + s.link_length2);
      break;
    }
    case EnvKind::multigoal: {
      q = (q + a).cwiseMax(-s.arena_bound).cwiseMin(s.arena_bound);
      const double d = nearest_goal(s, q, nullptr);
      out.reward = -d - s.action_cost * a.squaredNorm();
      out.terminal = d < s.goal_radius;
      break;
    }
  }
  if (!q.allFinite()) throw NumericError("env_step: state became non-finite");
  out.state.observation = observe(s, q);
  out.state.step = state.step + 1;
  out.done = out.terminal || out.state.step >= s.horizon;
  out.state.done = out.done;
  return out;
}

double double_pendulum_energy(const EnvSpec& s, const Eigen::Ref<const Eigen::VectorXd>& q) {
  const double m1 = s.link_mass1, m2 = s.link_mass2, l1 = s.link_length1, l2 = s.link_length2;
  const double w1 = q[2], w2 = q[3];
  const double kinetic = 0.5 * (m1 + m2) * l1 * l1 * w1 * w1 + 0.5 * m2 * l2 * l2 * w2 * w2 +
                         m2 * l1 * l2 * w1 * w2 * std::cos(q[0] - q[1]);
  const double potential = -(m1 + m2) * s.gravity * l1 * std::cos(q[0]) - m2 * s.gravity * l2 * std::cos(q[1]);
  return kinetic + potential;
}

int multigoal_reached(const EnvState& state) {
  if (!state.spec || state.spec->kind != EnvKind::multigoal) return -1;
  int idx = -1;
  const double d = nearest_goal(*state.spec, state.physical, &idx);
  return d < state.spec->goal_radius ? idx : -1;
}

double Trajectory::total_reward() const {
  double r = 0.0;
  for (const auto& t : steps) r += t.reward;
  return r;
}

Trajectory rollout(const EnvSpec& spec, const Policy& policy, int horizon, Rng& rng) {
  if (horizon < 1) throw InputError("rollout: horizon must be >= 1");
  Trajectory traj;
  EnvState st = env_reset(spec, rng.next_u64());
  for (int t = 0; t < horizon; ++t) {
    Transition tr;
    tr.state = st.observation;
    tr.action = policy(st.observation, rng);
    StepResult res = env_step(st, tr.action);
    tr.reward = res.reward;
    tr.next_state = res.state.observation;
    tr.done = res.terminal;
    traj.steps.push_back(std::move(tr));
    st = std::move(res.state);
    if (res.done) break;
  }
  traj.truncated = traj.steps.empty() || !traj.steps.back().done;
  traj.final_goal = multigoal_reached(st);
  return traj;
}

}  // namespace wgf::envs
