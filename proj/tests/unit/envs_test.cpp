#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "wgflow/envs/env.hpp"
#include "wgflow/error.hpp"

namespace wgf::envs {
namespace {

using test_util::Gen;
using test_util::kPropertyCases;

Eigen::VectorXd constant_action(const EnvSpec& s, double v) { return Eigen::VectorXd::Constant(s.action_dim, v); }

TEST(EnvReset, SameSeedGivesSameObservation) {
  for (const auto& name : env_names()) {
    const EnvSpec s = make_env_spec(name);
    EXPECT_EQ(env_reset(s, 7).observation, env_reset(s, 7).observation) << name;
  }
}

TEST(EnvReset, CartpoleStartsNearUpright) {
  const EnvSpec s = make_env_spec("cartpole");
  for (std::uint64_t seed = 0; seed < 50; ++seed) EXPECT_LE(std::abs(env_reset(s, seed).physical[2]), 0.05);
}

TEST(EnvReset, MultigoalStartsNearOrigin) {
  const EnvSpec s = make_env_spec("multigoal");
  for (std::uint64_t seed = 0; seed < 50; ++seed) EXPECT_LE(env_reset(s, seed).physical.cwiseAbs().maxCoeff(), 0.1);
}

TEST(EnvReset, SwingupStartsHangingDown) {
  const EnvSpec s = make_env_spec("cartpole_swingup");
  EXPECT_NEAR(env_reset(s, 3).physical[2], std::numbers::pi, 0.05);
}

TEST(EnvSpec, UnknownNameThrows) { EXPECT_THROW(make_env_spec("hopper"), InputError); }

TEST(EnvSpec, InvalidBoundsRejected) {
  EnvSpec s = make_env_spec("cartpole");
  s.action_high[0] = s.action_low[0];
  EXPECT_THROW(s.validate(), InputError);
  s = make_env_spec("cartpole");
  s.horizon = 0;
  EXPECT_THROW(s.validate(), InputError);
}

TEST(EnvStep, MultigoalRewardAtOrigin) {
  const EnvSpec s = make_env_spec("multigoal");
  EnvState st = env_reset(s, 0);
  st.physical.setZero();
  const StepResult r = env_step(st, Eigen::Vector2d::Zero());
  EXPECT_DOUBLE_EQ(r.reward, -5.0);
  EXPECT_FALSE(r.done);
}

TEST(EnvStep, MultigoalRewardIncludesActionCost) {
  const EnvSpec s = make_env_spec("multigoal");
  EnvState st = env_reset(s, 0);
  st.physical = Eigen::Vector2d(1.0, 1.0);
  const StepResult r = env_step(st, Eigen::Vector2d(0.5, -1.0));
  // new position (1.5, 0), nearest goal (5, 0)
  EXPECT_NEAR(r.reward, -3.5 - 0.01 * 1.25, 1e-12);
}

TEST(EnvStep, MultigoalTerminatesInsideGoal) {
  const EnvSpec s = make_env_spec("multigoal");
  EnvState st = env_reset(s, 0);
  st.physical = Eigen::Vector2d(0.0, -4.0);
  const StepResult r = env_step(st, Eigen::Vector2d(0.2, -0.7));
  EXPECT_TRUE(r.done);
  EXPECT_TRUE(r.terminal);
  EXPECT_EQ(multigoal_reached(r.state), 3);
  EXPECT_THROW(env_step(r.state, Eigen::Vector2d::Zero()), ContractError);
}

TEST(EnvStep, ActionsAreClamped) {
  const EnvSpec s = make_env_spec("multigoal");
  EnvState st = env_reset(s, 0);
  st.physical.setZero();
  const StepResult big = env_step(st, Eigen::Vector2d(30.0, -0.5));
  const StepResult clamped = env_step(st, Eigen::Vector2d(1.0, -0.5));
  EXPECT_EQ(big.state.physical, clamped.state.physical);
}

TEST(EnvStep, NonFiniteOrWrongLengthActionThrows) {
  const EnvSpec s = make_env_spec("cartpole");
  const EnvState st = env_reset(s, 0);
  EXPECT_THROW(env_step(st, Eigen::VectorXd::Constant(1, std::nan(""))), InputError);
  EXPECT_THROW(env_step(st, Eigen::VectorXd::Zero(2)), InputError);
  EXPECT_THROW(env_step(EnvState{}, Eigen::VectorXd::Zero(1)), ContractError);
}

TEST(EnvStep, CartpoleFailsPastAngleLimit) {
  const EnvSpec s = make_env_spec("cartpole");
  EnvState st = env_reset(s, 0);
  st.physical << 0.0, 0.0, 0.209, 2.0;
  const StepResult r = env_step(st, constant_action(s, 0.0));
  EXPECT_GT(r.state.physical[2], 0.21);
  EXPECT_TRUE(r.terminal);
  EXPECT_DOUBLE_EQ(r.reward, 1.0);
}

TEST(EnvStep, CartpoleEndsAtHorizon) {
  EnvSpec s = make_env_spec("cartpole");
  s.horizon = 3;
  EnvState st = env_reset(s, 0);
  for (int t = 0; t < 3; ++t) {
    const StepResult r = env_step(st, constant_action(s, 0.0));
    EXPECT_EQ(r.done, t == 2);
    EXPECT_FALSE(r.terminal);
    st = r.state;
  }
}

TEST(EnvStep, SwingupRewardIsCosineOfAngle) {
  const EnvSpec s = make_env_spec("cartpole_swingup");
  const StepResult r = env_step(env_reset(s, 1), constant_action(s, 0.3));
  EXPECT_DOUBLE_EQ(r.reward, std::cos(r.state.physical[2]));
  EXPECT_EQ(r.state.observation.size(), 5);
}

TEST(EnvStep, DoublePendulumConservesEnergyWithoutTorque) {
  const EnvSpec s = make_env_spec("double_pendulum");
  EnvState st = env_reset(s, 0);
  st.physical << 1.2, -0.7, 0.5, -0.3;
  const double e0 = double_pendulum_energy(s, st.physical);
  for (int t = 0; t < 100; ++t) st = env_step(st, constant_action(s, 0.0)).state;
  EXPECT_LE(std::abs(double_pendulum_energy(s, st.physical) - e0) / std::abs(e0), 1e-3);
}

TEST(EnvProperty, DeterministicGivenSeedAndActions) {
  for (int c = 0; c < kPropertyCases; ++c) {
    Gen g(c);
    const auto names = env_names();
    const EnvSpec s = make_env_spec(names[static_cast<std::size_t>(g.integer(0, 3))]);
    const std::uint64_t seed = static_cast<std::uint64_t>(g.integer(0, 1000000));
    std::vector<Eigen::VectorXd> actions;
    for (int t = 0; t < 20; ++t) actions.push_back(g.vector(s.action_dim, 2.0));
    EnvState a = env_reset(s, seed), b = env_reset(s, seed);
    for (const auto& act : actions) {
      if (a.done) break;
      const StepResult ra = env_step(a, act), rb = env_step(b, act);
      ASSERT_EQ(ra.state.physical, rb.state.physical);
      ASSERT_EQ(ra.reward, rb.reward);
      a = ra.state;
      b = rb.state;
    }
  }
}

TEST(EnvProperty, ObservationsStayFiniteOverFullHorizon) {
  for (int c = 0; c < kPropertyCases; ++c) {
    Gen g(1000 + c);
    const auto names = env_names();
    EnvSpec s = make_env_spec(names[static_cast<std::size_t>(g.integer(0, 3))]);
    s.horizon = std::min(s.horizon, 200);
    EnvState st = env_reset(s, static_cast<std::uint64_t>(c));
    while (!st.done) {
      const StepResult r = env_step(st, g.vector(s.action_dim, 3.0));
      ASSERT_TRUE(r.state.observation.allFinite()) << s.name;
      ASSERT_TRUE(std::isfinite(r.reward));
      st = r.state;
    }
  }
}

TEST(Rollout, HorizonOneGivesOneTransition) {
  const EnvSpec s = make_env_spec("cartpole");
  Rng rng(1);
  const Trajectory t = rollout(s, [&](const Eigen::VectorXd&, Rng&) { return constant_action(s, 0.0); }, 1, rng);
  EXPECT_EQ(t.steps.size(), 1u);
  EXPECT_TRUE(t.truncated);
}

TEST(Rollout, RepeatIsBitwiseIdentical) {
  const EnvSpec s = make_env_spec("cartpole_swingup");
  const Policy pol = [](const Eigen::VectorXd& o, Rng&) { return Eigen::VectorXd::Constant(1, std::sin(3.0 * o[0])); };
  Rng r1(5), r2(5);
  const Trajectory a = rollout(s, pol, 100, r1), b = rollout(s, pol, 100, r2);
  ASSERT_EQ(a.steps.size(), b.steps.size());
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    EXPECT_EQ(a.steps[i].next_state, b.steps[i].next_state);
    EXPECT_EQ(a.steps[i].reward, b.steps[i].reward);
  }
}

TEST(Rollout, ZeroPolicyOnMultigoalNeverMoves) {
  const EnvSpec s = make_env_spec("multigoal");
  Rng rng(2);
  const Trajectory t = rollout(s, [](const Eigen::VectorXd&, Rng&) { return Eigen::VectorXd::Zero(2); }, s.horizon, rng);
  EXPECT_EQ(static_cast<int>(t.steps.size()), s.horizon);
  EXPECT_EQ(t.final_goal, -1);
  for (const auto& tr : t.steps) {
    EXPECT_EQ(tr.state, t.steps.front().state);
    EXPECT_FALSE(tr.done);
  }
}

TEST(Rollout, TransitionsChain) {
  const EnvSpec s = make_env_spec("double_pendulum");
  Rng rng(3);
  const Trajectory t =
      rollout(s, [](const Eigen::VectorXd&, Rng& r) { return Eigen::VectorXd::Constant(1, r.uniform(-1.0, 1.0)); }, 50,
              rng);
  for (std::size_t i = 1; i < t.steps.size(); ++i) EXPECT_EQ(t.steps[i].state, t.steps[i - 1].next_state);
  double sum = 0.0;
  for (const auto& tr : t.steps) sum += tr.reward;
  EXPECT_DOUBLE_EQ(t.total_reward(), sum);
}

}  // namespace
}  // namespace wgf::envs
