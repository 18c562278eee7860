#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "wgflow/error.hpp"
#include "wgflow/rl/indirect.hpp"

namespace wgf::rl {
namespace {

using test_util::fd_gradient;
using test_util::Gen;
using test_util::kPropertyCases;
using test_util::rel_error;

envs::Transition transition(const Eigen::VectorXd& s, const Eigen::VectorXd& a, double r, const Eigen::VectorXd& s2,
                            bool done) {
  return envs::Transition{s, a, r, s2, done};
}

// Random trajectories of a 2-d state, 1-d action toy problem.
std::vector<envs::Trajectory> random_trajectories(Gen& g, int count, int max_len) {
  std::vector<envs::Trajectory> out(static_cast<std::size_t>(count));
  for (auto& t : out) {
    const int len = g.integer(1, max_len);
    Eigen::VectorXd s = g.vector(2);
    for (int k = 0; k < len; ++k) {
      const Eigen::VectorXd s2 = g.vector(2);
      t.steps.push_back(transition(s, g.vector(1), g.real(-2.0, 2.0), s2, k == len - 1 && g.integer(0, 1) == 1));
      s = s2;
    }
  }
  return out;
}

GaussianPolicyLayout toy_layout() { return GaussianPolicyLayout::make(2, {3}, 1); }

Eigen::VectorXd toy_particle(Gen& g) {
  Eigen::VectorXd p = g.vector(toy_layout().particle_size(), 0.5);
  return p;
}

Eigen::VectorXd grad_log_prob(const GaussianPolicyLayout& l, const Eigen::VectorXd& p, const Eigen::VectorXd& s,
                              const Eigen::VectorXd& a) {
  return weighted_log_prob_grad(l, p, s, a, Eigen::VectorXd::Ones(1));
}

TEST(PolicySample, ZeroNoiseGivesMeanAndModeDensity) {
  Gen g(1);
  const auto l = toy_layout();
  const Eigen::VectorXd p = toy_particle(g);
  const Eigen::VectorXd s = g.vector(2);
  Rng rng(3);
  const PolicySample out = stochastic_policy_sample(l, p, s, rng, 0.0);
  EXPECT_EQ(out.action, nn::mlp_predict(l.network(p), s).col(0));
  const double log_std = p[p.size() - 1];
  EXPECT_NEAR(out.log_prob, -log_std - 0.5 * std::log(2.0 * std::numbers::pi), 1e-14);
}

TEST(PolicySample, GradLogProbMatchesFiniteDifferenceProperty) {
  const auto l = toy_layout();
  for (int c = 0; c < kPropertyCases; ++c) {
    Gen g(c);
    const Eigen::VectorXd p = toy_particle(g);
    const Eigen::VectorXd s = g.vector(2);
    Rng rng(static_cast<std::uint64_t>(c));
    const PolicySample out = stochastic_policy_sample(l, p, s, rng);
    const Eigen::VectorXd fd =
        fd_gradient([&](const Eigen::VectorXd& q) { return gaussian_log_prob(l, q, s, out.action); }, p);
    ASSERT_LE(rel_error(out.grad_log_prob, fd, 1e-6), 1e-4) << "case " << c;
    ASSERT_NEAR(out.log_prob, gaussian_log_prob(l, p, s, out.action), 1e-12);
  }
}

TEST(PolicySample, IdenticalParticlesAndSeedsGiveIdenticalSamples) {
  Gen g(2);
  const auto l = toy_layout();
  const Eigen::VectorXd p = toy_particle(g);
  const Eigen::VectorXd s = g.vector(2);
  Rng a(9), b(9);
  const PolicySample x = stochastic_policy_sample(l, p, s, a), y = stochastic_policy_sample(l, p, s, b);
  EXPECT_EQ(x.action, y.action);
  EXPECT_EQ(x.grad_log_prob, y.grad_log_prob);
}

TEST(Reinforce, ZeroRewardsGiveZeroGradient) {
  Gen g(3);
  auto trajs = random_trajectories(g, 4, 6);
  for (auto& t : trajs)
    for (auto& tr : t.steps) tr.reward = 0.0;
  const Eigen::VectorXd grad = reinforce_grad(toy_layout(), toy_particle(g), trajs, 0.9);
  EXPECT_EQ(grad.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Reinforce, SingleStepNoDiscountIsScoreTimesReward) {
  Gen g(4);
  const auto l = toy_layout();
  const Eigen::VectorXd p = toy_particle(g);
  envs::Trajectory t;
  t.steps.push_back(transition(g.vector(2), g.vector(1), 1.7, g.vector(2), true));
  const Eigen::VectorXd grad = reinforce_grad(l, p, {t}, 0.0);
  const Eigen::VectorXd expect = grad_log_prob(l, p, t.steps[0].state, t.steps[0].action) * 1.7;
  EXPECT_LE(rel_error(grad, expect), 1e-14);
}

TEST(Reinforce, TwoStepHandExpansion) {
  Gen g(5);
  const auto l = toy_layout();
  const Eigen::VectorXd p = toy_particle(g);
  const double gamma = 0.8, r1 = 1.5, r2 = -0.5;
  envs::Trajectory t;
  const Eigen::VectorXd s1 = g.vector(2), s2 = g.vector(2), s3 = g.vector(2);
  const Eigen::VectorXd a1 = g.vector(1), a2 = g.vector(1);
  t.steps.push_back(transition(s1, a1, r1, s2, false));
  t.steps.push_back(transition(s2, a2, r2, s3, true));
  const Eigen::VectorXd q1 = grad_log_prob(l, p, s1, a1) * (r1 + gamma * r2);
  const Eigen::VectorXd q2 = grad_log_prob(l, p, s2, a2) * (gamma * r2);
  EXPECT_LE(rel_error(reinforce_grad(l, p, {t}, gamma, false, true), 0.5 * (q1 + q2)), 1e-13);
  EXPECT_LE(rel_error(reinforce_grad(l, p, {t}, gamma, false, false), q1 + q2), 1e-13);
  // two copies average to the same value
  EXPECT_LE(rel_error(reinforce_grad(l, p, {t, t}, gamma, false, false), q1 + q2), 1e-13);
}

TEST(Reinforce, EmptyInputThrows) {
  Gen g(6);
  EXPECT_THROW(reinforce_grad(toy_layout(), toy_particle(g), {}, 0.9), InputError);
  EXPECT_THROW(reinforce_grad(toy_layout(), toy_particle(g), {envs::Trajectory{}}, 0.9), InputError);
}

TEST(ReinforceProperty, RewardAndTemperatureScalingCancel) {
  const auto l = toy_layout();
  for (int c = 0; c < kPropertyCases; ++c) {
    Gen g(100 + c);
    const Eigen::VectorXd p = toy_particle(g);
    auto trajs = random_trajectories(g, g.integer(1, 4), 8);
    const double gamma = g.real(0.0, 1.0), alpha = g.real(0.5, 10.0), scale = g.real(0.1, 20.0);
    const Eigen::VectorXd base = reinforce_grad(l, p, trajs, gamma) / alpha;
    for (auto& t : trajs)
      for (auto& tr : t.steps) tr.reward *= scale;
    const Eigen::VectorXd scaled = reinforce_grad(l, p, trajs, gamma) / (alpha * scale);
    ASSERT_LE(rel_error(base, scaled), 1e-12) << "case " << c;
  }
}

TEST(ReinforceProperty, StandardizedGradientIgnoresRewardScale) {
  const auto l = toy_layout();
  for (int c = 0; c < kPropertyCases; ++c) {
    Gen g(300 + c);
    const Eigen::VectorXd p = toy_particle(g);
    auto trajs = random_trajectories(g, g.integer(2, 4), 8);
    const double gamma = g.real(0.0, 1.0), scale = g.real(0.1, 20.0);
    const Eigen::VectorXd base = reinforce_grad(l, p, trajs, gamma, true);
    for (auto& t : trajs)
      for (auto& tr : t.steps) tr.reward *= scale;
    ASSERT_LE(rel_error(base, reinforce_grad(l, p, trajs, gamma, true)), 1e-10) << "case " << c;
  }
}

CriticParams constant_critic(int obs_dim, double value, double gamma) {
  Rng rng(0);
  CriticParams c = make_critic(obs_dim, {4}, 0.1, gamma, rng);
  c.value.flat().setZero();
  c.value.flat()[c.value.flat().size() - 1] = value;  // output bias
  return c;
}

TEST(A2c, ZeroCriticWeightsEachStepByItsReward) {
  Gen g(7);
  const auto l = toy_layout();
  const Eigen::VectorXd p = toy_particle(g);
  const auto trajs = random_trajectories(g, 3, 5);
  const CriticParams critic = constant_critic(2, 0.0, 0.9);
  Eigen::VectorXd expect = Eigen::VectorXd::Zero(l.particle_size());
  for (const auto& t : trajs) {
    double disc = 1.0;
    for (const auto& tr : t.steps) {
      expect += grad_log_prob(l, p, tr.state, tr.action) * (disc * tr.reward / static_cast<double>(t.steps.size()));
      disc *= 0.9;
    }
  }
  expect /= 3.0;
  EXPECT_LE(rel_error(a2c_grad(l, p, trajs, critic, false, true), expect), 1e-12);
}

TEST(A2c, PerfectCriticOnConstantRewardChainGivesZeroAdvantage) {
  Gen g(8);
  const auto l = toy_layout();
  const Eigen::VectorXd p = toy_particle(g);
  const double r = 1.3, gamma = 0.95;
  envs::Trajectory t;
  Eigen::VectorXd s = g.vector(2);
  for (int k = 0; k < 20; ++k) {
    const Eigen::VectorXd s2 = g.vector(2);
    t.steps.push_back(transition(s, g.vector(1), r, s2, false));
    s = s2;
  }
  const CriticParams critic = constant_critic(2, r / (1.0 - gamma), gamma);
  EXPECT_LE(a2c_grad(l, p, {t}, critic).norm(), 1e-6);
}

TEST(A2c, MatchesReinforceInExpectationOnBandit) {
  // single state, one-step episodes, reward -(a - 1)^2; a constant critic is a baseline
  const auto l = GaussianPolicyLayout::make(1, {}, 1);
  Eigen::VectorXd p(l.particle_size());
  p << 0.3, 0.2, std::log(0.8);
  const CriticParams critic = constant_critic(1, -1.5, 0.99);
  const Eigen::VectorXd s = Eigen::VectorXd::Ones(1);
  Rng rng(11);
  const int n = 10000;
  Eigen::MatrixXd diff(l.particle_size(), n);
  for (int k = 0; k < n; ++k) {
    const PolicySample x = stochastic_policy_sample(l, p, s, rng);
    envs::Trajectory t;
    t.steps.push_back(transition(s, x.action, -std::pow(x.action[0] - 1.0, 2), s, true));
    diff.col(k) = a2c_grad(l, p, {t}, critic) - reinforce_grad(l, p, {t}, 0.99);
  }
  const Eigen::VectorXd mean = diff.rowwise().mean();
  for (Eigen::Index d = 0; d < diff.rows(); ++d) {
    const double se = std::sqrt((diff.row(d).array() - mean[d]).square().sum() / (n - 1.0) / n);
    EXPECT_LE(std::abs(mean[d]), 3.0 * se) << "coordinate " << d;
  }
}

TEST(Critic, ZeroRewardsAndZeroValueLeaveCriticUnchanged) {
  Gen g(9);
  auto trajs = random_trajectories(g, 3, 5);
  for (auto& t : trajs)
    for (auto& tr : t.steps) tr.reward = 0.0;
  const CriticParams critic = constant_critic(2, 0.0, 0.9);
  EXPECT_EQ(critic_td_update(critic, trajs).value.flat(), critic.value.flat());
}

TEST(Critic, LinearSingleTransitionClosedForm) {
  Rng rng(4);
  CriticParams critic = make_critic(2, {}, 0.05, 0.9, rng);
  critic.value.flat() << 0.4, -0.3, 0.2;  // w1, w2, b
  const Eigen::Vector2d s(1.0, 2.0), s2(-0.5, 0.5);
  envs::Trajectory t;
  t.steps.push_back(transition(s, Eigen::VectorXd::Zero(1), 0.7, s2, false));
  const double v = 0.4 * 1.0 - 0.3 * 2.0 + 0.2;
  const double y = 0.7 + 0.9 * (0.4 * -0.5 - 0.3 * 0.5 + 0.2);
  Eigen::Vector3d expect(0.4, -0.3, 0.2);
  expect -= 0.05 * (v - y) * Eigen::Vector3d(1.0, 2.0, 1.0);
  EXPECT_LE(rel_error(critic_td_update(critic, {t}).value.flat(), expect), 1e-15);
  EXPECT_NEAR(critic_td_loss(critic, {t}), 0.5 * (v - y) * (v - y), 1e-15);
}

TEST(Critic, TdLossNonIncreasingOverRepeatedPasses) {
  Gen g(10);
  const auto trajs = random_trajectories(g, 5, 10);
  Rng rng(5);
  CriticParams critic = make_critic(2, {8}, 1e-2, 0.5, rng);
  double last = critic_td_loss(critic, trajs);
  for (int k = 0; k < 10; ++k) {
    critic = critic_td_update(critic, trajs);
    const double now = critic_td_loss(critic, trajs);
    EXPECT_LE(now, last) << "pass " << k;
    last = now;
  }
}

IndirectConfig small_config(int particles) {
  IndirectConfig cfg;
  cfg.particles = particles;
  cfg.batch_size = 40 * particles;
  cfg.horizon = 40;
  cfg.hidden = {4};
  cfg.eval_episodes = 0;
  cfg.jko.w2_scale = 0.0;
  return cfg;
}

TEST(IpWgf, SingleParticleWithoutW2IsPlainPolicyGradient) {
  const envs::EnvSpec env = envs::make_env_spec("cartpole");
  IndirectConfig cfg = small_config(1);
  cfg.jko.optimizer.kind = nn::OptimizerKind::sgd;
  cfg.jko.optimizer.learning_rate = 0.01;
  Rng init(1);
  PolicyParticleSet set = make_policy_particles(env, cfg, init);
  const Eigen::VectorXd before = set.current.points.col(0);
  Rng r1(2), r2(2);
  const Eigen::MatrixXd score = policy_scores(env, set.layout, set.current.points, nullptr, cfg, r2);
  const IndirectStats st = ip_wgf_iteration(set, env, nullptr, cfg, r1);
  EXPECT_LE(rel_error(set.current.points.col(0) - before, 0.01 * score.col(0)), 1e-12);
  EXPECT_EQ(st.env_steps, 40);
  EXPECT_EQ(set.previous.points.col(0), before);
}

TEST(IpWgf, ZeroScaleMatchesHandWrittenSvpgStep) {
  const envs::EnvSpec env = envs::make_env_spec("cartpole");
  IndirectConfig cfg = small_config(4);
  cfg.jko.kernel_bandwidth = 3.0;
  cfg.jko.optimizer.learning_rate = 5e-3;
  Rng init(3);
  PolicyParticleSet set = make_policy_particles(env, cfg, init);
  Eigen::MatrixXd x = set.current.points;
  const Eigen::Index d = x.rows(), m = x.cols();
  Eigen::MatrixXd mom = Eigen::MatrixXd::Zero(d, m), sec = Eigen::MatrixXd::Zero(d, m);
  Rng r1(4), r2(4);
  for (int step = 1; step <= 3; ++step) {
    ip_wgf_iteration(set, env, nullptr, cfg, r1);
    const Eigen::MatrixXd score = policy_scores(env, set.layout, x, nullptr, cfg, r2);
    Eigen::MatrixXd dir(d, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      Eigen::VectorXd acc = Eigen::VectorXd::Zero(d);
      for (Eigen::Index j = 0; j < m; ++j) {
        double sq = 0.0;
        for (Eigen::Index c = 0; c < d; ++c) sq += (x(c, i) - x(c, j)) * (x(c, i) - x(c, j));
        const double k = std::exp(-sq / 3.0);
        const double r = 2.0 * k / 3.0;
        for (Eigen::Index c = 0; c < d; ++c) acc[c] += k * score(c, j) + r * (x(c, i) - x(c, j));
      }
      dir.col(i) = acc / static_cast<double>(m);
    }
    const double c1 = 1.0 - std::pow(0.9, step), c2 = 1.0 - std::pow(0.999, step);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index c = 0; c < d; ++c) {
        const double gr = -dir(c, i);
        mom(c, i) = 0.9 * mom(c, i) + (1.0 - 0.9) * gr;
        sec(c, i) = 0.999 * sec(c, i) + (1.0 - 0.999) * gr * gr;
        x(c, i) -= 5e-3 * (mom(c, i) / c1) / (std::sqrt(sec(c, i) / c2) + 1e-8);
      }
    ASSERT_TRUE((set.current.points.array() == x.array()).all()) << "step " << step;
  }
}

TEST(IpWgf, HugeTemperatureLeavesOnlyRepulsionAndTransport) {
  const envs::EnvSpec env = envs::make_env_spec("cartpole");
  IndirectConfig cfg = small_config(4);
  cfg.alpha = 1e300;
  cfg.jko.w2_scale = 0.4;
  Rng init(5);
  PolicyParticleSet set = make_policy_particles(env, cfg, init);
  set.previous = flow::ParticleEnsemble(set.current.points.array() + 0.05);
  const flow::ParticleEnsemble cur = set.current, prev = set.previous;
  nn::OptimizerState opt(cfg.jko.optimizer);
  const flow::ScoreFn zero = [](const Eigen::MatrixXd& p) { return Eigen::MatrixXd::Zero(p.rows(), p.cols()); };
  const flow::ParticleEnsemble expect = flow::jko_step(cur, prev, zero, cfg.jko, opt);
  Rng rng(6);
  ip_wgf_iteration(set, env, nullptr, cfg, rng);
  EXPECT_LE(rel_error(set.current.points, expect.points), 1e-12);
}

TEST(IpWgf, PermutingParticlesPermutesTheUpdateWhenRewardsDoNotMatter) {
  const envs::EnvSpec env = envs::make_env_spec("cartpole");
  IndirectConfig cfg = small_config(5);
  cfg.alpha = 1e300;
  cfg.jko.w2_scale = 0.4;
  Rng init(7);
  PolicyParticleSet a = make_policy_particles(env, cfg, init);
  a.previous = flow::ParticleEnsemble(a.current.points + 0.1 * Rng(8).normal_matrix(a.current.dim(), 5));
  const std::vector<int> perm{3, 0, 4, 1, 2};
  PolicyParticleSet b = a;
  for (int i = 0; i < 5; ++i) {
    b.current.points.col(i) = a.current.points.col(perm[static_cast<std::size_t>(i)]);
    b.previous.points.col(i) = a.previous.points.col(perm[static_cast<std::size_t>(i)]);
  }
  Rng ra(9), rb(9);
  ip_wgf_iteration(a, env, nullptr, cfg, ra);
  ip_wgf_iteration(b, env, nullptr, cfg, rb);
  for (int i = 0; i < 5; ++i)
    EXPECT_LE(rel_error(b.current.points.col(i), a.current.points.col(perm[static_cast<std::size_t>(i)])), 1e-12);
}

TEST(IpWgf, ZeroRewardDynamicsStayBoundedOverHundredIterations) {
  const envs::EnvSpec env = envs::make_env_spec("cartpole");
  IndirectConfig cfg = small_config(6);
  cfg.jko.w2_scale = 0.4;
  cfg.standardize_returns = false;
  Rng init(10);
  PolicyParticleSet set = make_policy_particles(env, cfg, init);
  const double start = set.current.points.cwiseAbs().maxCoeff();
  Rng rng(11);
  const flow::ScoreFn zero_reward = [&](const Eigen::MatrixXd& pts) {
    Eigen::MatrixXd s(pts.rows(), pts.cols());
    for (Eigen::Index i = 0; i < pts.cols(); ++i) {
      auto trajs = collect_steps(env, set.layout, pts.col(i), cfg.batch_size / cfg.particles, cfg.horizon, rng);
      for (auto& t : trajs)
        for (auto& tr : t.steps) tr.reward = 0.0;
      s.col(i) = reinforce_grad(set.layout, pts.col(i), trajs, cfg.gamma) / cfg.alpha;
    }
    return s;
  };
  const flow::ScoreFn zero = [](const Eigen::MatrixXd& p) { return Eigen::MatrixXd::Zero(p.rows(), p.cols()); };
  flow::ParticleEnsemble free_cur = set.current, free_prev = set.previous;
  nn::OptimizerState free_opt(cfg.jko.optimizer);
  for (int it = 0; it < 100; ++it) {
    flow::ParticleEnsemble next = flow::jko_step(set.current, set.previous, zero_reward, cfg.jko, set.optimizer);
    set.previous = set.current;
    set.current = next;
    flow::ParticleEnsemble free_next = flow::jko_step(free_cur, free_prev, zero, cfg.jko, free_opt);
    free_prev = free_cur;
    free_cur = free_next;
  }
  // Adam moves each coordinate by at most about lr per step
  EXPECT_TRUE(set.current.points.allFinite());
  EXPECT_LE(set.current.points.cwiseAbs().maxCoeff(), start + 100 * cfg.jko.optimizer.learning_rate * 1.01);
  EXPECT_EQ(set.current.points, free_cur.points);
}

TEST(IndirectConfig, RejectsInvalidSettings) {
  IndirectConfig cfg;
  cfg.batch_size = cfg.particles - 1;
  EXPECT_THROW(cfg.validate(), InputError);
  cfg = IndirectConfig{};
  cfg.alpha = 0.0;
  EXPECT_THROW(cfg.validate(), InputError);
  EXPECT_THROW(parse_estimator("ppo"), InputError);
}

}  // namespace
}  // namespace wgf::rl
