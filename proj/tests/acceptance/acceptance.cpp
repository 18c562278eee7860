#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "wgflow/error.hpp"
#include "wgflow/flow/gradients.hpp"
#include "wgflow/flow/transport.hpp"
#include "wgflow/harness/experiments.hpp"
#include "wgflow/rl/direct.hpp"
#include "wgflow/rl/indirect.hpp"
#include "wgflow/rng.hpp"
#include "wgflow/targets/bnn.hpp"

namespace {

using namespace wgf;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double rel_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double floor) {
  const double scale = std::max({a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff(), floor});
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd x, double h) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = f(x);
    x[i] = keep - h;
    const double down = f(x);
    x[i] = keep;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

// Collects metric values per iteration for one seed.
struct MetricTrace {
  std::map<std::string, std::vector<std::pair<long, double>>> series;
  harness::MetricSink sink() {
    return [this](long it, long, const std::string& metric, double v) { series[metric].emplace_back(it, v); };
  }
  double last(const std::string& metric) const { return series.at(metric).back().second; }
  double best(const std::string& metric) const {
    double b = -1e300;
    for (const auto& [it, v] : series.at(metric)) b = std::max(b, v);
    return b;
  }
};

// 1 -------------------------------------------------------------------------
Outcome criterion1() {
  Rng rng = Rng::stream(1, "acceptance");
  double worst = 0.0;
  const int cases = 120;
  for (int c = 0; c < cases; ++c) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.index(5));
    const Eigen::Index m = 1 + static_cast<Eigen::Index>(rng.index(8));
    const flow::ParticleEnsemble cur(rng.normal_matrix(d, m));
    const flow::ParticleEnsemble prev(rng.normal_matrix(d, m));
    const double lambda = rng.uniform(0.2, 5.0);
    const Eigen::MatrixXd g = flow::w2_gradient(cur, prev, lambda);
    for (Eigen::Index i = 0; i < m; ++i) {
      const Eigen::VectorXd fd = fd_gradient(
          [&](const Eigen::VectorXd& x) { return flow::w2_surrogate(x, prev, lambda); }, cur.points.col(i), 1e-5);
      worst = std::max(worst, rel_error(g.col(i), fd, 1e-8));
    }
  }
  return {worst <= 1e-6, std::to_string(cases) + " cases, worst rel error " + fmt("%.2e", worst) + " (limit 1e-6)"};
}

// 2 -------------------------------------------------------------------------
Outcome criterion2() {
  Rng rng = Rng::stream(2, "acceptance");
  std::map<std::string, double> worst;
  const auto note = [&](const std::string& path, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    worst[path] = std::max(worst[path], rel_error(a, b, 1e-6));
  };
  for (int c = 0; c < 20; ++c) {
    // indirect Gaussian policy
    const rl::GaussianPolicyLayout layout = rl::GaussianPolicyLayout::make(4, {25, 16}, 1);
    const Eigen::VectorXd p = rl::gaussian_policy_init(layout, 0.1, -0.5, rng);
    const Eigen::VectorXd s = rng.normal_vector(4);
    const rl::PolicySample smp = rl::stochastic_policy_sample(layout, p, s, rng);
    note("policy", smp.grad_log_prob,
         fd_gradient([&](const Eigen::VectorXd& q) { return rl::gaussian_log_prob(layout, q, s, smp.action); }, p, 1e-5));

    // Q parameters and action input; ReLU networks use a small step so both sides stay on one linear piece
    nn::MlpParams q = rl::make_q_network(3, 2, {16, 16}, rng);
    const Eigen::MatrixXd states = rng.normal_matrix(3, 4), actions = rng.normal_matrix(2, 4);
    const Eigen::VectorXd y = rng.normal_vector(4);
    const auto q_loss = [&](const Eigen::VectorXd& flat) {
      nn::MlpParams w = q;
      w.flat() = flat;
      return 0.5 * (rl::q_values(w, states, actions) - y).squaredNorm() / 4.0;
    };
    {
      nn::MlpParams w = q;
      nn::OptimizerState sgd(nn::OptimizerSettings{.kind = nn::OptimizerKind::sgd, .learning_rate = 1.0});
      rl::jq_step(w, sgd, states, actions, y);
      note("q", q.flat() - w.flat(), fd_gradient(q_loss, q.flat(), 1e-7));
    }
    const Eigen::MatrixXd ga = rl::q_action_gradient(q, states, actions);
    for (Eigen::Index j = 0; j < 4; ++j)
      note("q_action", ga.col(j), fd_gradient([&](const Eigen::VectorXd& a) {
             return rl::q_values(q, states.col(j), a)[0];
           }, actions.col(j), 1e-5));

    // V network through jv_step
    const rl::Actor pi =
        rl::Actor::explicit_gaussian(3, 2, {16}, Eigen::VectorXd::Constant(2, -1.0), Eigen::VectorXd::Constant(2, 1.0), rng, 2);
    nn::MlpParams v = rl::make_v_network(3, {16, 16}, rng);
    const std::uint64_t vs = rng.next_u64();
    Rng r1(vs), r2(vs);
    const Eigen::VectorXd target = rl::v_regression_target(q, pi, states, 4, false, r1);
    const auto v_loss = [&](const Eigen::VectorXd& flat) {
      nn::MlpParams w = v;
      w.flat() = flat;
      return 0.5 * (nn::mlp_predict(w, states).row(0).transpose() - target).squaredNorm() / 4.0;
    };
    {
      nn::MlpParams w = v;
      nn::OptimizerState sgd(nn::OptimizerSettings{.kind = nn::OptimizerKind::sgd, .learning_rate = 1.0});
      rl::jv_step(w, sgd, q, pi, states, 4, r2);
      note("v", v.flat() - w.flat(), fd_gradient(v_loss, v.flat(), 1e-7));
    }

    // sampling network and explicit policy, frozen noise
    for (const rl::Actor& actor :
         {rl::Actor::sampling_network(3, 2, 2, {16, 16}, Eigen::VectorXd::Constant(2, -1.0),
                                      Eigen::VectorXd::Constant(2, 1.0), rng),
          pi}) {
      const Eigen::MatrixXd noise = rng.normal_matrix(actor.noise_dim, 12);
      const rl::ActionSamples smp2 = rl::actions_from_noise(actor, states, 3, noise);
      const Eigen::MatrixXd wgt = rng.normal_matrix(2, 12);
      note(actor.kind == rl::ActorKind::sampling_network ? "sampling_network" : "explicit_policy",
           rl::actor_backward(actor, smp2, wgt), fd_gradient([&](const Eigen::VectorXd& flat) {
             rl::Actor b = actor;
             b.net.flat() = flat;
             return (rl::actions_from_noise(b, states, 3, noise, smp2.component).actions.array() * wgt.array()).sum();
           }, actor.net.flat(), 1e-6));
    }

    // BNN log posterior
    targets::BnnPosteriorSpec spec;
    spec.input_dim = 2;
    spec.hidden = 10;
    const Eigen::VectorXd particle = targets::bnn_initial_particle(spec, rng);
    const Eigen::MatrixXd x = rng.normal_matrix(2, 8);
    const Eigen::VectorXd t = rng.normal_vector(8);
    note("bnn", targets::bnn_logp_grad(spec, particle, x, t, 50.0).grad, fd_gradient([&](const Eigen::VectorXd& w) {
           return targets::bnn_logp_grad(spec, w, x, t, 50.0).logp;
         }, particle, 1e-6));
  }
  bool ok = true;
  std::string detail;
  for (const auto& [path, e] : worst) {
    ok = ok && e <= 1e-4;
    detail += (detail.empty() ? "" : ", ") + path + " " + fmt("%.1e", e);
  }
  return {ok, "worst rel error per path (limit 1e-4): " + detail};
}

// 3 -------------------------------------------------------------------------
Outcome criterion3() {
  Rng rng = Rng::stream(3, "acceptance");
  double worst_gap = 0.0, worst_marginal = 0.0;
  for (int c = 0; c < 50; ++c) {
    const Eigen::Index m = 2 + static_cast<Eigen::Index>(rng.index(5));
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.index(3));
    const flow::ParticleEnsemble a(rng.normal_matrix(d, m)), b(rng.normal_matrix(d, m));
    const flow::TransportPlan plan = flow::entropic_plan(flow::squared_distance_matrix(a, b), 1e-3);
    const double exact = flow::exact_w2_squared(a, b);
    worst_gap = std::max(worst_gap, std::abs(plan.transport_cost - exact) / exact);
    const double target = 1.0 / static_cast<double>(m);
    worst_marginal = std::max({worst_marginal, (plan.weights.rowwise().sum().array() - target).abs().maxCoeff(),
                               (plan.weights.colwise().sum().array() - target).abs().maxCoeff()});
  }
  return {worst_gap <= 0.05 && worst_marginal <= 1e-6,
          "50 instances, worst relative cost gap " + fmt("%.2e", worst_gap) + " (limit 5%), worst marginal error " +
              fmt("%.1e", worst_marginal) + " (limit 1e-6)"};
}

// 4 -------------------------------------------------------------------------
double squared_error(const MetricTrace& t) {
  // target mean (0, 0), variances (1, 4)
  const double dm = t.last("mean_0") * t.last("mean_0") + t.last("mean_1") * t.last("mean_1");
  const double dv = std::pow(t.last("var_0") - 1.0, 2) + std::pow(t.last("var_1") - 4.0, 2);
  return dm + dv;
}

Outcome criterion4() {
  harness::RunConfig cfg(harness::Experiment::sample);
  cfg.set("particles", "64");
  cfg.set("iterations", "2000");
  cfg.set("log_every", "2000");
  MetricTrace jko, langevin;
  harness::run_seed(cfg, 0, jko.sink(), {});
  cfg.set("sample.method", "langevin");
  harness::run_seed(cfg, 0, langevin.sink(), {});
  const double mean_err = jko.last("mean_error"), var_err = jko.last("var_rel_error");
  const double se_jko = squared_error(jko), se_lan = squared_error(langevin);
  const bool ok = mean_err <= 0.1 && var_err <= 0.2 && se_jko <= 2.0 * se_lan;
  return {ok, "mean error " + fmt("%.4f", mean_err) + " (limit 0.1), worst variance rel error " + fmt("%.3f", var_err) +
                  " (limit 0.2), squared error JKO " + fmt("%.4f", se_jko) + " vs Langevin " + fmt("%.4f", se_lan) +
                  " (limit 2x)"};
}

// 5 -------------------------------------------------------------------------
Outcome criterion5() {
  harness::RunConfig cfg(harness::Experiment::sample);
  cfg.set("target.name", "mixture1d");
  cfg.set("target.offset", "3");
  cfg.set("particles", "50");
  cfg.set("iterations", "2000");
  cfg.set("log_every", "2000");
  bool ok = true;
  std::string detail;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    MetricTrace t;
    harness::run_seed(cfg, seed, t.sink(), {});
    const double a = t.last("mode_occupancy_0"), b = t.last("mode_occupancy_1");
    ok = ok && a >= 0.25 && b >= 0.25;
    detail += (seed ? ", " : "") + fmt("%.2f", a) + "/" + fmt("%.2f", b);
  }
  return {ok, "fraction within metrics.mode_radius of each mode per seed: " + detail + " (limit 0.25 each)"};
}

// 6 -------------------------------------------------------------------------
// States and actions are one-hot; transitions are stochastic and enter the batch as copies.
Outcome criterion6() {
  const double gamma = 0.9;
  const double reward[2][2] = {{1.0, 0.0}, {-0.5, 0.5}};
  const double stay[2] = {0.8, 0.3};  // probability of keeping the state, per action
  const auto p_next = [&](int s, int a, int s2) { return s2 == s ? stay[a] : 1.0 - stay[a]; };

  // oracle: soft value iteration with the importance target on the uniform two-point proposal,
  // V(s) = log mean_a exp(Q(s,a)) / q(a) - H(q) = log sum_a exp Q(s,a) - log 2
  double oracle[2][2] = {{0, 0}, {0, 0}};
  for (int sweep = 0; sweep < 2000; ++sweep) {
    double v[2];
    for (int s = 0; s < 2; ++s) v[s] = std::log(std::exp(oracle[s][0]) + std::exp(oracle[s][1])) - std::log(2.0);
    for (int s = 0; s < 2; ++s)
      for (int a = 0; a < 2; ++a) oracle[s][a] = reward[s][a] + gamma * (p_next(s, a, 0) * v[0] + p_next(s, a, 1) * v[1]);
  }

  const auto one_hot = [](int k) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(2);
    e[k] = 1.0;
    return e;
  };
  std::vector<envs::Transition> transitions;
  for (int s = 0; s < 2; ++s)
    for (int a = 0; a < 2; ++a)
      for (int s2 = 0; s2 < 2; ++s2)
        for (int k = 0; k < static_cast<int>(std::lround(10.0 * p_next(s, a, s2))); ++k)
          transitions.push_back({one_hot(s), one_hot(a), reward[s][a], one_hot(s2), false});
  const rl::TransitionBatch batch = rl::make_batch(transitions);

  rl::ActionProposal proposal;
  proposal.sample = [&](int n, Rng&) {
    Eigen::MatrixXd out(2, n);
    for (int j = 0; j < n; ++j) out.col(j) = one_hot(j % 2);
    return out;
  };
  proposal.log_density = [](const Eigen::MatrixXd& a) { return Eigen::VectorXd::Constant(a.cols(), -std::log(2.0)); };
  proposal.entropy = std::log(2.0);

  Rng init = Rng::stream(6, "q-init"), rng = Rng::stream(6, "acceptance");
  nn::MlpParams q = rl::make_q_network(2, 2, {32}, init);
  nn::MlpParams q_target = q;
  nn::OptimizerState opt(nn::OptimizerSettings{.kind = nn::OptimizerKind::adam, .learning_rate = 3e-3});
  const rl::QTargetSettings settings{.mode = rl::ValueMode::importance, .gamma = gamma, .reward_scale = 1.0,
                                     .value_samples = 2};
  for (int step = 0; step < 20000; ++step) {
    const Eigen::VectorXd y = rl::q_target(batch, rl::TargetNets{q_target, {}}, settings, proposal, rng);
    rl::jq_step(q, opt, batch.states, batch.actions, y);
    rl::polyak_update(q, q_target, 0.01);
  }
  double gap = 0.0;
  for (int s = 0; s < 2; ++s)
    for (int a = 0; a < 2; ++a)
      gap = std::max(gap, std::abs(rl::q_values(q, one_hot(s), one_hot(a))[0] - oracle[s][a]));
  return {gap <= 0.05, "sup-norm gap to soft value iteration " + fmt("%.4f", gap) + " (limit 0.05)"};
}

// 7, 8, 11 --------------------------------------------------------------------
harness::RunConfig indirect_defaults(const std::string& env) {
  harness::RunConfig cfg(harness::Experiment::rl_indirect);
  cfg.set("env.name", env);
  cfg.set("checkpoint", "false");
  return cfg;
}

Outcome criterion7() {
  const harness::RunConfig cfg = indirect_defaults("cartpole");
  bool ok = true;
  std::string detail;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    MetricTrace t;
    harness::run_seed(cfg, seed, t.sink(), {});
    const double best = t.best("mean_return"), last = t.last("mean_return");
    ok = ok && best >= 450.0;
    detail += (seed ? "; " : "") + std::string("seed ") + std::to_string(seed) + " best " + fmt("%.1f", best) +
              " final " + fmt("%.1f", last);
  }
  return {ok, "particle-mean return within 100 iterations (limit 450): " + detail};
}

Outcome criterion8() {
  harness::RunConfig cfg = indirect_defaults("cartpole_swingup");
  double wgf = 0.0, svpg = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    MetricTrace a, b;
    cfg.set("jko.w2_scale", "0.4");
    harness::run_seed(cfg, seed, a.sink(), {});
    cfg.set("jko.w2_scale", "0");
    harness::run_seed(cfg, seed, b.sink(), {});
    wgf += a.last("mean_return") / 5.0;
    svpg += b.last("mean_return") / 5.0;
  }
  const double limit = svpg - 0.05 * std::abs(svpg);
  return {wgf >= limit, "final mean return over 5 seeds: WGF " + fmt("%.2f", wgf) + ", SVPG " + fmt("%.2f", svpg) +
                            " (limit " + fmt("%.2f", limit) + ")"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome criterion11() {
  harness::RunConfig cfg = indirect_defaults("cartpole");
  cfg.set("iterations", "10");
  const fs::path root = fs::temp_directory_path() / "wgflow_acceptance_11";
  fs::remove_all(root);
  harness::run_experiment(cfg, root / "a");
  harness::run_experiment(cfg, root / "b");
  const std::string a = slurp(root / "a" / "run.csv"), b = slurp(root / "b" / "run.csv");
  const bool ok = !a.empty() && a == b;
  return {ok, "two single-threaded runs of the criterion-7 configuration (seed 0, 10 iterations): run.csv " +
                  std::to_string(a.size()) + " bytes, " + (ok ? "identical" : "different")};
}

// 9 -------------------------------------------------------------------------
Outcome criterion9() {
  harness::RunConfig cfg(harness::Experiment::rl_direct);
  const envs::EnvSpec env = harness::env_spec(cfg);
  rl::DirectConfig dcfg = harness::direct_config(cfg, env);
  dcfg.eval_episodes = 0;
  rl::DirectLearner learner = rl::make_direct_learner(env, dcfg, 0);
  const long epochs = cfg.integer("iterations");
  for (long e = 0; e < epochs; ++e) rl::direct_epoch(learner);
  Rng eval = Rng::stream(0, "acceptance-eval");
  const rl::DirectStats st = rl::evaluate_actor(env, learner.actor, 100, env.horizon, eval);
  bool ok = true;
  std::string counts;
  for (std::size_t k = 0; k < st.goal_counts.size(); ++k) {
    ok = ok && st.goal_counts[k] >= 10;
    counts += (k ? "/" : "") + std::to_string(st.goal_counts[k]);
  }
  return {ok, "terminal goal counts over 100 rollouts after " + std::to_string(epochs) + " epochs: " + counts +
                  " (limit 10 each), mean return " + fmt("%.2f", st.mean_return)};
}

// 10 ------------------------------------------------------------------------
Outcome criterion10() {
  harness::RunConfig cfg(harness::Experiment::regress);
  cfg.set("checkpoint", "false");
  bool ok = true;
  std::string detail;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    cfg.set("particles", "16");
    const double wgf = harness::run_seed(cfg, seed, [](long, long, const std::string&, double) {}, {}).at("test_ll");
    cfg.set("particles", "1");
    const double map = harness::run_seed(cfg, seed, [](long, long, const std::string&, double) {}, {}).at("test_ll");
    ok = ok && wgf >= map;
    detail += (seed ? "; " : "") + std::string("seed ") + std::to_string(seed) + " WGF " + fmt("%.3f", wgf) + " MAP " +
              fmt("%.3f", map);
  }
  return {ok, "test log-likelihood (WGF M=16 must be >= single-particle MAP): " + detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> criteria{criterion1, criterion2, criterion3, criterion4,
                                                       criterion5, criterion6, criterion7, criterion8,
                                                       criterion9, criterion10, criterion11};
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  if (selected.empty())
    for (int i = 1; i <= 11; ++i) selected.push_back(i);

  bool all = true;
  for (int k : selected) {
    if (k < 1 || k > 11) {
      std::fprintf(stderr, "unknown criterion %d\n", k);
      return 2;
    }
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[static_cast<std::size_t>(k - 1)]();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %d: %s - %s [%.1fs]\n", k, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
