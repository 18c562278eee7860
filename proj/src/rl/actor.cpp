#include "wgflow/rl/actor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "wgflow/error.hpp"

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

void set_box(Actor& a, const Eigen::VectorXd& low, const Eigen::VectorXd& high) {
  if (low.size() != a.action_dim || high.size() != a.action_dim) throw InputError("actor: action bounds have the wrong length");
  if (!((high - low).array() > 0.0).all()) throw InputError("actor: action bounds must satisfy low < high");
  a.center = 0.5 * (low + high);
  a.half_range = 0.5 * (high - low);
}

// log(1 - tanh(u)^2) = 2 (log 2 - u - softplus(-2u))
double log_one_minus_tanh_sq(double u) {
  const double x = -2.0 * u;
  const double softplus = std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
  return 2.0 * (std::numbers::ln2 - u - softplus);
}

}  // namespace

ActorKind parse_actor_kind(std::string_view name) {
  if (name == "sampling_network") return ActorKind::sampling_network;
  if (name == "explicit_gaussian") return ActorKind::explicit_gaussian;
  throw InputError("unknown actor kind '" + std::string(name) + "' (expected sampling_network or explicit_gaussian)");
}

std::string to_string(ActorKind k) {
  return k == ActorKind::sampling_network ? "sampling_network" : "explicit_gaussian";
}

Actor Actor::sampling_network(int obs_dim, int action_dim, int noise_dim, const std::vector<int>& hidden,
                              const Eigen::VectorXd& low, const Eigen::VectorXd& high, Rng& rng) {
  if (obs_dim < 1 || action_dim < 1 || noise_dim < 1) throw InputError("actor: dimensions must be positive");
  Actor a;
  a.kind = ActorKind::sampling_network;
  a.obs_dim = obs_dim;
  a.action_dim = action_dim;
  a.noise_dim = noise_dim;
  set_box(a, low, high);
  a.net = nn::MlpParams::glorot(sizes(obs_dim + noise_dim, hidden, action_dim), relu_then_identity(hidden.size()), rng);
  return a;
}

Actor Actor::explicit_gaussian(int obs_dim, int action_dim, const std::vector<int>& hidden, const Eigen::VectorXd& low,
                               const Eigen::VectorXd& high, Rng& rng, int components) {
  if (obs_dim < 1 || action_dim < 1) throw InputError("actor: dimensions must be positive");
  if (components < 1) throw InputError("actor: need at least one mixture component");
  Actor a;
  a.kind = ActorKind::explicit_gaussian;
  a.obs_dim = obs_dim;
  a.action_dim = action_dim;
  a.noise_dim = action_dim;
  a.components = components;
  set_box(a, low, high);
  a.net = nn::MlpParams::glorot(sizes(obs_dim, hidden, 2 * action_dim * components), relu_then_identity(hidden.size()),
                                rng);
  return a;
}

ActionSamples actions_from_noise(const Actor& actor, const Eigen::Ref<const Eigen::MatrixXd>& states, int per_state,
                                 const Eigen::Ref<const Eigen::MatrixXd>& noise, const std::vector<int>& components) {
  if (per_state < 1) throw InputError("actor: need at least one action per state");
  if (states.rows() != actor.obs_dim) throw InputError("actor: states have the wrong dimension");
  const Eigen::Index b = states.cols();
  const Eigen::Index n = b * per_state;
  if (noise.rows() != actor.noise_dim || noise.cols() != n) throw InputError("actor: noise has the wrong shape");
  const Eigen::Index k = actor.action_dim;

  ActionSamples s;
  s.per_state = per_state;
  s.noise = noise;
  Eigen::MatrixXd u(k, n);
  if (actor.kind == ActorKind::sampling_network) {
    Eigen::MatrixXd input(actor.obs_dim + actor.noise_dim, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      input.col(j).head(actor.obs_dim) = states.col(j / per_state);
      input.col(j).tail(actor.noise_dim) = noise.col(j);
    }
    nn::MlpForward fwd = nn::mlp_forward(actor.net, input);
    u = std::move(fwd.output);
    s.cache = std::move(fwd.cache);
  } else {
    const int nc = actor.components;
    if (components.empty()) {
      s.component.resize(static_cast<std::size_t>(n));
      for (Eigen::Index j = 0; j < n; ++j) s.component[static_cast<std::size_t>(j)] = static_cast<int>(j % per_state) % nc;
    } else {
      if (static_cast<Eigen::Index>(components.size()) != n) throw InputError("actor: component list has the wrong length");
      for (int c : components)
        if (c < 0 || c >= nc) throw InputError("actor: mixture component out of range");
      s.component = components;
    }
    nn::MlpForward fwd = nn::mlp_forward(actor.net, states);
    s.stddev.resize(k, n);
    s.log_std_free.resize(k, n);
    s.log_prob.resize(n);
    const double half_log2pi = 0.5 * std::log(2.0 * std::numbers::pi);
    const double log_half_range = actor.half_range.array().log().sum();
    Eigen::VectorXd log_comp(nc);
    for (Eigen::Index j = 0; j < n; ++j) {
      const Eigen::Index st = j / per_state;
      const Eigen::Index off = 2 * k * s.component[static_cast<std::size_t>(j)];
      double jac = 0.0;
      for (Eigen::Index d = 0; d < k; ++d) {
        const double raw = fwd.output(off + k + d, st);
        const double log_std = std::clamp(raw, kLogStdMin, kLogStdMax);
        s.log_std_free(d, j) = (raw > kLogStdMin && raw < kLogStdMax) ? 1.0 : 0.0;
        s.stddev(d, j) = std::exp(log_std);
        u(d, j) = fwd.output(off + d, st) + s.stddev(d, j) * noise(d, j);
        jac += log_one_minus_tanh_sq(u(d, j));
      }
      for (int c = 0; c < nc; ++c) {
        double lc = 0.0;
        for (Eigen::Index d = 0; d < k; ++d) {
          const double log_std = std::clamp(fwd.output(2 * k * c + k + d, st), kLogStdMin, kLogStdMax);
          const double z = (u(d, j) - fwd.output(2 * k * c + d, st)) * std::exp(-log_std);
          lc += -0.5 * z * z - log_std - half_log2pi;
        }
        log_comp[c] = lc;
      }
      const double top = log_comp.maxCoeff();
      const double mix = top + std::log((log_comp.array() - top).exp().sum() / static_cast<double>(nc));
      s.log_prob[j] = mix - jac - log_half_range;
    }
    s.cache = std::move(fwd.cache);
  }
  s.squashed = u.array().tanh().matrix();
  s.actions = (s.squashed.array().colwise() * actor.half_range.array()).colwise() + actor.center.array();
  return s;
}

ActionSamples sample_actions(const Actor& actor, const Eigen::Ref<const Eigen::MatrixXd>& states, int per_state,
                             Rng& rng, double noise_scale) {
  if (per_state < 1) throw InputError("actor: need at least one action per state");
  const Eigen::Index n = states.cols() * per_state;
  const Eigen::MatrixXd noise = noise_scale * rng.normal_matrix(actor.noise_dim, n);
  std::vector<int> components;
  if (actor.kind == ActorKind::explicit_gaussian && per_state % actor.components != 0) {
    components.resize(static_cast<std::size_t>(n));
    for (int& c : components) c = static_cast<int>(rng.index(static_cast<std::size_t>(actor.components)));
  }
  return actions_from_noise(actor, states, per_state, noise, components);
}

ActionSamples policy_particles(const Actor& actor, const Eigen::Ref<const Eigen::VectorXd>& state, int m, Rng& rng,
                               double noise_scale) {
  return sample_actions(actor, state, m, rng, noise_scale);
}

Eigen::VectorXd actor_backward(const Actor& actor, const ActionSamples& samples,
                               const Eigen::Ref<const Eigen::MatrixXd>& action_grad) {
  if (action_grad.rows() != samples.actions.rows() || action_grad.cols() != samples.actions.cols())
    throw InputError("actor_backward: gradient shape does not match the samples");
  const Eigen::MatrixXd du =
      (action_grad.array() * (1.0 - samples.squashed.array().square())).colwise() * actor.half_range.array();
  if (actor.kind == ActorKind::sampling_network) return nn::mlp_backward(actor.net, samples.cache, du).params;

  const Eigen::Index k = actor.action_dim;
  const Eigen::Index n = du.cols();
  const Eigen::Index b = n / samples.per_state;
  Eigen::MatrixXd dout = Eigen::MatrixXd::Zero(2 * k * actor.components, b);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::Index st = j / samples.per_state;
    const Eigen::Index off = 2 * k * samples.component[static_cast<std::size_t>(j)];
    for (Eigen::Index d = 0; d < k; ++d) {
      dout(off + d, st) += du(d, j);
      dout(off + k + d, st) += du(d, j) * samples.stddev(d, j) * samples.noise(d, j) * samples.log_std_free(d, j);
    }
  }
  return nn::mlp_backward(actor.net, samples.cache, dout).params;
}

}  // namespace wgf::rl
