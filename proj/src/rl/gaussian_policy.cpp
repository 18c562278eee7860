#include "wgflow/rl/gaussian_policy.hpp"

#include <cmath>
#include <numbers>

#include "wgflow/error.hpp"

namespace wgf::rl {

GaussianPolicyLayout GaussianPolicyLayout::make(int obs_dim, const std::vector<int>& hidden, int action_dim) {
  GaussianPolicyLayout l;
  l.layer_sizes.push_back(obs_dim);
  for (int h : hidden) {
    l.layer_sizes.push_back(h);
    l.activations.push_back(nn::Activation::tanh);
  }
  l.layer_sizes.push_back(action_dim);
  l.activations.push_back(nn::Activation::identity);
  return l;
}

nn::MlpParams GaussianPolicyLayout::network(const Eigen::Ref<const Eigen::VectorXd>& particle) const {
  if (particle.size() != particle_size()) throw InputError("gaussian policy: particle has the wrong length");
  return nn::unflatten(particle.head(network_size()), layer_sizes, activations);
}

Eigen::VectorXd gaussian_policy_init(const GaussianPolicyLayout& layout, double prior_variance, double init_log_std,
                                     Rng& rng) {
  if (!(prior_variance > 0.0)) throw InputError("gaussian policy: prior variance must be positive");
  Eigen::VectorXd p = std::sqrt(prior_variance) * rng.normal_vector(layout.particle_size());
  p.tail(layout.action_dim()).setConstant(init_log_std);
  return p;
}

PolicySample stochastic_policy_sample(const GaussianPolicyLayout& layout, const Eigen::Ref<const Eigen::VectorXd>& particle,
                                      const Eigen::Ref<const Eigen::VectorXd>& state, Rng& rng, double noise_scale) {
  if (state.size() != layout.obs_dim()) throw InputError("gaussian policy: state has the wrong length");
  const nn::MlpParams net = layout.network(particle);
  const nn::MlpForward fwd = nn::mlp_forward(net, state);
  const Eigen::VectorXd log_std = particle.tail(layout.action_dim());
  const Eigen::VectorXd std_dev = log_std.array().exp();
  const Eigen::VectorXd xi = rng.normal_vector(layout.action_dim());

  PolicySample out;
  const Eigen::VectorXd mean = fwd.output.col(0);
  out.action = mean + noise_scale * std_dev.cwiseProduct(xi);
  const Eigen::ArrayXd z = (out.action - mean).array() / std_dev.array();
  const double log2pi = std::log(2.0 * std::numbers::pi);
  out.log_prob = (-0.5 * z.square() - log_std.array() - 0.5 * log2pi).sum();

  out.grad_log_prob.resize(layout.particle_size());
  const Eigen::MatrixXd dmean = (z / std_dev.array()).matrix();
  out.grad_log_prob.head(layout.network_size()) = nn::mlp_backward(net, fwd.cache, dmean).params;
  out.grad_log_prob.tail(layout.action_dim()) = (z.square() - 1.0).matrix();
  return out;
}

double gaussian_log_prob(const GaussianPolicyLayout& layout, const Eigen::Ref<const Eigen::VectorXd>& particle,
                         const Eigen::Ref<const Eigen::VectorXd>& state, const Eigen::Ref<const Eigen::VectorXd>& action) {
  const nn::MlpParams net = layout.network(particle);
  const Eigen::VectorXd mean = nn::mlp_predict(net, state).col(0);
  const Eigen::ArrayXd log_std = particle.tail(layout.action_dim()).array();
  const Eigen::ArrayXd z = (action - mean).array() / log_std.exp();
  return (-0.5 * z.square() - log_std - 0.5 * std::log(2.0 * std::numbers::pi)).sum();
}

Eigen::VectorXd weighted_log_prob_grad(const GaussianPolicyLayout& layout,
                                       const Eigen::Ref<const Eigen::VectorXd>& particle,
                                       const Eigen::Ref<const Eigen::MatrixXd>& states,
                                       const Eigen::Ref<const Eigen::MatrixXd>& actions,
                                       const Eigen::Ref<const Eigen::VectorXd>& weights) {
  if (states.cols() != actions.cols() || states.cols() != weights.size())
    throw InputError("weighted_log_prob_grad: batch sizes differ");
  const nn::MlpParams net = layout.network(particle);
  const nn::MlpForward fwd = nn::mlp_forward(net, states);
  const Eigen::ArrayXd inv_std = (-particle.tail(layout.action_dim()).array()).exp();
  const Eigen::ArrayXXd z = (actions - fwd.output).array().colwise() * inv_std;

  Eigen::VectorXd grad(layout.particle_size());
  const Eigen::MatrixXd dmean = ((z.colwise() * inv_std).rowwise() * weights.transpose().array()).matrix();
  grad.head(layout.network_size()) = nn::mlp_backward(net, fwd.cache, dmean).params;
  grad.tail(layout.action_dim()) = ((z.square() - 1.0).matrix() * weights);
  return grad;
}

}  // namespace wgf::rl
