#pragma once

#include <vector>

#include <Eigen/Core>

#include "wgflow/nn/mlp.hpp"
#include "wgflow/targets/dataset.hpp"

namespace wgf::targets {

/// Posterior of a one-hidden-layer regression network with Gaussian noise of precision tau.
/// A particle is [network flat parameters | log tau].
struct BnnPosteriorSpec {
  int input_dim = 1;
  int hidden = 50;
  nn::Activation activation = nn::Activation::tanh;
  double weight_prior_precision = 1.0;  // N(0, 1/precision) on every weight and bias
  double noise_shape = 1.0;             // Gamma(shape, rate) prior on tau
  double noise_rate = 0.1;

  std::vector<int> layer_sizes() const { return {input_dim, hidden, 1}; }
  std::vector<nn::Activation> activations() const { return {activation, nn::Activation::identity}; }
  Eigen::Index network_size() const;
  Eigen::Index particle_size() const { return network_size() + 1; }
  nn::MlpParams network(const Eigen::Ref<const Eigen::VectorXd>& particle) const;
};

struct BnnLogPosterior {
  double logp;
  Eigen::VectorXd grad;  // particle_size()
  double log_likelihood;  // already scaled by N_total / B
};

/// (N_total / B) * sum_b log N(y_b | f(x_b), 1/tau) + log prior(weights) + log prior(log tau).
/// The tau prior is expressed in log tau, so it includes the Jacobian: shape*log tau - rate*tau.
/// `x` is D x B, `y` has B entries. With B == 0 or N_total == 0 only the prior remains.
BnnLogPosterior bnn_logp_grad(const BnnPosteriorSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& particle,
                              const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y,
                              double n_total);

/// Draws an initial particle: Glorot-initialized network, log tau = log(shape / rate).
Eigen::VectorXd bnn_initial_particle(const BnnPosteriorSpec& spec, Rng& rng);

struct RegressionMetrics {
  double rmse;
  double log_likelihood;
};

/// Test RMSE of the particle-averaged prediction and mean test log-likelihood of the
/// particle-mixture predictive, both in the original (de-standardized) units.
RegressionMetrics regression_metrics(const std::vector<Eigen::VectorXd>& particles, const BnnPosteriorSpec& spec,
                                     const RegressionDataset& data);

}  // namespace wgf::targets
