#pragma once

#include <vector>

#include <Eigen/Core>

#include "wgflow/nn/mlp.hpp"
#include "wgflow/rng.hpp"

namespace wgf::rl {

/// Diagonal Gaussian policy whose whole parameter vector is one particle:
/// [mean network flat parameters | log std per action dimension].
/// The mean is the raw network output; the environment clamps the sampled action.
struct GaussianPolicyLayout {
  std::vector<int> layer_sizes;  // obs_dim, hidden..., action_dim
  std::vector<nn::Activation> activations;

  static GaussianPolicyLayout make(int obs_dim, const std::vector<int>& hidden, int action_dim);
  int obs_dim() const { return layer_sizes.front(); }
  int action_dim() const { return layer_sizes.back(); }
  Eigen::Index network_size() const { return nn::flat_length(layer_sizes); }
  Eigen::Index particle_size() const { return network_size() + action_dim(); }
  nn::MlpParams network(const Eigen::Ref<const Eigen::VectorXd>& particle) const;
};

/// Every entry ~ N(0, prior_variance), then log std set to `init_log_std`.
Eigen::VectorXd gaussian_policy_init(const GaussianPolicyLayout& layout, double prior_variance, double init_log_std,
                                     Rng& rng);

struct PolicySample {
  Eigen::VectorXd action;
  double log_prob;
  Eigen::VectorXd grad_log_prob;  // with respect to the particle
};

/// a = mean(s) + noise_scale * std * xi. noise_scale = 0 is a test hook (a = mean); the
/// normal draws are consumed either way.
PolicySample stochastic_policy_sample(const GaussianPolicyLayout& layout, const Eigen::Ref<const Eigen::VectorXd>& particle,
                                      const Eigen::Ref<const Eigen::VectorXd>& state, Rng& rng,
                                      double noise_scale = 1.0);

/// log pi(a | s) for one state/action pair.
double gaussian_log_prob(const GaussianPolicyLayout& layout, const Eigen::Ref<const Eigen::VectorXd>& particle,
                         const Eigen::Ref<const Eigen::VectorXd>& state, const Eigen::Ref<const Eigen::VectorXd>& action);

/// sum_b w_b * grad log pi(a_b | s_b) for a batch (states obs_dim x B, actions act_dim x B).
Eigen::VectorXd weighted_log_prob_grad(const GaussianPolicyLayout& layout,
                                       const Eigen::Ref<const Eigen::VectorXd>& particle,
                                       const Eigen::Ref<const Eigen::MatrixXd>& states,
                                       const Eigen::Ref<const Eigen::MatrixXd>& actions,
                                       const Eigen::Ref<const Eigen::VectorXd>& weights);

}  // namespace wgf::rl
