#pragma once

#include <vector>

#include <Eigen/Core>

#include "wgflow/flow/jko.hpp"
#include "wgflow/flow/particles.hpp"

namespace wgf::targets {

/// Mixture of axis-aligned Gaussians.
struct GaussianMixture {
  std::vector<double> weights;
  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::VectorXd> variances;  // diagonal covariance per component

  int dim() const { return means.empty() ? 0 : static_cast<int>(means.front().size()); }
  /// Throws InputError unless weights are positive and sum to 1 (within 1e-9), variances
  /// positive and every component has the same dimension.
  void validate() const;

  /// Equal-weight unit-variance modes at -offset and +offset in 1D.
  static GaussianMixture two_mode_1d(double offset);
  static GaussianMixture gaussian(Eigen::VectorXd mean, Eigen::VectorXd variance);
};

struct LogDensityGrad {
  double logp;
  Eigen::VectorXd grad;
};

/// Normalized log-density (log-sum-exp over components) and its exact gradient.
LogDensityGrad mixture_logp_grad(const GaussianMixture& gm, const Eigen::Ref<const Eigen::VectorXd>& x);

flow::ScoreFn mixture_score(const GaussianMixture& gm);
flow::LogDensityFn mixture_log_density(const GaussianMixture& gm);

}  // namespace wgf::targets
