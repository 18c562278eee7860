#pragma once

#include <Eigen/Core>

#include "wgflow/flow/kernel.hpp"
#include "wgflow/flow/particles.hpp"

namespace wgf::flow {

/// Kernelized KL descent direction, one column per particle:
///
///   out_i = (1/M) sum_j [ K(x_j, x_i) grad log p(x_j) + grad_{x_j} K(x_j, x_i) ]
///
/// Moving x_i along out_i decreases KL(mu || p). `scores` holds grad log p at every
/// particle (d x M). Throws NumericError naming the first particle with a non-finite score.
Eigen::MatrixXd kl_gradient(const ParticleEnsemble& current, const Eigen::Ref<const Eigen::MatrixXd>& scores,
                            const KernelSpec& kernel);

Eigen::MatrixXd kl_gradient_of(const ParticleEnsemble& current, const ScoreFn& grad_logp, const KernelSpec& kernel);

/// Gradient of the entropic transport surrogate sum_j c_ij exp(-c_ij / lambda) with
/// respect to each current particle, c_ij = |x_i - y_j|^2 against the previous ensemble:
///
///   out_i = sum_j 2 (1 - c_ij / lambda) exp(-c_ij / lambda) (x_i - y_j)
///
/// Each term points away from y_j when c_ij < lambda and toward it when c_ij > lambda.
Eigen::MatrixXd w2_gradient(const ParticleEnsemble& current, const ParticleEnsemble& previous, double lambda);

/// The surrogate itself, sum over j of c_ij exp(-c_ij / lambda), for particle i.
double w2_surrogate(const Eigen::Ref<const Eigen::VectorXd>& x, const ParticleEnsemble& previous, double lambda);

}  // namespace wgf::flow
