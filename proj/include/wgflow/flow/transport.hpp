#pragma once

#include <Eigen/Core>

#include "wgflow/flow/particles.hpp"

namespace wgf::flow {

struct TransportPlan {
  Eigen::MatrixXd weights;  // p_ij, rows and columns each sum to 1/M
  Eigen::MatrixXd cost;     // c_ij
  double transport_cost = 0.0;  // sum_ij p_ij c_ij
  double marginal_violation = 0.0;
  int iterations = 0;
};

/// c_ij = |a_i - b_j|^2.
Eigen::MatrixXd squared_distance_matrix(const ParticleEnsemble& a, const ParticleEnsemble& b);

/// Entropy-regularized transport between two uniform M-point measures. The optimal plan
/// has the form p_ij = u_i exp(-c_ij / lambda) v_j; u and v are found by alternating
/// marginal scaling carried out on log-potentials, with a geometric lambda schedule
/// warm-starting the final solve. Stops once every row and column sum is within `tol`
/// of 1/M; throws ConvergenceError (carrying the violation) after `max_iters` sweeps.
TransportPlan entropic_plan(const Eigen::Ref<const Eigen::MatrixXd>& cost, double lambda, int max_iters = 200000,
                            double tol = 1e-9);

/// Exact squared 2-Wasserstein distance between equal-size empirical measures,
/// min over permutations s of (1/M) sum_i |a_i - b_s(i)|^2. Enumerates all M!
/// permutations, so it refuses M > 10.
double exact_w2_squared(const ParticleEnsemble& a, const ParticleEnsemble& b);

}  // namespace wgf::flow
