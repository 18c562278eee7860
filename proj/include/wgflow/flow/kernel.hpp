#pragma once

#include <Eigen/Core>

#include "wgflow/flow/particles.hpp"

namespace wgf::flow {

/// RBF kernel exp(-|x - y|^2 / m). Only the RBF family is supported.
struct KernelSpec {
  double bandwidth = 1.0;  // m, must be > 0
};

struct KernelEval {
  double value;
  Eigen::VectorXd grad_x;
};

KernelEval rbf_kernel(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y,
                      const KernelSpec& spec);

/// Squared Euclidean distance with a fixed left-to-right summation order.
double squared_distance(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y);

struct BandwidthEstimate {
  double value;
  bool degenerate;  // every pairwise distance was zero; value is the floor
};

inline constexpr double kBandwidthFloor = 1e-6;

/// med^2 / log M, where med is the median Euclidean distance over all pairs (a_i, b_j)
/// and M is the count of `a` (log 2 is used when M == 1). Clamped below by `floor`.
BandwidthEstimate median_bandwidth(const ParticleEnsemble& a, const ParticleEnsemble& b,
                                   double floor = kBandwidthFloor);

}  // namespace wgf::flow
