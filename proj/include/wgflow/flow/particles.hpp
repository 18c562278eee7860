#pragma once

#include <cstdint>
#include <functional>

#include <Eigen/Core>

namespace wgf::flow {

/// M points in R^d stored column-wise (d x M). Used both for parameter particles
/// (each column a whole network) and for action particles.
struct ParticleEnsemble {
  Eigen::MatrixXd points;
  std::int64_t iteration = 0;
  std::uint64_t stream_id = 0;

  ParticleEnsemble() = default;
  explicit ParticleEnsemble(Eigen::MatrixXd pts, std::int64_t iter = 0, std::uint64_t stream = 0)
      : points(std::move(pts)), iteration(iter), stream_id(stream) {}

  Eigen::Index dim() const { return points.rows(); }
  Eigen::Index count() const { return points.cols(); }
  auto point(Eigen::Index i) const { return points.col(i); }
  auto point(Eigen::Index i) { return points.col(i); }

  /// Throws InputError unless d >= 1, M >= 1 and every coordinate is finite.
  void validate() const;
};

/// Gradient of an (unnormalized) log-density evaluated at every column of a d x M
/// matrix; returns d x M. Batched so estimators that need all particles at once
/// (rollout-based policy gradients) fit the same shape as closed-form targets.
using ScoreFn = std::function<Eigen::MatrixXd(const Eigen::MatrixXd& points)>;

/// Wraps a per-point gradient function into a ScoreFn.
ScoreFn pointwise_score(std::function<Eigen::VectorXd(const Eigen::VectorXd&)> grad_logp);

}  // namespace wgf::flow
