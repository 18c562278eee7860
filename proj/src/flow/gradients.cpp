#include "wgflow/flow/gradients.hpp"

#include <cmath>
#include <string>

#include "wgflow/error.hpp"

namespace wgf::flow {

Eigen::MatrixXd kl_gradient(const ParticleEnsemble& current, const Eigen::Ref<const Eigen::MatrixXd>& scores,
                            const KernelSpec& kernel) {
  const Eigen::Index d = current.dim();
  const Eigen::Index m = current.count();
  if (scores.rows() != d || scores.cols() != m) throw InputError("kl_gradient: score matrix shape mismatch");
  if (!(kernel.bandwidth > 0.0)) throw InputError("kl_gradient: bandwidth must be positive");
  for (Eigen::Index j = 0; j < m; ++j)
    if (!scores.col(j).allFinite())
      throw NumericError("kl_gradient: non-finite target gradient at particle " + std::to_string(j));

  const double bw = kernel.bandwidth;
  Eigen::MatrixXd out(d, m);
  Eigen::VectorXd acc(d);
  for (Eigen::Index i = 0; i < m; ++i) {
    acc.setZero();
    for (Eigen::Index j = 0; j < m; ++j) {
      const double k = std::exp(-squared_distance(current.point(i), current.point(j)) / bw);
      const double repulse = 2.0 * k / bw;
      for (Eigen::Index c = 0; c < d; ++c)
        acc[c] += k * scores(c, j) + repulse * (current.points(c, i) - current.points(c, j));
    }
    out.col(i) = acc / static_cast<double>(m);
  }
  return out;
}

Eigen::MatrixXd kl_gradient_of(const ParticleEnsemble& current, const ScoreFn& grad_logp, const KernelSpec& kernel) {
  const Eigen::MatrixXd scores = grad_logp(current.points);
  return kl_gradient(current, Eigen::Ref<const Eigen::MatrixXd>(scores), kernel);
}

Eigen::MatrixXd w2_gradient(const ParticleEnsemble& current, const ParticleEnsemble& previous, double lambda) {
  if (!(lambda > 0.0)) throw InputError("w2_gradient: lambda must be positive");
  if (current.dim() != previous.dim()) throw InputError("w2_gradient: dimension mismatch");
  const Eigen::Index d = current.dim();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(d, current.count());
  for (Eigen::Index i = 0; i < current.count(); ++i) {
    for (Eigen::Index j = 0; j < previous.count(); ++j) {
      const double c = squared_distance(current.point(i), previous.point(j));
      const double coef = 2.0 * (1.0 - c / lambda) * std::exp(-c / lambda);
      for (Eigen::Index k = 0; k < d; ++k) out(k, i) += coef * (current.points(k, i) - previous.points(k, j));
    }
  }
  return out;
}

double w2_surrogate(const Eigen::Ref<const Eigen::VectorXd>& x, const ParticleEnsemble& previous, double lambda) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < previous.count(); ++j) {
    const double c = squared_distance(x, previous.point(j));
    s += c * std::exp(-c / lambda);
  }
  return s;
}

}  // namespace wgf::flow
