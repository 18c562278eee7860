#include "wgflow/flow/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "wgflow/error.hpp"

namespace wgf::flow {

void ParticleEnsemble::validate() const {
  if (points.rows() < 1) throw InputError("particle ensemble: dimension must be >= 1");
  if (points.cols() < 1) throw InputError("particle ensemble: need at least one particle");
  if (!points.allFinite()) throw InputError("particle ensemble: non-finite coordinate");
}

ScoreFn pointwise_score(std::function<Eigen::VectorXd(const Eigen::VectorXd&)> grad_logp) {
  return [g = std::move(grad_logp)](const Eigen::MatrixXd& pts) {
    Eigen::MatrixXd out(pts.rows(), pts.cols());
    for (Eigen::Index i = 0; i < pts.cols(); ++i) out.col(i) = g(pts.col(i));
    return out;
  };
}

double squared_distance(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double d = x[k] - y[k];
    s += d * d;
  }
  return s;
}

KernelEval rbf_kernel(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y,
                      const KernelSpec& spec) {
  if (x.size() != y.size())
    throw InputError("rbf_kernel: dimension mismatch (" + std::to_string(x.size()) + " vs " +
                     std::to_string(y.size()) + ")");
  if (!(spec.bandwidth > 0.0)) throw InputError("rbf_kernel: bandwidth must be positive");
  const double value = std::exp(-squared_distance(x, y) / spec.bandwidth);
  return {value, (-2.0 * value / spec.bandwidth) * (x - y)};
}

BandwidthEstimate median_bandwidth(const ParticleEnsemble& a, const ParticleEnsemble& b, double floor) {
  if (a.count() < 1 || b.count() < 1) throw InputError("median_bandwidth: empty ensemble");
  if (a.dim() != b.dim()) throw InputError("median_bandwidth: dimension mismatch");

  std::vector<double> dist;
  dist.reserve(static_cast<std::size_t>(a.count() * b.count()));
  for (Eigen::Index i = 0; i < a.count(); ++i)
    for (Eigen::Index j = 0; j < b.count(); ++j) dist.push_back(std::sqrt(squared_distance(a.point(i), b.point(j))));

  const std::size_t n = dist.size();
  const std::size_t mid = n / 2;
  std::nth_element(dist.begin(), dist.begin() + mid, dist.end());
  double med = dist[mid];
  if (n % 2 == 0) {
    const double lower = *std::max_element(dist.begin(), dist.begin() + mid);
    med = 0.5 * (lower + med);
  }

  const double log_m = std::log(static_cast<double>(std::max<Eigen::Index>(a.count(), 2)));
  const double value = med * med / log_m;
  if (!(value > floor)) return {floor, med == 0.0};
  return {value, false};
}

}  // namespace wgf::flow
