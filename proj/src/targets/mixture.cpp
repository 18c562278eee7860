#include "wgflow/targets/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "wgflow/error.hpp"

namespace wgf::targets {

void GaussianMixture::validate() const {
  if (weights.empty()) throw InputError("mixture: no components");
  if (means.size() != weights.size() || variances.size() != weights.size())
    throw InputError("mixture: weights, means and variances must have the same length");
  double total = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (!(weights[k] > 0.0)) throw InputError("mixture: weights must be positive");
    total += weights[k];
    if (means[k].size() != means.front().size() || variances[k].size() != means.front().size())
      throw InputError("mixture: component dimensions disagree");
    if (!((variances[k].array() > 0.0).all())) throw InputError("mixture: variances must be positive");
  }
  if (std::abs(total - 1.0) > 1e-9) throw InputError("mixture: weights must sum to 1");
}

GaussianMixture GaussianMixture::two_mode_1d(double offset) {
  GaussianMixture gm;
  gm.weights = {0.5, 0.5};
  gm.means = {Eigen::VectorXd::Constant(1, -offset), Eigen::VectorXd::Constant(1, offset)};
  gm.variances = {Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1)};
  return gm;
}

GaussianMixture GaussianMixture::gaussian(Eigen::VectorXd mean, Eigen::VectorXd variance) {
  GaussianMixture gm;
  gm.weights = {1.0};
  gm.means = {std::move(mean)};
  gm.variances = {std::move(variance)};
  return gm;
}

LogDensityGrad mixture_logp_grad(const GaussianMixture& gm, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != gm.dim()) throw InputError("mixture_logp_grad: dimension mismatch");
  const std::size_t n = gm.weights.size();
  std::vector<double> logc(n);
  std::vector<Eigen::VectorXd> gradc(n);
  const double log2pi = std::log(2.0 * std::numbers::pi);
  for (std::size_t k = 0; k < n; ++k) {
    const Eigen::ArrayXd diff = x.array() - gm.means[k].array();
    const Eigen::ArrayXd& var = gm.variances[k].array();
    logc[k] = std::log(gm.weights[k]) -
              0.5 * ((diff * diff / var).sum() + var.log().sum() + static_cast<double>(x.size()) * log2pi);
    gradc[k] = (-diff / var).matrix();
  }
  const double mx = *std::max_element(logc.begin(), logc.end());
  double s = 0.0;
  for (double l : logc) s += std::exp(l - mx);
  const double logp = mx + std::log(s);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(x.size());
  for (std::size_t k = 0; k < n; ++k) grad += std::exp(logc[k] - logp) * gradc[k];
  return {logp, grad};
}

flow::ScoreFn mixture_score(const GaussianMixture& gm) {
  gm.validate();
  return [gm](const Eigen::MatrixXd& pts) {
    Eigen::MatrixXd out(pts.rows(), pts.cols());
    for (Eigen::Index i = 0; i < pts.cols(); ++i) out.col(i) = mixture_logp_grad(gm, pts.col(i)).grad;
    return out;
  };
}

flow::LogDensityFn mixture_log_density(const GaussianMixture& gm) {
  gm.validate();
  return [gm](const Eigen::VectorXd& x) { return mixture_logp_grad(gm, x).logp; };
}

}  // namespace wgf::targets
