#include "wgflow/targets/bnn.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "wgflow/error.hpp"

namespace wgf::targets {

Eigen::Index BnnPosteriorSpec::network_size() const { return nn::flat_length(layer_sizes()); }

nn::MlpParams BnnPosteriorSpec::network(const Eigen::Ref<const Eigen::VectorXd>& particle) const {
  if (particle.size() != particle_size())
    throw InputError("bnn: particle has " + std::to_string(particle.size()) + " entries, expected " +
                     std::to_string(particle_size()));
  return nn::unflatten(particle.head(network_size()), layer_sizes(), activations());
}

BnnLogPosterior bnn_logp_grad(const BnnPosteriorSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& particle,
                              const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y,
                              double n_total) {
  if (x.cols() != y.size()) throw InputError("bnn_logp_grad: x and y batch sizes differ");
  if (x.cols() > 0 && x.rows() != spec.input_dim) throw InputError("bnn_logp_grad: feature dimension mismatch");
  const nn::MlpParams net = spec.network(particle);
  const Eigen::Index p = spec.network_size();
  const double log_tau = particle[p];
  const double tau = std::exp(log_tau);
  const double log2pi = std::log(2.0 * std::numbers::pi);

  BnnLogPosterior out;
  out.grad = Eigen::VectorXd::Zero(particle.size());
  out.log_likelihood = 0.0;

  const auto b = x.cols();
  if (b > 0 && n_total > 0.0) {
    const double scale = n_total / static_cast<double>(b);
    const nn::MlpForward fwd = nn::mlp_forward(net, x);
    const Eigen::RowVectorXd resid = y.transpose() - fwd.output.row(0);
    const double sq = resid.squaredNorm();
    out.log_likelihood = scale * (static_cast<double>(b) * 0.5 * (log_tau - log2pi) - 0.5 * tau * sq);
    const Eigen::MatrixXd dout = (scale * tau) * resid;
    out.grad.head(p) = nn::mlp_backward(net, fwd.cache, dout).params;
    out.grad[p] = scale * (0.5 * static_cast<double>(b) - 0.5 * tau * sq);
  }

  const Eigen::VectorXd w = particle.head(p);
  const double prec = spec.weight_prior_precision;
  const double log_prior_w =
      -0.5 * prec * w.squaredNorm() + 0.5 * static_cast<double>(p) * (std::log(prec) - log2pi);
  const double a = spec.noise_shape;
  const double r = spec.noise_rate;
  const double log_prior_tau = a * std::log(r) - std::lgamma(a) + a * log_tau - r * tau;
  out.grad.head(p) -= prec * w;
  out.grad[p] += a - r * tau;

  out.logp = out.log_likelihood + log_prior_w + log_prior_tau;
  if (!std::isfinite(out.logp) || !out.grad.allFinite())
    throw NumericError("bnn_logp_grad: non-finite log posterior");
  return out;
}

Eigen::VectorXd bnn_initial_particle(const BnnPosteriorSpec& spec, Rng& rng) {
  Eigen::VectorXd particle(spec.particle_size());
  particle.head(spec.network_size()) = nn::MlpParams::glorot(spec.layer_sizes(), spec.activations(), rng).flat();
  particle[spec.network_size()] = std::log(spec.noise_shape / spec.noise_rate);
  return particle;
}

RegressionMetrics regression_metrics(const std::vector<Eigen::VectorXd>& particles, const BnnPosteriorSpec& spec,
                                     const RegressionDataset& data) {
  if (particles.empty()) throw InputError("regression_metrics: need at least one particle");
  const Eigen::Index n = data.x_test.cols();
  if (n == 0) throw InputError("regression_metrics: empty test split");
  const auto np = static_cast<Eigen::Index>(particles.size());
  const Eigen::VectorXd y = data.y_test.array() * data.y_std + data.y_mean;

  Eigen::MatrixXd mean(np, n);
  Eigen::VectorXd var(np);
  for (Eigen::Index k = 0; k < np; ++k) {
    const auto& part = particles[static_cast<std::size_t>(k)];
    const nn::MlpParams net = spec.network(part);
    mean.row(k) = nn::mlp_predict(net, data.x_test).row(0).array() * data.y_std + data.y_mean;
    var[k] = data.y_std * data.y_std / std::exp(part[spec.network_size()]);
  }

  const Eigen::RowVectorXd avg = mean.colwise().mean();
  const double rmse = std::sqrt((avg.transpose() - y).array().square().mean());

  const double log2pi = std::log(2.0 * std::numbers::pi);
  double ll = 0.0;
  std::vector<double> terms(static_cast<std::size_t>(np));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < np; ++k) {
      const double r = y[i] - mean(k, i);
      terms[static_cast<std::size_t>(k)] = -0.5 * (log2pi + std::log(var[k]) + r * r / var[k]);
    }
    const double mx = *std::max_element(terms.begin(), terms.end());
    double s = 0.0;
    for (double t : terms) s += std::exp(t - mx);
    ll += mx + std::log(s / static_cast<double>(np));
  }
  return {rmse, ll / static_cast<double>(n)};
}

}  // namespace wgf::targets
