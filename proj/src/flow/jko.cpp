#include "wgflow/flow/jko.hpp"

#include <cmath>
#include <numbers>

#include <string>

#include "wgflow/error.hpp"
#include "wgflow/flow/gradients.hpp"
#include "wgflow/flow/transport.hpp"

namespace wgf::flow {

W2Coupling parse_w2_coupling(std::string_view name) {
  if (name == "all") return W2Coupling::all;
  if (name == "matched") return W2Coupling::matched;
  throw InputError("unknown W2 coupling '" + std::string(name) + "' (expected all or matched)");
}

std::string to_string(W2Coupling c) { return c == W2Coupling::all ? "all" : "matched"; }

void JkoConfig::validate() const {
  if (!(stepsize > 0.0)) throw InputError("jko: stepsize h must be positive");
  if (!(w2_scale >= 0.0)) throw InputError("jko: w2_scale must be non-negative");
  if (entropic_lambda && !(*entropic_lambda > 0.0)) throw InputError("jko: lambda must be positive");
  if (kernel_bandwidth && !(*kernel_bandwidth > 0.0)) throw InputError("jko: kernel bandwidth must be positive");
  if (inner_steps < 1) throw InputError("jko: inner_steps must be >= 1");
  if (!(optimizer.learning_rate >= 0.0)) throw InputError("jko: learning rate must be non-negative");
}

Eigen::MatrixXd jko_direction(const ParticleEnsemble& current, const ParticleEnsemble& previous,
                              const Eigen::Ref<const Eigen::MatrixXd>& scores, const JkoConfig& cfg,
                              JkoStepInfo* info) {
  KernelSpec kernel;
  bool degenerate = false;
  if (cfg.kernel_bandwidth) {
    kernel.bandwidth = *cfg.kernel_bandwidth;
  } else {
    const auto bw = median_bandwidth(current, current);
    kernel.bandwidth = bw.value;
    degenerate = degenerate || bw.degenerate;
  }
  Eigen::MatrixXd g = kl_gradient(current, scores, kernel);

  double lambda = 0.0;
  if (cfg.w2_scale > 0.0) {
    if (cfg.entropic_lambda) {
      lambda = *cfg.entropic_lambda;
    } else {
      const auto lam = median_bandwidth(current, previous);
      lambda = lam.value;
      degenerate = degenerate || lam.degenerate;
    }
    if (cfg.coupling == W2Coupling::all) {
      g += cfg.w2_scale * w2_gradient(current, previous, lambda);
    } else {
      if (previous.count() != current.count())
        throw InputError("jko: matched coupling needs equal current and previous counts");
      for (Eigen::Index i = 0; i < current.count(); ++i) {
        const ParticleEnsemble xi(current.points.col(i));
        const ParticleEnsemble yi(previous.points.col(i));
        g.col(i) += cfg.w2_scale * w2_gradient(xi, yi, lambda);
      }
    }
  }
  if (info) {
    info->bandwidth = kernel.bandwidth;
    info->lambda = lambda;
    info->degenerate = info->degenerate || degenerate;
  }
  return g;
}

ParticleEnsemble jko_step(const ParticleEnsemble& current, const ParticleEnsemble& previous,
                          const ScoreFn& grad_logp, const JkoConfig& cfg, nn::OptimizerState& opt,
                          JkoStepInfo* info) {
  cfg.validate();
  if (current.dim() != previous.dim()) throw InputError("jko_step: current/previous dimension mismatch");
  opt.settings = cfg.optimizer;

  ParticleEnsemble next = current;
  for (int s = 0; s < cfg.inner_steps; ++s) {
    const Eigen::MatrixXd scores = grad_logp(next.points);
    const Eigen::MatrixXd g = jko_direction(next, previous, scores, cfg, info);
    const Eigen::VectorXd descent = -Eigen::Map<const Eigen::VectorXd>(g.data(), g.size());
    Eigen::Map<Eigen::VectorXd> flat(next.points.data(), next.points.size());
    nn::optimizer_update(flat, descent, opt);
  }
  if (!next.points.allFinite()) throw NumericError("jko_step: particles became non-finite");
  next.iteration = current.iteration + 1;
  return next;
}

ParticleEnsemble langevin_step(const ParticleEnsemble& ensemble, const ScoreFn& grad_logp, double stepsize, Rng& rng,
                               double noise_scale) {
  if (!(stepsize > 0.0)) throw InputError("langevin_step: stepsize must be positive");
  const Eigen::MatrixXd scores = grad_logp(ensemble.points);
  const Eigen::MatrixXd noise = rng.normal_matrix(ensemble.dim(), ensemble.count());
  ParticleEnsemble next = ensemble;
  next.points += (0.5 * stepsize) * scores + (std::sqrt(stepsize) * noise_scale) * noise;
  next.iteration = ensemble.iteration + 1;
  return next;
}

double kde_kl_estimate(const ParticleEnsemble& ensemble, const LogDensityFn& log_p, double bandwidth) {
  if (!(bandwidth > 0.0)) throw InputError("kde_kl_estimate: bandwidth must be positive");
  const Eigen::Index m = ensemble.count();
  const double d = static_cast<double>(ensemble.dim());
  // exp(-|x|^2 / m) integrates to (pi m)^{d/2}.
  const double log_norm = 0.5 * d * std::log(std::numbers::pi * bandwidth);
  double total = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < m; ++j)
      s += std::exp(-squared_distance(ensemble.point(i), ensemble.point(j)) / bandwidth);
    const double log_q = std::log(s / static_cast<double>(m)) - log_norm;
    total += log_q - log_p(ensemble.point(i));
  }
  return total / static_cast<double>(m);
}

double jko_objective(const ParticleEnsemble& current, const ParticleEnsemble& previous, const LogDensityFn& log_p,
                     double stepsize, double bandwidth) {
  return kde_kl_estimate(current, log_p, bandwidth) + exact_w2_squared(current, previous) / (2.0 * stepsize);
}

}  // namespace wgf::flow
