#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "wgflow/flow/kernel.hpp"
#include "wgflow/flow/particles.hpp"
#include "wgflow/nn/optimizer.hpp"
#include "wgflow/rng.hpp"

namespace wgf::flow {

/// Which previous particles enter the W2 term of particle i.
///   all:     every previous particle j (the transport plan treated as dense)
///   matched: only previous particle i, i.e. the same particle before the last update
enum class W2Coupling { all, matched };
W2Coupling parse_w2_coupling(std::string_view name);
std::string to_string(W2Coupling c);

struct JkoConfig {
  double stepsize = 0.1;   // h; weights the transport term of the monitored objective
  double w2_scale = 0.4;   // epsilon; 0 gives plain kernelized (SVGD) updates
  std::optional<double> entropic_lambda;   // unset: med^2 / log M against the previous ensemble
  std::optional<double> kernel_bandwidth;  // unset: med^2 / log M within the current ensemble
  int inner_steps = 1;
  W2Coupling coupling = W2Coupling::all;
  nn::OptimizerSettings optimizer;

  void validate() const;
};

struct JkoStepInfo {
  double bandwidth = 0.0;
  double lambda = 0.0;
  bool degenerate = false;  // a median heuristic hit its floor during the block
};

/// Per-particle update direction for one inner step (d x M):
///   g_i = kl_gradient_i + w2_scale * w2_gradient_i
/// where w2_gradient_i runs over the previous particles selected by cfg.coupling and lambda
/// (when not fixed) is med^2 / log M over all current/previous pairs.
/// Ascent convention: particles move as x += lr * g. With this sign a particle is pushed
/// away from a previous particle closer than sqrt(lambda) and pulled toward farther ones.
Eigen::MatrixXd jko_direction(const ParticleEnsemble& current, const ParticleEnsemble& previous,
                              const Eigen::Ref<const Eigen::MatrixXd>& scores, const JkoConfig& cfg,
                              JkoStepInfo* info = nullptr);

/// One JKO block: `cfg.inner_steps` optimizer updates of the particles along
/// jko_direction, with `previous` frozen. The optimizer state spans the whole d x M
/// ensemble (column-major), which is the same as independent per-particle states.
/// Returns the moved ensemble with iteration + 1.
ParticleEnsemble jko_step(const ParticleEnsemble& current, const ParticleEnsemble& previous,
                          const ScoreFn& grad_logp, const JkoConfig& cfg, nn::OptimizerState& opt,
                          JkoStepInfo* info = nullptr);

/// Unadjusted Langevin step x += (s/2) grad log p(x) + sqrt(s) * noise_scale * N(0, I).
/// noise_scale = 0 is a test hook; the normal draws are consumed either way.
ParticleEnsemble langevin_step(const ParticleEnsemble& ensemble, const ScoreFn& grad_logp, double stepsize, Rng& rng,
                               double noise_scale = 1.0);

using LogDensityFn = std::function<double(const Eigen::VectorXd&)>;

/// KL(mu_hat || p) with mu_hat the Gaussian-kernel density estimate of the particles
/// (kernel exp(-|x-y|^2/m), normalized). Diagnostics only. `log_p` must be normalized
/// for the absolute value to mean anything; differences are fine either way.
double kde_kl_estimate(const ParticleEnsemble& ensemble, const LogDensityFn& log_p, double bandwidth);

/// KL_hat(current) + W2^2(current, previous) / (2h), W2 computed exactly (M <= 10).
double jko_objective(const ParticleEnsemble& current, const ParticleEnsemble& previous, const LogDensityFn& log_p,
                     double stepsize, double bandwidth);

}  // namespace wgf::flow
