#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace wgf::nn {

enum class OptimizerKind { sgd, rmsprop, adam };

OptimizerKind parse_optimizer_kind(std::string_view name);
std::string to_string(OptimizerKind kind);

struct OptimizerSettings {
  OptimizerKind kind = OptimizerKind::adam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;     // adam first moment
  double beta2 = 0.999;   // adam second moment
  double rho = 0.9;       // rmsprop decay
  double epsilon = 1e-8;
};

/// Per-parameter accumulators for one flat parameter vector. Moment vectors are
/// allocated lazily on the first update so a state can be built before the
/// parameter count is known.
struct OptimizerState {
  OptimizerSettings settings;
  Eigen::VectorXd first_moment;
  Eigen::VectorXd second_moment;
  std::int64_t step = 0;

  OptimizerState() = default;
  explicit OptimizerState(OptimizerSettings s) : settings(s) {}
};

/// One descent step: params <- params - direction(grads). Callers negate gradients to ascend.
/// SGD:     p -= lr * g
/// RMSProp: v = rho v + (1-rho) g^2;  p -= lr * g / (sqrt(v) + eps)
/// Adam:    bias-corrected moments, p -= lr * m_hat / (sqrt(v_hat) + eps)
void optimizer_update(Eigen::Ref<Eigen::VectorXd> params, const Eigen::Ref<const Eigen::VectorXd>& grads,
                      OptimizerState& state);

}  // namespace wgf::nn
