#include "wgflow/nn/optimizer.hpp"

#include <cmath>

#include "wgflow/error.hpp"

namespace wgf::nn {

OptimizerKind parse_optimizer_kind(std::string_view name) {
  if (name == "sgd") return OptimizerKind::sgd;
  if (name == "rmsprop") return OptimizerKind::rmsprop;
  if (name == "adam") return OptimizerKind::adam;
  throw InputError("unknown optimizer '" + std::string(name) + "' (expected sgd, rmsprop or adam)");
}

std::string to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::sgd: return "sgd";
    case OptimizerKind::rmsprop: return "rmsprop";
    case OptimizerKind::adam: return "adam";
  }
  return "?";
}

void optimizer_update(Eigen::Ref<Eigen::VectorXd> params, const Eigen::Ref<const Eigen::VectorXd>& grads,
                      OptimizerState& state) {
  if (params.size() != grads.size())
    throw InputError("optimizer_update: parameter/gradient length mismatch");
  const auto& s = state.settings;
  const Eigen::Index n = params.size();

  switch (s.kind) {
    case OptimizerKind::sgd: {
      for (Eigen::Index i = 0; i < n; ++i) params[i] -= s.learning_rate * grads[i];
      break;
    }
    case OptimizerKind::rmsprop: {
      if (state.second_moment.size() != n) state.second_moment = Eigen::VectorXd::Zero(n);
      auto& v = state.second_moment;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double g = grads[i];
        v[i] = s.rho * v[i] + (1.0 - s.rho) * g * g;
        params[i] -= s.learning_rate * g / (std::sqrt(v[i]) + s.epsilon);
      }
      break;
    }
    case OptimizerKind::adam: {
      if (state.first_moment.size() != n) state.first_moment = Eigen::VectorXd::Zero(n);
      if (state.second_moment.size() != n) state.second_moment = Eigen::VectorXd::Zero(n);
      auto& m = state.first_moment;
      auto& v = state.second_moment;
      const auto t = static_cast<double>(state.step + 1);
      const double c1 = 1.0 - std::pow(s.beta1, t);
      const double c2 = 1.0 - std::pow(s.beta2, t);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double g = grads[i];
        m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * g;
        v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * g * g;
        const double m_hat = m[i] / c1;
        const double v_hat = v[i] / c2;
        params[i] -= s.learning_rate * m_hat / (std::sqrt(v_hat) + s.epsilon);
      }
      break;
    }
  }
  ++state.step;
}

}  // namespace wgf::nn
