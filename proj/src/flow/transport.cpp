#include "wgflow/flow/transport.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wgflow/error.hpp"
#include "wgflow/flow/kernel.hpp"

namespace wgf::flow {
namespace {

struct Potentials {
  Eigen::VectorXd alpha;  // row potentials in cost units: log u_i = alpha_i / lambda
  Eigen::VectorXd beta;   // column potentials: log v_j = beta_j / lambda
};

// One alternating sweep. In cost units the updates are
//   alpha_i = -lambda * (log M + LSE_j((beta_j - c_ij) / lambda))
//   beta_j  = -lambda * (log M + LSE_i((alpha_i - c_ij) / lambda))
void sweep(const Eigen::Ref<const Eigen::MatrixXd>& cost, double lambda, Potentials& p) {
  const Eigen::Index m = cost.rows();
  const double log_m = std::log(static_cast<double>(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < m; ++j) mx = std::max(mx, (p.beta[j] - cost(i, j)) / lambda);
    double s = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) s += std::exp((p.beta[j] - cost(i, j)) / lambda - mx);
    p.alpha[i] = -lambda * (log_m + mx + std::log(s));
  }
  for (Eigen::Index j = 0; j < m; ++j) {
    double mx = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < m; ++i) mx = std::max(mx, (p.alpha[i] - cost(i, j)) / lambda);
    double s = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) s += std::exp((p.alpha[i] - cost(i, j)) / lambda - mx);
    p.beta[j] = -lambda * (log_m + mx + std::log(s));
  }
}

Eigen::MatrixXd plan_from(const Eigen::Ref<const Eigen::MatrixXd>& cost, double lambda, const Potentials& p) {
  const Eigen::Index m = cost.rows();
  Eigen::MatrixXd plan(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) plan(i, j) = std::exp((p.alpha[i] + p.beta[j] - cost(i, j)) / lambda);
  return plan;
}

double marginal_violation(const Eigen::MatrixXd& plan) {
  const double target = 1.0 / static_cast<double>(plan.rows());
  const double rows = (plan.rowwise().sum().array() - target).abs().maxCoeff();
  const double cols = (plan.colwise().sum().array() - target).abs().maxCoeff();
  return std::max(rows, cols);
}


// Dual objective in log-potential units (f = alpha / lambda, g = beta / lambda):
//   D = (sum f + sum g) / M - sum_ij exp(f_i + g_j - c_ij / lambda), concave.
double dual_value(const Eigen::Ref<const Eigen::MatrixXd>& cost, double lambda, const Potentials& p) {
  const double m = static_cast<double>(cost.rows());
  return (p.alpha.sum() + p.beta.sum()) / (lambda * m) - plan_from(cost, lambda, p).sum();
}

// One damped Newton step on the dual with the last column potential held fixed (the dual
// is invariant to f + t, g - t). Returns false when no ascent step was found.
bool newton_step(const Eigen::Ref<const Eigen::MatrixXd>& cost, double lambda, Potentials& p) {
  const Eigen::Index m = cost.rows();
  if (m == 1) return false;
  const Eigen::MatrixXd plan = plan_from(cost, lambda, p);
  const double target = 1.0 / static_cast<double>(m);
  const Eigen::Index n = 2 * m - 1;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd grad(n);
  for (Eigen::Index i = 0; i < m; ++i) {
    h(i, i) = plan.row(i).sum();
    grad[i] = target - h(i, i);
  }
  for (Eigen::Index j = 0; j + 1 < m; ++j) {
    h(m + j, m + j) = plan.col(j).sum();
    grad[m + j] = target - h(m + j, m + j);
    for (Eigen::Index i = 0; i < m; ++i) {
      h(i, m + j) = plan(i, j);
      h(m + j, i) = plan(i, j);
    }
  }
  const Eigen::VectorXd delta = h.ldlt().solve(grad);
  if (!delta.allFinite()) return false;
  const double before = dual_value(cost, lambda, p);
  for (double t = 1.0; t > 1e-4; t *= 0.5) {
    Potentials trial = p;
    trial.alpha += (t * lambda) * delta.head(m);
    trial.beta.head(m - 1) += (t * lambda) * delta.tail(m - 1);
    if (dual_value(cost, lambda, trial) >= before) {
      p = std::move(trial);
      return true;
    }
  }
  return false;
}

}  // namespace

Eigen::MatrixXd squared_distance_matrix(const ParticleEnsemble& a, const ParticleEnsemble& b) {
  if (a.dim() != b.dim()) throw InputError("squared_distance_matrix: dimension mismatch");
  Eigen::MatrixXd c(a.count(), b.count());
  for (Eigen::Index i = 0; i < a.count(); ++i)
    for (Eigen::Index j = 0; j < b.count(); ++j) c(i, j) = squared_distance(a.point(i), b.point(j));
  return c;
}

TransportPlan entropic_plan(const Eigen::Ref<const Eigen::MatrixXd>& cost, double lambda, int max_iters, double tol) {
  if (!(lambda > 0.0)) throw InputError("entropic_plan: lambda must be positive");
  if (cost.rows() != cost.cols() || cost.rows() < 1) throw InputError("entropic_plan: cost must be square, M >= 1");
  if (!cost.allFinite() || (cost.array() < 0.0).any())
    throw InputError("entropic_plan: cost must be finite and non-negative");

  const Eigen::Index m = cost.rows();
  Potentials pot{Eigen::VectorXd::Zero(m), Eigen::VectorXd::Zero(m)};

  // Warm start: halve lambda from the cost scale down to the target, a few sweeps each.
  const double scale = std::max(cost.maxCoeff(), lambda);
  int used = 0;
  for (double stage = scale; stage > lambda && used < max_iters; stage *= 0.5) {
    for (int k = 0; k < 20 && used < max_iters; ++k, ++used) sweep(cost, stage, pot);
  }

  TransportPlan out;
  out.cost = cost;
  double violation = std::numeric_limits<double>::infinity();
  // Sinkhorn sweeps; when they slow down (near-tied assignments at small lambda), a few
  // Newton steps on the dual finish the solve.
  int since_polish = 0;
  while (used < max_iters) {
    sweep(cost, lambda, pot);
    ++used;
    out.weights = plan_from(cost, lambda, pot);
    violation = marginal_violation(out.weights);
    if (violation <= tol) break;
    if (++since_polish < 200) continue;
    since_polish = 0;
    for (int k = 0; k < 30 && used < max_iters && violation > tol; ++k, ++used) {
      if (!newton_step(cost, lambda, pot)) break;
      out.weights = plan_from(cost, lambda, pot);
      violation = marginal_violation(out.weights);
    }
    if (violation <= tol) break;
  }
  if (!(violation <= tol))
    throw ConvergenceError("entropic_plan: marginals off by " + std::to_string(violation) + " after " +
                               std::to_string(used) + " sweeps",
                           violation);
  out.marginal_violation = violation;
  out.iterations = used;
  out.transport_cost = (out.weights.array() * cost.array()).sum();
  return out;
}

double exact_w2_squared(const ParticleEnsemble& a, const ParticleEnsemble& b) {
  if (a.count() != b.count()) throw InputError("exact_w2_squared: ensembles must have equal counts");
  if (a.count() > 10) throw InputError("exact_w2_squared: refusing M > 10 (enumerates M! permutations)");
  if (a.dim() != b.dim()) throw InputError("exact_w2_squared: dimension mismatch");

  const Eigen::MatrixXd c = squared_distance_matrix(a, b);
  const auto m = static_cast<int>(a.count());
  std::vector<int> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += c(i, perm[i]);
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / m;
}

}  // namespace wgf::flow
