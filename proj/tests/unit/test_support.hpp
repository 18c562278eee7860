#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>

#include <Eigen/Core>

#include "wgflow/flow/particles.hpp"
#include "wgflow/rng.hpp"

namespace wgf::test_util {

/// Hand-rolled generator for property tests: each case gets its own seeded source.
struct Gen {
  Rng rng;
  explicit Gen(std::uint64_t seed) : rng(Rng::stream(seed, "property")) {}

  int integer(int lo, int hi) { return lo + static_cast<int>(rng.index(static_cast<std::size_t>(hi - lo + 1))); }
  double real(double lo, double hi) { return rng.uniform(lo, hi); }
  Eigen::VectorXd vector(Eigen::Index n, double scale = 1.0) { return scale * rng.normal_vector(n); }
  Eigen::MatrixXd matrix(Eigen::Index r, Eigen::Index c, double scale = 1.0) { return scale * rng.normal_matrix(r, c); }
  flow::ParticleEnsemble ensemble(Eigen::Index d, Eigen::Index m, double scale = 1.0) {
    return flow::ParticleEnsemble(matrix(d, m, scale));
  }
};

inline constexpr int kPropertyCases = 120;

/// Central finite-difference gradient of a scalar function.
inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd x,
                                   double step = 1e-5) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + step;
    const double up = f(x);
    x[i] = keep - step;
    const double down = f(x);
    x[i] = keep;
    g[i] = (up - down) / (2.0 * step);
  }
  return g;
}

/// max_i |a_i - b_i| / max(|a|_inf, |b|_inf, floor)
inline double rel_error(const Eigen::Ref<const Eigen::MatrixXd>& a, const Eigen::Ref<const Eigen::MatrixXd>& b,
                        double floor = 1e-8) {
  const double scale = std::max({a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff(), floor});
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

}  // namespace wgf::test_util
