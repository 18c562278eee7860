#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace wgf::targets {

/// Regression data split into train and test, standardized with train statistics.
/// Features are stored one sample per column (D x N) to match the network batch layout.
struct RegressionDataset {
  Eigen::MatrixXd x_train, x_test;  // D x N, standardized
  Eigen::VectorXd y_train, y_test;  // standardized
  Eigen::VectorXd x_mean, x_std;
  double y_mean = 0.0;
  double y_std = 1.0;
  std::vector<std::size_t> train_index, test_index;  // rows of the source table

  int feature_dim() const { return static_cast<int>(x_train.rows()); }
};

/// Shuffles rows with `seed`, puts round(ratio * N) in train, standardizes with population
/// statistics of the train rows (a zero standard deviation is replaced by 1).
/// `features` is N x D, one row per sample. Needs N >= 10 and 0 < ratio < 1.
RegressionDataset make_dataset(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets, double split_ratio,
                               std::uint64_t seed);

/// Numeric CSV with a header row. `target_column` names the response; every other column is
/// a feature. Non-numeric cells raise ParseError with the 1-based row and column.
RegressionDataset load_csv_dataset(const std::string& path, const std::string& target_column, double split_ratio,
                                   std::uint64_t seed);

/// y = sin(x) + N(0, noise^2), x ~ Uniform(-3, 3); rows are generated from `seed`.
void synthetic_sine(int n, double noise_std, std::uint64_t seed, Eigen::MatrixXd& features, Eigen::VectorXd& targets);

}  // namespace wgf::targets
