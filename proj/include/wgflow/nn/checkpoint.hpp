#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "wgflow/nn/mlp.hpp"

namespace wgf::nn {

/// Row-major named tensor as stored in a checkpoint.
struct NamedTensor {
  std::string name;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  std::vector<double> values;
};

// Text checkpoint: for each tensor a header line "name rows cols" followed by one
// line per row of space-separated values printed with 17 significant digits, which
// round-trips every fp64 exactly.
void write_checkpoint(std::ostream& out, const std::vector<NamedTensor>& tensors);
void write_checkpoint(const std::filesystem::path& path, const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> read_checkpoint(std::istream& in);
std::vector<NamedTensor> read_checkpoint(const std::filesystem::path& path);

/// "<prefix>.layer<l>.weight" (n_out x n_in) and "<prefix>.layer<l>.bias" (n_out x 1).
std::vector<NamedTensor> to_tensors(const MlpParams& params, std::string_view prefix);
/// Fills `params` (architecture already set) from tensors carrying `prefix`.
void from_tensors(MlpParams& params, const std::vector<NamedTensor>& tensors, std::string_view prefix);

NamedTensor vector_tensor(std::string name, const Eigen::VectorXd& v);

}  // namespace wgf::nn
