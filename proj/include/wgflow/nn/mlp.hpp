#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "wgflow/rng.hpp"

namespace wgf::nn {

enum class Activation { tanh, relu, identity };

Activation parse_activation(std::string_view name);
std::string to_string(Activation a);

/// A whole network as one contiguous parameter vector.
using FlatView = Eigen::VectorXd;

/// Number of reals in a network with these layer sizes: sum over layers of (n_in + 1) * n_out.
Eigen::Index flat_length(const std::vector<int>& layer_sizes);

/// Feed-forward network parameters.
///
/// All weights and biases live in one flat fp64 vector laid out layer by layer as
/// [W_0 (row-major, n_out x n_in), b_0, W_1, b_1, ...]. `weight()` / `bias()` return
/// Eigen maps into that vector, so the network can be handed to a particle flow or an
/// optimizer as a single point in R^P without copying.
///
/// Every mutable access bumps a generation counter; forward caches remember the
/// generation they were produced at and backward refuses stale ones.
class MlpParams {
 public:
  using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  MlpParams();
  /// Zero-initialized network. `activations` has one entry per affine layer.
  MlpParams(std::vector<int> layer_sizes, std::vector<Activation> activations);

  /// Uniform(+-sqrt(6 / (n_in + n_out))) weights, zero biases.
  static MlpParams glorot(std::vector<int> layer_sizes, std::vector<Activation> activations, Rng& rng);

  MlpParams(const MlpParams& other);
  MlpParams& operator=(const MlpParams& other);
  MlpParams(MlpParams&& other) noexcept;
  MlpParams& operator=(MlpParams&& other) noexcept;
  ~MlpParams() = default;

  int num_layers() const { return static_cast<int>(activations_.size()); }
  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  const std::vector<int>& layer_sizes() const { return sizes_; }
  const std::vector<Activation>& activations() const { return activations_; }
  Eigen::Index size() const { return flat_.size(); }

  Eigen::Map<const RowMatrix> weight(int layer) const;
  Eigen::Map<RowMatrix> weight(int layer);
  Eigen::Map<const Eigen::VectorXd> bias(int layer) const;
  Eigen::Map<Eigen::VectorXd> bias(int layer);

  const Eigen::VectorXd& flat() const { return flat_; }
  Eigen::VectorXd& flat() {
    ++generation_;
    return flat_;
  }

  std::uint64_t id() const { return id_; }
  std::uint64_t generation() const { return generation_; }

 private:
  std::vector<int> sizes_;
  std::vector<Activation> activations_;
  std::vector<Eigen::Index> offsets_;  // start of W_l in flat_; b_l follows W_l
  Eigen::VectorXd flat_;
  std::uint64_t id_;
  std::uint64_t generation_ = 0;
};

/// Post-activation values of every layer for one batch (column per sample), plus
/// the identity of the parameters that produced them.
struct MlpCache {
  std::vector<Eigen::MatrixXd> layer_outputs;  // [0] is the input batch
  std::uint64_t params_id = 0;
  std::uint64_t generation = 0;
};

struct MlpForward {
  Eigen::MatrixXd output;
  MlpCache cache;
};

struct MlpGradients {
  Eigen::VectorXd params;  // flat layout, summed over the batch
  Eigen::MatrixXd input;   // one column per sample
};

/// Batched forward pass. `input` is n_in x B.
MlpForward mlp_forward(const MlpParams& params, const Eigen::Ref<const Eigen::MatrixXd>& input);

/// Forward pass without retaining a cache.
Eigen::MatrixXd mlp_predict(const MlpParams& params, const Eigen::Ref<const Eigen::MatrixXd>& input);

/// Reverse-mode gradients for the batch the cache was built from. `output_grad` is n_out x B.
/// Throws ContractError if the cache came from different (or since-modified) parameters.
MlpGradients mlp_backward(const MlpParams& params, const MlpCache& cache,
                          const Eigen::Ref<const Eigen::MatrixXd>& output_grad);

/// Input gradient only; skips the parameter gradients.
Eigen::MatrixXd mlp_input_gradient(const MlpParams& params, const MlpCache& cache,
                                   const Eigen::Ref<const Eigen::MatrixXd>& output_grad);

FlatView flatten(const MlpParams& params);
MlpParams unflatten(const FlatView& flat, const std::vector<int>& layer_sizes,
                    const std::vector<Activation>& activations);

}  // namespace wgf::nn
