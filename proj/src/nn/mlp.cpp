#include "wgflow/nn/mlp.hpp"

#include <atomic>
#include <cmath>

#include "wgflow/error.hpp"

namespace wgf::nn {
namespace {

std::uint64_t next_params_id() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}

void check_architecture(const std::vector<int>& sizes, const std::vector<Activation>& acts) {
  if (sizes.size() < 2) throw InputError("mlp: need at least input and output layer sizes");
  for (int s : sizes)
    if (s <= 0) throw InputError("mlp: layer sizes must be positive");
  if (acts.size() != sizes.size() - 1)
    throw InputError("mlp: need exactly one activation per affine layer");
}

void apply_activation(Activation a, Eigen::MatrixXd& z) {
  switch (a) {
    case Activation::tanh: z = z.array().tanh().matrix(); break;
    case Activation::relu: z = z.array().max(0.0).matrix(); break;
    case Activation::identity: break;
  }
}

// Multiplies `delta` in place by the activation derivative, expressed through the
// post-activation value `y`.
void scale_by_derivative(Activation a, const Eigen::MatrixXd& y, Eigen::MatrixXd& delta) {
  switch (a) {
    case Activation::tanh: delta.array() *= (1.0 - y.array().square()); break;
    case Activation::relu: delta.array() *= (y.array() > 0.0).cast<double>(); break;
    case Activation::identity: break;
  }
}

}  // namespace

Activation parse_activation(std::string_view name) {
  if (name == "tanh") return Activation::tanh;
  if (name == "relu") return Activation::relu;
  if (name == "identity" || name == "linear") return Activation::identity;
  throw InputError("unknown activation '" + std::string(name) + "'");
}

std::string to_string(Activation a) {
  switch (a) {
    case Activation::tanh: return "tanh";
    case Activation::relu: return "relu";
    case Activation::identity: return "identity";
  }
  return "?";
}

Eigen::Index flat_length(const std::vector<int>& layer_sizes) {
  Eigen::Index n = 0;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l)
    n += static_cast<Eigen::Index>(layer_sizes[l] + 1) * layer_sizes[l + 1];
  return n;
}

MlpParams::MlpParams() : id_(next_params_id()) {}

MlpParams::MlpParams(std::vector<int> layer_sizes, std::vector<Activation> activations)
    : sizes_(std::move(layer_sizes)), activations_(std::move(activations)), id_(next_params_id()) {
  check_architecture(sizes_, activations_);
  Eigen::Index offset = 0;
  for (int l = 0; l < num_layers(); ++l) {
    offsets_.push_back(offset);
    offset += static_cast<Eigen::Index>(sizes_[l] + 1) * sizes_[l + 1];
  }
  flat_ = Eigen::VectorXd::Zero(offset);
}

MlpParams MlpParams::glorot(std::vector<int> layer_sizes, std::vector<Activation> activations, Rng& rng) {
  MlpParams p(std::move(layer_sizes), std::move(activations));
  for (int l = 0; l < p.num_layers(); ++l) {
    const int n_in = p.sizes_[l];
    const int n_out = p.sizes_[l + 1];
    const double limit = std::sqrt(6.0 / (n_in + n_out));
    auto w = p.weight(l);
    for (int r = 0; r < n_out; ++r)
      for (int c = 0; c < n_in; ++c) w(r, c) = rng.uniform(-limit, limit);
  }
  return p;
}

MlpParams::MlpParams(const MlpParams& other)
    : sizes_(other.sizes_),
      activations_(other.activations_),
      offsets_(other.offsets_),
      flat_(other.flat_),
      id_(next_params_id()) {}

MlpParams& MlpParams::operator=(const MlpParams& other) {
  if (this != &other) {
    sizes_ = other.sizes_;
    activations_ = other.activations_;
    offsets_ = other.offsets_;
    flat_ = other.flat_;
    ++generation_;
  }
  return *this;
}

MlpParams::MlpParams(MlpParams&& other) noexcept
    : sizes_(std::move(other.sizes_)),
      activations_(std::move(other.activations_)),
      offsets_(std::move(other.offsets_)),
      flat_(std::move(other.flat_)),
      id_(other.id_),
      generation_(other.generation_) {
  other.id_ = next_params_id();
}

MlpParams& MlpParams::operator=(MlpParams&& other) noexcept {
  if (this != &other) {
    sizes_ = std::move(other.sizes_);
    activations_ = std::move(other.activations_);
    offsets_ = std::move(other.offsets_);
    flat_ = std::move(other.flat_);
    ++generation_;
    other.id_ = next_params_id();
  }
  return *this;
}

Eigen::Map<const MlpParams::RowMatrix> MlpParams::weight(int layer) const {
  return {flat_.data() + offsets_[layer], sizes_[layer + 1], sizes_[layer]};
}

Eigen::Map<MlpParams::RowMatrix> MlpParams::weight(int layer) {
  ++generation_;
  return {flat_.data() + offsets_[layer], sizes_[layer + 1], sizes_[layer]};
}

Eigen::Map<const Eigen::VectorXd> MlpParams::bias(int layer) const {
  const Eigen::Index w = static_cast<Eigen::Index>(sizes_[layer + 1]) * sizes_[layer];
  return {flat_.data() + offsets_[layer] + w, sizes_[layer + 1]};
}

Eigen::Map<Eigen::VectorXd> MlpParams::bias(int layer) {
  ++generation_;
  const Eigen::Index w = static_cast<Eigen::Index>(sizes_[layer + 1]) * sizes_[layer];
  return {flat_.data() + offsets_[layer] + w, sizes_[layer + 1]};
}

MlpForward mlp_forward(const MlpParams& params, const Eigen::Ref<const Eigen::MatrixXd>& input) {
  if (input.rows() != params.input_dim())
    throw InputError("mlp_forward: input has " + std::to_string(input.rows()) + " rows, network expects " +
                     std::to_string(params.input_dim()));
  MlpForward out;
  out.cache.params_id = params.id();
  out.cache.generation = params.generation();
  out.cache.layer_outputs.reserve(params.num_layers() + 1);
  out.cache.layer_outputs.emplace_back(input);
  for (int l = 0; l < params.num_layers(); ++l) {
    Eigen::MatrixXd z = params.weight(l) * out.cache.layer_outputs.back();
    z.colwise() += params.bias(l);
    apply_activation(params.activations()[l], z);
    out.cache.layer_outputs.push_back(std::move(z));
  }
  out.output = out.cache.layer_outputs.back();
  return out;
}

Eigen::MatrixXd mlp_predict(const MlpParams& params, const Eigen::Ref<const Eigen::MatrixXd>& input) {
  if (input.rows() != params.input_dim())
    throw InputError("mlp_predict: input has " + std::to_string(input.rows()) + " rows, network expects " +
                     std::to_string(params.input_dim()));
  Eigen::MatrixXd a = input;
  for (int l = 0; l < params.num_layers(); ++l) {
    Eigen::MatrixXd z = params.weight(l) * a;
    z.colwise() += params.bias(l);
    apply_activation(params.activations()[l], z);
    a = std::move(z);
  }
  return a;
}

namespace {

MlpGradients backward_pass(const MlpParams& params, const MlpCache& cache,
                           const Eigen::Ref<const Eigen::MatrixXd>& output_grad, bool want_params) {
  if (cache.params_id != params.id() || cache.generation != params.generation())
    throw ContractError("mlp_backward: cache was produced by different or since-modified parameters");
  const auto& ys = cache.layer_outputs;
  if (static_cast<int>(ys.size()) != params.num_layers() + 1)
    throw ContractError("mlp_backward: cache depth does not match network");
  if (output_grad.rows() != params.output_dim() || output_grad.cols() != ys.back().cols())
    throw InputError("mlp_backward: output gradient shape mismatch");

  MlpGradients g;
  if (want_params) g.params = Eigen::VectorXd::Zero(params.size());
  Eigen::MatrixXd delta = output_grad;
  Eigen::Index offset = params.size();
  for (int l = params.num_layers() - 1; l >= 0; --l) {
    scale_by_derivative(params.activations()[l], ys[l + 1], delta);
    const Eigen::Index n_out = params.layer_sizes()[l + 1];
    const Eigen::Index n_in = params.layer_sizes()[l];
    offset -= (n_in + 1) * n_out;
    if (want_params) {
      Eigen::Map<MlpParams::RowMatrix> gw(g.params.data() + offset, n_out, n_in);
      Eigen::Map<Eigen::VectorXd> gb(g.params.data() + offset + n_out * n_in, n_out);
      gw.noalias() = delta * ys[l].transpose();
      gb = delta.rowwise().sum();
    }
    Eigen::MatrixXd next = params.weight(l).transpose() * delta;
    delta = std::move(next);
  }
  g.input = std::move(delta);
  return g;
}

}  // namespace

MlpGradients mlp_backward(const MlpParams& params, const MlpCache& cache,
                          const Eigen::Ref<const Eigen::MatrixXd>& output_grad) {
  return backward_pass(params, cache, output_grad, true);
}

Eigen::MatrixXd mlp_input_gradient(const MlpParams& params, const MlpCache& cache,
                                   const Eigen::Ref<const Eigen::MatrixXd>& output_grad) {
  return backward_pass(params, cache, output_grad, false).input;
}

FlatView flatten(const MlpParams& params) { return params.flat(); }

MlpParams unflatten(const FlatView& flat, const std::vector<int>& layer_sizes,
                    const std::vector<Activation>& activations) {
  MlpParams p(layer_sizes, activations);
  if (flat.size() != p.size())
    throw InputError("unflatten: got " + std::to_string(flat.size()) + " values, architecture needs " +
                     std::to_string(p.size()));
  p.flat() = flat;
  return p;
}

}  // namespace wgf::nn
