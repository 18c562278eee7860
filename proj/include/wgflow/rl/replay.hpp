#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "wgflow/envs/env.hpp"
#include "wgflow/rng.hpp"

namespace wgf::rl {

/// Fixed-capacity FIFO store of transitions. Once full, each push evicts the oldest entry.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  /// Throws InputError on non-finite fields.
  void push(envs::Transition t);

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  /// i = 0 is the oldest stored transition.
  const envs::Transition& at(std::size_t i) const;

  /// n distinct transitions drawn uniformly (Floyd's algorithm, then shuffled).
  /// Empty when fewer than n are stored.
  std::optional<std::vector<envs::Transition>> sample(std::size_t n, Rng& rng) const;

  void clear();

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // slot of the oldest entry
  std::size_t size_ = 0;
  std::vector<envs::Transition> slots_;
};

/// Column-stacked view of a list of transitions.
struct TransitionBatch {
  Eigen::MatrixXd states;       // obs_dim x B
  Eigen::MatrixXd actions;      // act_dim x B
  Eigen::VectorXd rewards;      // B
  Eigen::MatrixXd next_states;  // obs_dim x B
  Eigen::VectorXd dones;        // 1 where bootstrapping stops
  Eigen::Index size() const { return rewards.size(); }
};

TransitionBatch make_batch(const std::vector<envs::Transition>& transitions);

}  // namespace wgf::rl
