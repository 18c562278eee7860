#include "wgflow/rl/replay.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "wgflow/error.hpp"

namespace wgf::rl {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw InputError("replay buffer: capacity must be positive");
}

void ReplayBuffer::push(envs::Transition t) {
  if (!t.state.allFinite() || !t.action.allFinite() || !t.next_state.allFinite() || !std::isfinite(t.reward))
    throw InputError("replay buffer: transition has non-finite fields");
  if (size_ < capacity_) {
    slots_.push_back(std::move(t));
    ++size_;
    return;
  }
  slots_[head_] = std::move(t);
  head_ = (head_ + 1) % capacity_;
}

const envs::Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= size_) throw InputError("replay buffer: index out of range");
  return slots_[(head_ + i) % capacity_];
}

std::optional<std::vector<envs::Transition>> ReplayBuffer::sample(std::size_t n, Rng& rng) const {
  if (n == 0 || size_ < n) return std::nullopt;
  std::unordered_set<std::size_t> chosen;
  std::vector<std::size_t> order;
  order.reserve(n);
  for (std::size_t j = size_ - n; j < size_; ++j) {
    const std::size_t t = rng.index(j + 1);
    if (chosen.insert(t).second) {
      order.push_back(t);
    } else {
      chosen.insert(j);
      order.push_back(j);
    }
  }
  std::shuffle(order.begin(), order.end(), rng.engine());
  std::vector<envs::Transition> out;
  out.reserve(n);
  for (std::size_t i : order) out.push_back(at(i));
  return out;
}

void ReplayBuffer::clear() {
  slots_.clear();
  head_ = 0;
  size_ = 0;
}

TransitionBatch make_batch(const std::vector<envs::Transition>& transitions) {
  if (transitions.empty()) throw InputError("make_batch: no transitions");
  const auto n = static_cast<Eigen::Index>(transitions.size());
  const Eigen::Index obs = transitions.front().state.size();
  const Eigen::Index act = transitions.front().action.size();
  TransitionBatch b;
  b.states.resize(obs, n);
  b.actions.resize(act, n);
  b.rewards.resize(n);
  b.next_states.resize(obs, n);
  b.dones.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& t = transitions[static_cast<std::size_t>(i)];
    if (t.state.size() != obs || t.action.size() != act || t.next_state.size() != obs)
      throw InputError("make_batch: transitions have inconsistent shapes");
    b.states.col(i) = t.state;
    b.actions.col(i) = t.action;
    b.rewards[i] = t.reward;
    b.next_states.col(i) = t.next_state;
    b.dones[i] = t.done ? 1.0 : 0.0;
  }
  return b;
}

}  // namespace wgf::rl
