#include "dsac/replay.hpp"

#include <cmath>

#include "dsac/errors.hpp"

namespace dsac {

Batch Batch::from(std::span<const Transition> transitions) {
  if (transitions.empty()) throw ContractViolation("Batch::from: empty transition list");
  const auto n = static_cast<Eigen::Index>(transitions.size());
  const Eigen::Index obs_dim = transitions.front().s.size();
  const Eigen::Index act_dim = transitions.front().a.size();
  Batch b;
  b.states.resize(obs_dim, n);
  b.actions.resize(act_dim, n);
  b.rewards.resize(n);
  b.next_states.resize(obs_dim, n);
  b.done.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& t = transitions[static_cast<std::size_t>(j)];
    b.states.col(j) = t.s;
    b.actions.col(j) = t.a;
    b.rewards(j) = t.r;
    b.next_states.col(j) = t.s_next;
    b.done(j) = t.done ? 1.0 : 0.0;
  }
  return b;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity, Eigen::Index obs_dim, Eigen::Index act_dim)
    : capacity_(capacity), obs_dim_(obs_dim), act_dim_(act_dim) {
  if (capacity == 0) throw ConfigError("replay buffer capacity must be positive");
}

void ReplayBuffer::push(Transition t) {
  if (t.s.size() != obs_dim_ || t.s_next.size() != obs_dim_ || t.a.size() != act_dim_)
    throw ConfigError("replay push: transition dimensions do not match the environment");
  if (!std::isfinite(t.r)) throw ConfigError("replay push: non-finite reward");
  if (storage_.size() < capacity_) {
    storage_.push_back(std::move(t));
    ++count_;
    return;
  }
  storage_[cursor_] = std::move(t);
  cursor_ = (cursor_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= count_) throw ContractViolation("ReplayBuffer::at: index out of range");
  return storage_[(cursor_ + i) % storage_.size()];
}

std::vector<Transition> ReplayBuffer::sample(std::size_t n, Rng& rng) const {
  if (n == 0 || count_ == 0) throw ContractViolation("ReplayBuffer::sample: empty buffer or zero draws");
  std::uniform_int_distribution<std::size_t> pick(0, count_ - 1);
  std::vector<Transition> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) out.push_back(storage_[pick(rng)]);
  return out;
}

Batch ReplayBuffer::sample_batch(std::size_t n, Rng& rng) const {
  if (n == 0 || count_ == 0) throw ContractViolation("ReplayBuffer::sample: empty buffer or zero draws");
  std::uniform_int_distribution<std::size_t> pick(0, count_ - 1);
  const auto cols = static_cast<Eigen::Index>(n);
  Batch b;
  b.states.resize(obs_dim_, cols);
  b.actions.resize(act_dim_, cols);
  b.rewards.resize(cols);
  b.next_states.resize(obs_dim_, cols);
  b.done.resize(cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    const auto& t = storage_[pick(rng)];
    b.states.col(j) = t.s;
    b.actions.col(j) = t.a;
    b.rewards(j) = t.r;
    b.next_states.col(j) = t.s_next;
    b.done(j) = t.done ? 1.0 : 0.0;
  }
  return b;
}

}  // namespace dsac
