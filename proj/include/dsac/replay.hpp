#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dsac/rng.hpp"

namespace dsac {

struct Transition {
  Eigen::VectorXd s;
  Eigen::VectorXd a;  // post-squash, in [-1, 1]^d
  double r = 0.0;
  Eigen::VectorXd s_next;
  bool done = false;       // true terminal state: no bootstrap
  bool truncated = false;  // time limit: bootstrap as usual
};

/// Column-stacked view of a list of transitions.
struct Batch {
  Eigen::MatrixXd states;       // obs_dim x n
  Eigen::MatrixXd actions;      // act_dim x n
  Eigen::VectorXd rewards;      // n
  Eigen::MatrixXd next_states;  // obs_dim x n
  Eigen::VectorXd done;         // 1.0 on true terminals, else 0.0

  Eigen::Index size() const { return rewards.size(); }
  static Batch from(std::span<const Transition> transitions);
};

/// Fixed-capacity FIFO with uniform sampling (with replacement).
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, Eigen::Index obs_dim, Eigen::Index act_dim);

  /// Throws ConfigError on dimension mismatch or non-finite reward.
  void push(Transition t);
  /// With replacement, so n may exceed size(). Throws ContractViolation if n == 0
  /// or the buffer is empty.
  std::vector<Transition> sample(std::size_t n, Rng& rng) const;
  Batch sample_batch(std::size_t n, Rng& rng) const;

  std::size_t size() const { return count_; }
  std::size_t capacity() const { return capacity_; }
  /// i-th oldest stored transition.
  const Transition& at(std::size_t i) const;

 private:
  std::size_t capacity_;
  Eigen::Index obs_dim_;
  Eigen::Index act_dim_;
  std::vector<Transition> storage_;
  std::size_t cursor_ = 0;  // next slot to overwrite once full
  std::size_t count_ = 0;
};

}  // namespace dsac
