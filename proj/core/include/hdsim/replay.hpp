#pragma once

#include <cstddef>
#include <vector>

#include "hdsim/fleet.hpp"

namespace hdsim {

struct Transition {
  std::vector<double> state;
  int action = 0;  // zero-based slot
  double reward = 0.0;
  std::vector<double> next_state;
  bool done = false;
};

/// Binary sum tree over leaf priorities.
class SumTree {
 public:
  explicit SumTree(std::size_t capacity);

  void set(std::size_t leaf, double value);
  [[nodiscard]] double get(std::size_t leaf) const { return nodes_[base_ + leaf]; }
  [[nodiscard]] double total() const { return nodes_[1]; }
  [[nodiscard]] std::size_t capacity() const { return capacity_; }
  /// Leaf whose cumulative interval contains mass (0 <= mass < total()).
  [[nodiscard]] std::size_t find(double mass) const;

 private:
  std::size_t capacity_;
  std::size_t base_;
  std::vector<double> nodes_;
};

struct ReplaySample {
  std::vector<std::size_t> indices;
  std::vector<double> weights;  // importance-sampling weights, max-normalized
};

/// Prioritized ring buffer: P(i) proportional to priority_i^alpha.
class ReplayMemory {
 public:
  ReplayMemory(std::size_t capacity, double alpha = 0.6, double priority_eps = 1e-6);

  /// New entries get the largest priority seen so far.
  void add(Transition t);
  /// Independent draws with replacement. Throws std::logic_error when empty.
  [[nodiscard]] ReplaySample sample(std::size_t batch, double beta, Rng& rng) const;
  /// priority = |td_error| + eps.
  void update_priority(std::size_t index, double td_error);

  [[nodiscard]] const Transition& at(std::size_t index) const { return data_.at(index); }
  [[nodiscard]] std::size_t size() const { return data_.size(); }
  [[nodiscard]] std::size_t capacity() const { return capacity_; }
  [[nodiscard]] bool empty() const { return data_.empty(); }
  [[nodiscard]] double alpha() const { return alpha_; }
  [[nodiscard]] double priority(std::size_t index) const;
  /// Sampling probability of one stored entry.
  [[nodiscard]] double probability(std::size_t index) const;

 private:
  std::size_t capacity_;
  double alpha_;
  double eps_;
  double max_priority_ = 1.0;
  std::size_t next_ = 0;
  std::vector<Transition> data_;
  std::vector<double> priorities_;
  SumTree tree_;
};

}  // namespace hdsim
