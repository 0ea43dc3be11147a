#include "hdsim/replay.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hdsim {

SumTree::SumTree(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("SumTree: capacity must be positive");
  base_ = 1;
  while (base_ < capacity) base_ <<= 1;
  nodes_.assign(2 * base_, 0.0);
}

void SumTree::set(std::size_t leaf, double value) {
  if (leaf >= capacity_) throw std::out_of_range("SumTree: leaf out of range");
  std::size_t node = base_ + leaf;
  nodes_[node] = value;
  for (node >>= 1; node >= 1; node >>= 1) nodes_[node] = nodes_[2 * node] + nodes_[2 * node + 1];
}

std::size_t SumTree::find(double mass) const {
  std::size_t node = 1;
  while (node < base_) {
    const double left = nodes_[2 * node];
    if (mass < left || nodes_[2 * node + 1] <= 0.0) {
      node = 2 * node;
    } else {
      mass -= left;
      node = 2 * node + 1;
    }
  }
  return std::min(node - base_, capacity_ - 1);
}

ReplayMemory::ReplayMemory(std::size_t capacity, double alpha, double priority_eps)
    : capacity_(capacity), alpha_(alpha), eps_(priority_eps), tree_(capacity) {
  if (alpha < 0.0) throw std::invalid_argument("ReplayMemory: alpha must be >= 0");
  if (!(priority_eps > 0.0)) throw std::invalid_argument("ReplayMemory: priority eps must be positive");
  data_.reserve(std::min<std::size_t>(capacity, 1024));
}

void ReplayMemory::add(Transition t) {
  if (data_.size() < capacity_) {
    data_.push_back(std::move(t));
    priorities_.push_back(max_priority_);
  } else {
    data_[next_] = std::move(t);
    priorities_[next_] = max_priority_;
  }
  tree_.set(next_, std::pow(max_priority_, alpha_));
  next_ = (next_ + 1) % capacity_;
}

ReplaySample ReplayMemory::sample(std::size_t batch, double beta, Rng& rng) const {
  if (data_.empty()) throw std::logic_error("ReplayMemory: cannot sample from an empty memory");
  ReplaySample out;
  out.indices.reserve(batch);
  out.weights.reserve(batch);
  const double total = tree_.total();
  std::uniform_real_distribution<double> unit(0.0, total);
  const auto n = static_cast<double>(data_.size());
  double max_w = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    std::size_t idx = tree_.find(unit(rng));
    if (idx >= data_.size()) idx = data_.size() - 1;
    const double p = tree_.get(idx) / total;
    const double w = std::pow(n * p, -beta);
    out.indices.push_back(idx);
    out.weights.push_back(w);
    max_w = std::max(max_w, w);
  }
  for (auto& w : out.weights) w /= max_w;
  return out;
}

void ReplayMemory::update_priority(std::size_t index, double td_error) {
  if (index >= data_.size()) throw std::out_of_range("ReplayMemory: index out of range");
  const double p = std::abs(td_error) + eps_;
  priorities_[index] = p;
  max_priority_ = std::max(max_priority_, p);
  tree_.set(index, std::pow(p, alpha_));
}

double ReplayMemory::priority(std::size_t index) const { return priorities_.at(index); }

double ReplayMemory::probability(std::size_t index) const { return tree_.get(index) / tree_.total(); }

}  // namespace hdsim
