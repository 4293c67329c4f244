#pragma once

#include <cstddef>
#include <optional>
#include <random>
#include <vector>

#include "fpd/environment.hpp"

namespace fpd::agents {

struct Transition {
  StateTensor state;
  int action = 0;
  float reward = 0.0f;
  std::optional<StateTensor> next;  // absent at terminal
  bool done = false;
};

// Bounded FIFO; once full, each push evicts the oldest transition.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return items_.empty(); }

  // i = 0 is the oldest stored transition.
  const Transition& at(std::size_t i) const;

  // Uniform indices with replacement.
  std::vector<std::size_t> sample_indices(std::size_t n, std::mt19937_64& rng) const;
  std::vector<const Transition*> sample(std::size_t n, std::mt19937_64& rng) const;

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // slot of the oldest item once the ring is full
  std::vector<Transition> items_;
};

}  // namespace fpd::agents
