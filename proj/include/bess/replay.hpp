#pragma once

#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "bess/battery.hpp"
#include "bess/rng.hpp"

namespace bess {

// (s_t, a_t, r_t, s_{t+1})
struct Transition {
  EnvState state;
  Action action = Action::Idle;
  double reward = 0.0;
  EnvState next_state;
};

// Fixed-capacity ring; once full, insertion evicts the oldest entry.
class ReplayMemory {
 public:
  explicit ReplayMemory(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ < 1)
      throw std::invalid_argument("replay memory: capacity must be >= 1");
    buf_.reserve(capacity_);
  }

  void push(const Transition& t) {
    if (buf_.size() < capacity_) {
      buf_.push_back(t);
    } else {
      buf_[head_] = t;
      head_ = (head_ + 1) % capacity_;
    }
  }

  std::size_t size() const { return buf_.size(); }
  std::size_t capacity() const { return capacity_; }

  // Logical index 0 is the oldest stored transition.
  const Transition& at(std::size_t i) const {
    if (i >= buf_.size())
      throw std::out_of_range("replay memory: index out of range");
    return buf_[(head_ + i) % buf_.size()];
  }

  // Uniform sample of k distinct transitions (partial Fisher-Yates over the
  // index set); deterministic given the rng state.
  std::vector<const Transition*> sample(std::size_t k, Rng& rng) const {
    if (k > buf_.size())
      throw std::invalid_argument("replay memory: sample larger than size");
    std::vector<std::size_t> idx(buf_.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<const Transition*> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + rng.uniform_int(idx.size() - i);
      std::swap(idx[i], idx[j]);
      out.push_back(&buf_[idx[i]]);
    }
    return out;
  }

 private:
  std::size_t capacity_;
  std::vector<Transition> buf_;
  std::size_t head_ = 0;  // oldest entry once full
};

}  // namespace bess
