#pragma once

#include <cstddef>
#include <deque>
#include <optional>

#include "gewi/error.hpp"
#include "gewi/qsim.hpp"

namespace gewi {

/// FIFO quantum memory holding the local halves of shared EPR pairs.
/// An empty capacity means unbounded.
class EntBuffer {
 public:
  EntBuffer() = default;
  explicit EntBuffer(std::optional<std::size_t> capacity) : capacity_(capacity) {}

  void push(qsim::QubitRef q) {
    if (full()) throw BufferError("push into a full entanglement buffer");
    queue_.push_back(q);
    ++pushed_;
  }

  qsim::QubitRef pop() {
    if (queue_.empty()) throw BufferError("pop from an empty entanglement buffer");
    const qsim::QubitRef q = queue_.front();
    queue_.pop_front();
    ++popped_;
    return q;
  }

  std::size_t size() const { return queue_.size(); }
  bool empty() const { return queue_.empty(); }
  bool full() const { return capacity_ && queue_.size() >= *capacity_; }
  std::optional<std::size_t> capacity() const { return capacity_; }

  /// Halves that can still be stored; saturates at `cap` when unbounded.
  std::size_t free_space(std::size_t cap) const {
    if (!capacity_) return cap;
    const std::size_t room = *capacity_ > queue_.size() ? *capacity_ - queue_.size() : 0;
    return room < cap ? room : cap;
  }

  // Lifetime counters, used to detect sender/receiver desync.
  std::size_t total_pushed() const { return pushed_; }
  std::size_t total_popped() const { return popped_; }

 private:
  std::deque<qsim::QubitRef> queue_;
  std::optional<std::size_t> capacity_;
  std::size_t pushed_ = 0;
  std::size_t popped_ = 0;
};

}  // namespace gewi
