#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <utility>
#include <vector>

#include "gewi/error.hpp"
#include "gewi/framing.hpp"
#include "gewi/qsim.hpp"

namespace gewi {

/// One frame in flight. The side fields are harness knowledge that a real
/// channel would not carry: the payload qubit count (used only by
/// oracle-delimited receivers) and the sender's pair count (desync check).
struct InFlightFrame {
  std::vector<qsim::QubitRef> qubits;
  std::size_t payload_qubits = 0;
  std::size_t sender_pairs = 0;
};

/// Error-free, order-preserving quantum channel with frame-granular handoff.
class QuantumChannel {
 public:
  void send(const Frame& frame) {
    InFlightFrame f;
    f.qubits = frame.wire();
    f.payload_qubits = frame.payload.size();
    f.sender_pairs = frame.kind == FrameKind::data ? frame.pairs_consumed : frame.pairs_stored;
    sent_ += f.qubits.size();
    in_flight_.push_back(std::move(f));
  }

  bool has_frame() const { return !in_flight_.empty(); }
  std::size_t frames_in_flight() const { return in_flight_.size(); }

  InFlightFrame receive() {
    if (in_flight_.empty()) throw FramingError("receive on an empty channel");
    InFlightFrame f = std::move(in_flight_.front());
    in_flight_.pop_front();
    delivered_ += f.qubits.size();
    return f;
  }

  std::size_t qubits_sent() const { return sent_; }
  std::size_t qubits_delivered() const { return delivered_; }

 private:
  std::deque<InFlightFrame> in_flight_;
  std::size_t sent_ = 0;
  std::size_t delivered_ = 0;
};

}  // namespace gewi
