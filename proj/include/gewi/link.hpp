#pragma once

#include <cassert>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gewi/channel.hpp"
#include "gewi/ent_buffer.hpp"
#include "gewi/error.hpp"
#include "gewi/framing.hpp"
#include "gewi/qsim.hpp"

namespace gewi {

/// Event counters of one link. Transmission counters are in qubits.
struct LinkStats {
  std::uint64_t header_qubits = 0;
  std::uint64_t data_payload_qubits = 0;
  std::uint64_t flag_qubits = 0;
  std::uint64_t epr_payload_qubits = 0;
  std::uint64_t epr_pairs_generated = 0;
  std::uint64_t epr_pairs_consumed = 0;
  std::uint64_t data_bits_delivered = 0;
  std::uint64_t data_frames = 0;
  std::uint64_t epr_frames = 0;

  std::uint64_t total_transmissions() const {
    return header_qubits + data_payload_qubits + flag_qubits + epr_payload_qubits;
  }

  LinkStats& operator+=(const LinkStats& o) {
    header_qubits += o.header_qubits;
    data_payload_qubits += o.data_payload_qubits;
    flag_qubits += o.flag_qubits;
    epr_payload_qubits += o.epr_payload_qubits;
    epr_pairs_generated += o.epr_pairs_generated;
    epr_pairs_consumed += o.epr_pairs_consumed;
    data_bits_delivered += o.data_bits_delivered;
    data_frames += o.data_frames;
    epr_frames += o.epr_frames;
    return *this;
  }

  /// Counter-wise difference; `o` must be an earlier snapshot of the same link.
  friend LinkStats operator-(LinkStats a, const LinkStats& o) {
    a.header_qubits -= o.header_qubits;
    a.data_payload_qubits -= o.data_payload_qubits;
    a.flag_qubits -= o.flag_qubits;
    a.epr_payload_qubits -= o.epr_payload_qubits;
    a.epr_pairs_generated -= o.epr_pairs_generated;
    a.epr_pairs_consumed -= o.epr_pairs_consumed;
    a.data_bits_delivered -= o.data_bits_delivered;
    a.data_frames -= o.data_frames;
    a.epr_frames -= o.epr_frames;
    return a;
  }

  friend bool operator==(const LinkStats&, const LinkStats&) = default;
};

/// Delivered data bits per data-frame payload qubit. Header and flag qubits
/// and EPR frames are not in the denominator.
inline double avg_bits_per_data_qubit(const LinkStats& s) {
  if (s.data_payload_qubits == 0) {
    throw MetricError("avg bits per data qubit is undefined with no data payload qubits");
  }
  return static_cast<double>(s.data_bits_delivered) / static_cast<double>(s.data_payload_qubits);
}

struct LinkConfig {
  FlagConfig flags;
  std::size_t epr_frame_len = 8;  // L, pairs per EPR frame
  std::optional<std::size_t> capacity;
};

enum class SenderAction { sent_data, sent_epr, idle };

/// One point-to-point link: both endpoints, the channel between them and the
/// engine holding every qubit. Advanced by alternating sender_step() with
/// receiver_step() until the channel drains.
class Link {
 public:
  explicit Link(LinkConfig cfg, std::uint64_t seed = 0)
      : cfg_(cfg), engine_(seed), sender_{{}, EntBuffer(cfg.capacity)},
        receiver_{EntBuffer(cfg.capacity), {}} {}

  void enqueue(Bytes packet) { sender_.tx_queue.push_back(std::move(packet)); }

  /// One iteration of the sender loop: data first, else an EPR frame if the
  /// buffer has room and the driver granted an idle opportunity.
  /// `idle_budget` is decremented for every EPR frame sent.
  SenderAction sender_step(std::size_t& idle_budget) {
    if (!sender_.tx_queue.empty()) {
      Bytes pkt = std::move(sender_.tx_queue.front());
      sender_.tx_queue.pop_front();
      const Frame f = encode_data_frame(engine_, pkt, sender_.buffer, cfg_.flags);
      stats_.header_qubits += 1;
      stats_.data_payload_qubits += f.payload.size();
      stats_.flag_qubits += f.flag.size();
      stats_.epr_pairs_consumed += f.pairs_consumed;
      stats_.data_frames += 1;
      channel_.send(f);
      return SenderAction::sent_data;
    }
    if (!sender_.buffer.full() && idle_budget > 0) {
      --idle_budget;
      const Frame f = encode_epr_frame(engine_, sender_.buffer, cfg_.epr_frame_len, cfg_.flags);
      stats_.header_qubits += 1;
      stats_.epr_payload_qubits += f.payload.size();
      stats_.flag_qubits += f.flag.size();
      stats_.epr_pairs_generated += f.pairs_stored;
      stats_.epr_frames += 1;
      channel_.send(f);
      return SenderAction::sent_epr;
    }
    return SenderAction::idle;
  }

  /// Decodes the next frame on the channel, if any. Data payloads are
  /// appended to delivered().
  std::optional<FrameResult> receiver_step() {
    if (!channel_.has_frame()) return std::nullopt;
    const InFlightFrame in = channel_.receive();
    QubitReader reader(in.qubits);
    FrameResult r = decode_frame(engine_, reader, receiver_.buffer, cfg_.epr_frame_len,
                                 cfg_.flags, in.payload_qubits);
    if (!reader.exhausted()) {
      throw FramingError("frame has " + std::to_string(reader.remaining()) +
                         " trailing qubits after its flag");
    }
    const std::size_t receiver_pairs =
        r.kind == FrameKind::data ? r.pairs_consumed : r.epr_stored;
    if (receiver_pairs != in.sender_pairs) {
      throw FramingError("entanglement buffer desync: sender used " +
                         std::to_string(in.sender_pairs) + " pairs, receiver " +
                         std::to_string(receiver_pairs));
    }
    if (r.kind == FrameKind::data) {
      stats_.data_bits_delivered += 8 * r.payload.size();
      receiver_.delivered.push_back(r.payload);
    }
    assert(engine_.max_group_size() <= 2);
    return r;
  }

  /// Runs receiver_step() until the channel is empty; returns frames decoded.
  std::size_t drain() {
    std::size_t n = 0;
    while (receiver_step()) ++n;
    return n;
  }

  std::vector<Bytes> take_delivered() { return std::exchange(receiver_.delivered, {}); }

  const LinkStats& stats() const { return stats_; }
  const LinkConfig& config() const { return cfg_; }
  const qsim::Engine& engine() const { return engine_; }
  const QuantumChannel& channel() const { return channel_; }
  const EntBuffer& sender_buffer() const { return sender_.buffer; }
  const EntBuffer& receiver_buffer() const { return receiver_.buffer; }
  std::size_t pending_packets() const { return sender_.tx_queue.size(); }

  /// Holds at frame boundaries (channel drained).
  bool buffers_symmetric() const {
    return sender_.buffer.size() == receiver_.buffer.size();
  }

 private:
  struct SenderState {
    std::deque<Bytes> tx_queue;
    EntBuffer buffer;
  };
  struct ReceiverState {
    EntBuffer buffer;
    std::vector<Bytes> delivered;
  };

  LinkConfig cfg_;
  qsim::Engine engine_;
  QuantumChannel channel_;
  SenderState sender_;
  ReceiverState receiver_;
  LinkStats stats_;
};

}  // namespace gewi
