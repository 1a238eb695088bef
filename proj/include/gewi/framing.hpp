#pragma once

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gewi/ent_buffer.hpp"
#include "gewi/error.hpp"
#include "gewi/qsim.hpp"

// Link-layer frames over qubits. Wire order of every frame is
//
//   [type qubit] [payload qubits ...] [flag qubits ...]
//
// with type |1> for data and |0> for EPR frames. See docs/frame_format.md.
namespace gewi {

using Bytes = std::vector<std::uint8_t>;

enum class FlagMode {
  /// Flag bits are appended to the payload bit stream and encoded by the same
  /// pair-if-available rule, so the receiver finds the flag on its own.
  in_band_uniform,
  /// Flag is always 8 basis-state qubits; the receiver is told the payload
  /// qubit count by the harness.
  oracle_delimited,
};

enum class Stuffing { strict, byte_stuffed };

struct FlagConfig {
  std::uint8_t flag_byte = 0x7E;
  std::uint8_t escape_byte = 0x7D;
  std::uint8_t escape_xor = 0x20;
  FlagMode mode = FlagMode::in_band_uniform;
  Stuffing stuffing = Stuffing::strict;
};

enum class FrameKind { data, epr };

struct Frame {
  FrameKind kind = FrameKind::data;
  qsim::QubitRef header;
  std::vector<qsim::QubitRef> payload;
  std::vector<qsim::QubitRef> flag;
  std::size_t pairs_consumed = 0;  // data frames: buffer pops
  std::size_t pairs_stored = 0;    // EPR frames: buffer pushes

  std::size_t size() const { return 1 + payload.size() + flag.size(); }

  /// Qubits in transmission order.
  std::vector<qsim::QubitRef> wire() const {
    std::vector<qsim::QubitRef> out;
    out.reserve(size());
    out.push_back(header);
    out.insert(out.end(), payload.begin(), payload.end());
    out.insert(out.end(), flag.begin(), flag.end());
    return out;
  }
};

struct FrameResult {
  FrameKind kind = FrameKind::data;
  Bytes payload;                   // data frames, flag and escapes removed
  std::size_t epr_stored = 0;      // EPR frames
  std::size_t pairs_consumed = 0;  // data frames: receiver buffer pops
  std::size_t qubits_read = 0;
};

/// Sequential reader over one received frame.
class QubitReader {
 public:
  explicit QubitReader(std::span<const qsim::QubitRef> qubits) : qubits_(qubits) {}

  qsim::QubitRef next() {
    if (pos_ >= qubits_.size()) {
      throw FramingError("qubit stream ended inside a frame");
    }
    return qubits_[pos_++];
  }

  std::size_t consumed() const { return pos_; }
  std::size_t remaining() const { return qubits_.size() - pos_; }
  bool exhausted() const { return pos_ == qubits_.size(); }

 private:
  std::span<const qsim::QubitRef> qubits_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Byte stuffing

inline Bytes stuff_bytes(std::span<const std::uint8_t> payload, const FlagConfig& cfg) {
  if (cfg.stuffing != Stuffing::byte_stuffed) {
    throw FramingError("stuff_bytes requires byte-stuffed mode");
  }
  Bytes out;
  out.reserve(payload.size());
  for (std::uint8_t b : payload) {
    if (b == cfg.flag_byte || b == cfg.escape_byte) {
      out.push_back(cfg.escape_byte);
      out.push_back(static_cast<std::uint8_t>(b ^ cfg.escape_xor));
    } else {
      out.push_back(b);
    }
  }
  return out;
}

inline Bytes unstuff_bytes(std::span<const std::uint8_t> stuffed, const FlagConfig& cfg) {
  if (cfg.stuffing != Stuffing::byte_stuffed) {
    throw FramingError("unstuff_bytes requires byte-stuffed mode");
  }
  Bytes out;
  out.reserve(stuffed.size());
  for (std::size_t i = 0; i < stuffed.size(); ++i) {
    if (stuffed[i] != cfg.escape_byte) {
      out.push_back(stuffed[i]);
      continue;
    }
    if (i + 1 == stuffed.size()) {
      throw FramingError("dangling escape byte at end of payload");
    }
    out.push_back(static_cast<std::uint8_t>(stuffed[++i] ^ cfg.escape_xor));
  }
  return out;
}

namespace detail {

// MSB first within each byte.
inline std::vector<qsim::Bit> to_bits(std::span<const std::uint8_t> bytes) {
  std::vector<qsim::Bit> bits;
  bits.reserve(bytes.size() * 8);
  for (std::uint8_t b : bytes) {
    for (int k = 7; k >= 0; --k) bits.push_back(static_cast<qsim::Bit>((b >> k) & 1U));
  }
  return bits;
}

inline std::uint8_t to_byte(std::span<const qsim::Bit> bits) {
  std::uint8_t b = 0;
  for (qsim::Bit bit : bits) b = static_cast<std::uint8_t>((b << 1) | (bit & 1U));
  return b;
}

inline qsim::QubitRef basis_qubit(qsim::Engine& engine, qsim::Bit bit) {
  // Prepared as |0> and excited with X, as the sender does.
  const qsim::QubitRef q = engine.new_qubit(0);
  if (bit) engine.apply_x(q);
  return q;
}

inline std::vector<qsim::QubitRef> basis_flag(qsim::Engine& engine, std::uint8_t flag) {
  std::vector<qsim::QubitRef> out;
  out.reserve(8);
  const std::uint8_t one[1] = {flag};
  for (qsim::Bit bit : to_bits(one)) out.push_back(basis_qubit(engine, bit));
  return out;
}

inline void read_basis_flag(qsim::Engine& engine, QubitReader& in, const FlagConfig& cfg) {
  qsim::Bit bits[8];
  for (qsim::Bit& b : bits) b = engine.measure(in.next());
  const std::uint8_t got = to_byte(bits);
  if (got != cfg.flag_byte) {
    throw FramingError("bad trailing flag: expected " + std::to_string(cfg.flag_byte) +
                       ", got " + std::to_string(got));
  }
}

// Reads one qubit's worth of bits under the shared rule: superdense while the
// local buffer holds pairs, one basis bit per qubit otherwise.
inline void read_symbol(qsim::Engine& engine, QubitReader& in, EntBuffer& buffer,
                        std::vector<qsim::Bit>& bits, std::size_t& pairs) {
  const qsim::QubitRef q = in.next();
  if (!buffer.empty()) {
    const qsim::QubitRef local = buffer.pop();
    const qsim::BellOutcome o = qsim::superdense_decode(engine, q, local);
    bits.push_back(o.b1);
    bits.push_back(o.b2);
    ++pairs;
  } else {
    bits.push_back(engine.measure(q));
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Encoding

/// Builds a data frame. Bits go out two at a time: one superdense qubit per
/// pair while the buffer holds EPR halves (popped FIFO), two basis qubits
/// otherwise.
inline Frame encode_data_frame(qsim::Engine& engine, std::span<const std::uint8_t> payload,
                               EntBuffer& buffer, const FlagConfig& cfg) {
  if (payload.empty()) throw FramingError("data frame payload is empty");

  Bytes body;
  if (cfg.stuffing == Stuffing::byte_stuffed) {
    body = stuff_bytes(payload, cfg);
  } else {
    for (std::uint8_t b : payload) {
      if (b == cfg.flag_byte) {
        throw FramingError("payload contains the flag byte (strict mode)");
      }
    }
    body.assign(payload.begin(), payload.end());
  }

  Frame f;
  f.kind = FrameKind::data;
  f.header = engine.new_qubit(1);

  std::vector<qsim::Bit> bits = detail::to_bits(body);
  const std::size_t payload_bits = bits.size();
  if (cfg.mode == FlagMode::in_band_uniform) {
    const std::uint8_t flag[1] = {cfg.flag_byte};
    const std::vector<qsim::Bit> fb = detail::to_bits(flag);
    bits.insert(bits.end(), fb.begin(), fb.end());
  }

  const std::size_t available = buffer.size();
  for (std::size_t i = 0; i < bits.size(); i += 2) {
    auto& dest = i < payload_bits ? f.payload : f.flag;
    if (!buffer.empty()) {
      const qsim::QubitRef half = buffer.pop();
      qsim::superdense_encode(engine, half, bits[i], bits[i + 1]);
      dest.push_back(half);
      ++f.pairs_consumed;
    } else {
      dest.push_back(detail::basis_qubit(engine, bits[i]));
      dest.push_back(detail::basis_qubit(engine, bits[i + 1]));
    }
  }
  assert(f.pairs_consumed == std::min(available, bits.size() / 2));
  (void)available;

  if (cfg.mode == FlagMode::oracle_delimited) {
    f.flag = detail::basis_flag(engine, cfg.flag_byte);
  }
  return f;
}

/// Builds an EPR frame of up to `max_pairs` halves, keeping the other half
/// of each pair in `buffer`.
inline Frame encode_epr_frame(qsim::Engine& engine, EntBuffer& buffer, std::size_t max_pairs,
                              const FlagConfig& cfg) {
  if (buffer.full()) throw BufferError("EPR frame requested with a full buffer");
  Frame f;
  f.kind = FrameKind::epr;
  f.header = engine.new_qubit(0);
  while (!buffer.full() && f.payload.size() < max_pairs) {
    const auto [kept, sent] = engine.make_epr();
    buffer.push(kept);
    f.payload.push_back(sent);
  }
  f.pairs_stored = f.payload.size();
  f.flag = detail::basis_flag(engine, cfg.flag_byte);
  return f;
}

// ---------------------------------------------------------------------------
// Decoding

/// Decodes one frame from `in`. `max_pairs` is the EPR frame length L; the
/// receiver stores min(L, free space) halves, mirroring the sender's clamp.
/// In oracle-delimited mode data frames need `oracle_payload_qubits`.
inline FrameResult decode_frame(qsim::Engine& engine, QubitReader& in, EntBuffer& buffer,
                                std::size_t max_pairs, const FlagConfig& cfg,
                                std::optional<std::size_t> oracle_payload_qubits = std::nullopt) {
  FrameResult r;
  const qsim::Bit type = engine.measure(in.next());

  if (type == 0) {
    r.kind = FrameKind::epr;
    const std::size_t expected = buffer.free_space(max_pairs);
    for (std::size_t i = 0; i < expected; ++i) buffer.push(in.next());
    r.epr_stored = expected;
    detail::read_basis_flag(engine, in, cfg);
    r.qubits_read = in.consumed();
    return r;
  }

  r.kind = FrameKind::data;
  std::vector<qsim::Bit> bits;
  Bytes body;

  if (cfg.mode == FlagMode::in_band_uniform) {
    for (;;) {
      bits.clear();
      while (bits.size() < 8) {
        detail::read_symbol(engine, in, buffer, bits, r.pairs_consumed);
      }
      if (bits.size() != 8) {
        throw FramingError("superdense symbol straddles a byte boundary");
      }
      const std::uint8_t byte = detail::to_byte(bits);
      if (byte == cfg.flag_byte) break;
      body.push_back(byte);
    }
  } else {
    if (!oracle_payload_qubits) {
      throw FramingError("oracle-delimited data frame without a payload length");
    }
    for (std::size_t i = 0; i < *oracle_payload_qubits; ++i) {
      detail::read_symbol(engine, in, buffer, bits, r.pairs_consumed);
    }
    if (bits.size() % 8 != 0) {
      throw FramingError("payload is not a whole number of bytes");
    }
    for (std::size_t i = 0; i < bits.size(); i += 8) {
      body.push_back(detail::to_byte(std::span(bits).subspan(i, 8)));
    }
    detail::read_basis_flag(engine, in, cfg);
  }

  r.payload = cfg.stuffing == Stuffing::byte_stuffed ? unstuff_bytes(body, cfg) : std::move(body);
  r.qubits_read = in.consumed();
  return r;
}

}  // namespace gewi
