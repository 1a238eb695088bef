#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "gewi/analytic.hpp"
#include "gewi/error.hpp"
#include "gewi/framing.hpp"
#include "gewi/link.hpp"

// Periodic bursty workload: each cycle is an idle phase of E EPR-frame
// opportunities followed by a burst of B packets of D bits.
namespace gewi {

struct ExperimentConfig {
  std::uint64_t B = 1;   // packets per burst
  std::uint64_t E = 10;  // EPR frames per idle period
  std::uint64_t D = 168; // bits per packet
  std::uint64_t L = 8;   // pairs per EPR frame
  std::uint64_t cycles = 4;
  std::uint64_t warmup_cycles = 1;
  FlagMode mode = FlagMode::in_band_uniform;
  Stuffing stuffing = Stuffing::strict;
  std::optional<std::size_t> capacity;
  std::uint64_t seed = 1;

  void validate() const {
    if (B < 1) throw ConfigError("burst packets (B) must be at least 1");
    if (D < 8 || D % 8 != 0) {
      throw ConfigError("packet bits (D) must be a positive multiple of 8, got " +
                        std::to_string(D));
    }
    if (cycles < 1) throw ConfigError("cycles must be at least 1");
    if (warmup_cycles >= cycles) {
      throw ConfigError("warmup cycles must be fewer than cycles");
    }
  }

  FlagConfig flag_config() const {
    FlagConfig f;
    f.mode = mode;
    f.stuffing = stuffing;
    return f;
  }

  LinkConfig link_config() const {
    return {flag_config(), static_cast<std::size_t>(L), capacity};
  }
};

struct ExperimentResult {
  std::vector<LinkStats> cycle_stats;  // per-cycle deltas, warmup included
  LinkStats aggregate;                 // sum over post-warmup cycles
  double measured_C = 0.0;
  double analytic_C = 0.0;
  std::size_t final_buffer_occupancy = 0;
  std::size_t symmetry_checks = 0;
};

using TrafficRng = std::mt19937_64;

/// B packets of D/8 uniformly random bytes. In strict mode the flag byte is
/// never drawn.
inline std::vector<Bytes> generate_burst(std::uint64_t B, std::uint64_t D, TrafficRng& rng,
                                         const FlagConfig& flags = {}) {
  if (D % 8 != 0) {
    throw ConfigError("packet bits must be byte aligned, got " + std::to_string(D));
  }
  const bool strict = flags.stuffing == Stuffing::strict;
  std::uniform_int_distribution<int> draw(0, strict ? 254 : 255);
  std::vector<Bytes> burst(B);
  for (Bytes& pkt : burst) {
    pkt.resize(D / 8);
    for (std::uint8_t& b : pkt) {
      int v = draw(rng);
      if (strict && v >= flags.flag_byte) ++v;
      b = static_cast<std::uint8_t>(v);
    }
  }
  return burst;
}

inline std::uint64_t engine_seed(std::uint64_t seed) { return seed ^ 0x9E3779B97F4A7C15ULL; }

/// Runs the idle/burst cycle on a fresh link and checks delivery, buffer
/// symmetry and pair conservation along the way.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  Link link(cfg.link_config(), engine_seed(cfg.seed));
  TrafficRng rng(cfg.seed);
  const FlagConfig flags = cfg.flag_config();

  ExperimentResult res;
  LinkStats prev;

  auto check_boundary = [&] {
    if (!link.buffers_symmetric()) {
      throw DeliveryError("entanglement buffers diverged: sender " +
                          std::to_string(link.sender_buffer().size()) + ", receiver " +
                          std::to_string(link.receiver_buffer().size()));
    }
    ++res.symmetry_checks;
  };

  for (std::uint64_t c = 0; c < cfg.cycles; ++c) {
    std::size_t budget = static_cast<std::size_t>(cfg.E);
    while (link.sender_step(budget) == SenderAction::sent_epr) {
      link.drain();
      check_boundary();
    }

    const std::vector<Bytes> burst = generate_burst(cfg.B, cfg.D, rng, flags);
    for (const Bytes& p : burst) link.enqueue(p);
    std::size_t no_budget = 0;
    while (link.sender_step(no_budget) == SenderAction::sent_data) {
      link.drain();
      check_boundary();
    }
    if (link.take_delivered() != burst) {
      throw DeliveryError("cycle " + std::to_string(c) + ": delivered packets differ from the burst");
    }

    const LinkStats now = link.stats();
    const LinkStats delta = now - prev;
    prev = now;
    res.cycle_stats.push_back(delta);
    if (c >= cfg.warmup_cycles) res.aggregate += delta;
  }

  const LinkStats& total = link.stats();
  if (total.epr_pairs_generated - total.epr_pairs_consumed != link.sender_buffer().size()) {
    throw DeliveryError("EPR pair conservation violated");
  }
  if (link.engine().max_group_size() > 2) {
    throw DeliveryError("entanglement group grew beyond a pair");
  }
  res.final_buffer_occupancy = link.sender_buffer().size();
  res.measured_C = avg_bits_per_data_qubit(res.aggregate);
  res.analytic_C = analytic::bits_per_transmission(cfg.B, cfg.E, cfg.D, cfg.L);
  return res;
}

// ---------------------------------------------------------------------------
// Arithmetic replay of the greedy pair schedule, used to cross-check
// run_experiment without frames or a quantum engine.

struct TraceCounters {
  std::uint64_t header_qubits = 0;
  std::uint64_t data_payload_qubits = 0;
  std::uint64_t flag_qubits = 0;
  std::uint64_t epr_payload_qubits = 0;
  std::uint64_t pairs_generated = 0;
  std::uint64_t pairs_consumed = 0;
  std::uint64_t data_bits = 0;

  TraceCounters& operator+=(const TraceCounters& o) {
    header_qubits += o.header_qubits;
    data_payload_qubits += o.data_payload_qubits;
    flag_qubits += o.flag_qubits;
    epr_payload_qubits += o.epr_payload_qubits;
    pairs_generated += o.pairs_generated;
    pairs_consumed += o.pairs_consumed;
    data_bits += o.data_bits;
    return *this;
  }

  friend bool operator==(const TraceCounters&, const TraceCounters&) = default;
};

struct TracePrediction {
  std::vector<TraceCounters> cycles;
  TraceCounters aggregate;  // post-warmup
  double metric = 0.0;
};

inline TracePrediction trace_oracle(const ExperimentConfig& cfg) {
  cfg.validate();
  const FlagConfig flags = cfg.flag_config();
  const bool stuffed = cfg.stuffing == Stuffing::byte_stuffed;
  const bool in_band = cfg.mode == FlagMode::in_band_uniform;
  TrafficRng rng(cfg.seed);  // only consulted for stuffed payload lengths

  TracePrediction out;
  std::uint64_t stored = 0;
  for (std::uint64_t c = 0; c < cfg.cycles; ++c) {
    TraceCounters t;
    for (std::uint64_t e = 0; e < cfg.E; ++e) {
      if (cfg.capacity && stored >= *cfg.capacity) break;
      std::uint64_t n = cfg.L;
      if (cfg.capacity) n = std::min<std::uint64_t>(n, *cfg.capacity - stored);
      stored += n;
      t.pairs_generated += n;
      t.header_qubits += 1;
      t.epr_payload_qubits += n;
      t.flag_qubits += 8;
    }

    std::vector<std::uint64_t> lengths(cfg.B, cfg.D / 8);
    if (stuffed) {
      const std::vector<Bytes> burst = generate_burst(cfg.B, cfg.D, rng, flags);
      for (std::size_t i = 0; i < burst.size(); ++i) {
        for (std::uint8_t b : burst[i]) {
          if (b == flags.flag_byte || b == flags.escape_byte) ++lengths[i];
        }
      }
    }

    for (std::uint64_t bytes : lengths) {
      const std::uint64_t payload_bits = 8 * bytes;
      t.header_qubits += 1;
      t.data_bits += cfg.D;
      if (in_band) {
        const std::uint64_t k = std::min(stored, (payload_bits + 8) / 2);
        const std::uint64_t on_payload = std::min(k, payload_bits / 2);
        const std::uint64_t on_flag = k - on_payload;
        t.data_payload_qubits += on_payload + (payload_bits - 2 * on_payload);
        t.flag_qubits += on_flag + (8 - 2 * on_flag);
        t.pairs_consumed += k;
        stored -= k;
      } else {
        const std::uint64_t k = std::min(stored, payload_bits / 2);
        t.data_payload_qubits += k + (payload_bits - 2 * k);
        t.flag_qubits += 8;
        t.pairs_consumed += k;
        stored -= k;
      }
    }

    out.cycles.push_back(t);
    if (c >= cfg.warmup_cycles) out.aggregate += t;
  }
  out.metric = static_cast<double>(out.aggregate.data_bits) /
               static_cast<double>(out.aggregate.data_payload_qubits);
  return out;
}

}  // namespace gewi
