#pragma once

#include <cassert>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gewi/error.hpp"

/// Ideal (noiseless) state-vector engine for the handful of operations the
/// link layer needs: preparation, X/Z/H, CNOT, measurement, EPR creation
/// and Bell measurement.
///
/// Qubits live in entanglement groups, each a dense amplitude vector over
/// its members. Groups are merged only by two-qubit gates and shrink on
/// measurement, so a link that only ever creates pairs costs O(1) per qubit.
namespace gewi::qsim {

using Amplitude = std::complex<double>;
using Bit = std::uint8_t;

/// Opaque handle to one simulated qubit.
class QubitRef {
 public:
  constexpr QubitRef() = default;
  constexpr std::uint64_t id() const { return id_; }
  friend constexpr bool operator==(QubitRef, QubitRef) = default;

 private:
  friend class Engine;
  constexpr explicit QubitRef(std::uint64_t id) : id_(id) {}
  std::uint64_t id_ = 0;
};

struct BellOutcome {
  Bit b1 = 0;
  Bit b2 = 0;
  friend constexpr bool operator==(const BellOutcome&, const BellOutcome&) = default;
};

/// Snapshot of a group: members in tensor order (first member is the most
/// significant index bit) and their joint amplitudes.
struct GroupState {
  std::vector<QubitRef> members;
  std::vector<Amplitude> amplitudes;
};

class Engine {
 public:
  /// Probabilities within this distance of 0 or 1 are treated as certain,
  /// which keeps protocol measurements free of RNG draws.
  static constexpr double kCertainty = 1e-12;

  explicit Engine(std::uint64_t seed = 0) : rng_(seed) {}

  QubitRef new_qubit(Bit initial = 0) {
    const QubitRef q{next_qubit_id_++};
    const std::uint64_t gid = next_group_id_++;
    Group g;
    g.members.push_back(q);
    g.amplitudes.assign(2, Amplitude{0.0, 0.0});
    g.amplitudes[initial ? 1 : 0] = 1.0;
    groups_.emplace(gid, std::move(g));
    owner_.emplace(q.id(), gid);
    note_group_size(1);
    return q;
  }

  void apply_x(QubitRef q) {
    apply_single(q, {0.0, 1.0, 1.0, 0.0});
  }

  void apply_z(QubitRef q) {
    apply_single(q, {1.0, 0.0, 0.0, -1.0});
  }

  void apply_h(QubitRef q) {
    const double s = 1.0 / std::sqrt(2.0);
    apply_single(q, {s, s, s, -s});
  }

  void cnot(QubitRef control, QubitRef target) {
    if (control == target) {
      throw InvalidQubit("cnot: control and target are the same qubit");
    }
    const std::uint64_t cg = group_of(control);
    const std::uint64_t tg = group_of(target);
    const std::uint64_t gid = (cg == tg) ? cg : merge(cg, tg);
    Group& g = groups_.at(gid);
    const std::size_t cmask = mask_of(g, control);
    const std::size_t tmask = mask_of(g, target);
    for (std::size_t i = 0; i < g.amplitudes.size(); ++i) {
      if ((i & cmask) && !(i & tmask)) {
        std::swap(g.amplitudes[i], g.amplitudes[i | tmask]);
      }
    }
    check_norm(g);
  }

  /// Computational-basis measurement. Collapses the group and consumes `q`.
  Bit measure(QubitRef q) {
    const std::uint64_t gid = group_of(q);
    Group& g = groups_.at(gid);
    const std::size_t pos = position_of(g, q);
    const std::size_t mask = mask_of(g, q);

    double p1 = 0.0;
    for (std::size_t i = 0; i < g.amplitudes.size(); ++i) {
      if (i & mask) p1 += std::norm(g.amplitudes[i]);
    }
    Bit outcome;
    if (p1 <= kCertainty) {
      outcome = 0;
    } else if (p1 >= 1.0 - kCertainty) {
      outcome = 1;
    } else {
      outcome = uniform_(rng_) < p1 ? 1 : 0;
    }
    const double p = outcome ? p1 : 1.0 - p1;
    const double scale = 1.0 / std::sqrt(p);

    // Drop the measured index bit: keep entries whose bit equals the outcome
    // and squeeze the remaining bits together.
    const std::size_t n = g.members.size();
    std::vector<Amplitude> reduced(std::size_t{1} << (n - 1));
    for (std::size_t i = 0; i < g.amplitudes.size(); ++i) {
      if (((i & mask) != 0) != (outcome != 0)) continue;
      const std::size_t low = i & (mask - 1);
      const std::size_t high = (i >> 1) & ~(mask - 1);
      reduced[high | low] = g.amplitudes[i] * scale;
    }
    g.amplitudes = std::move(reduced);
    g.members.erase(g.members.begin() + static_cast<std::ptrdiff_t>(pos));
    owner_.erase(q.id());
    if (g.members.empty()) {
      groups_.erase(gid);
    } else {
      check_norm(g);
    }
    return outcome;
  }

  /// Two fresh qubits in (|00> + |11>)/sqrt(2): H on the first, then CNOT.
  std::pair<QubitRef, QubitRef> make_epr() {
    const QubitRef a = new_qubit(0);
    const QubitRef b = new_qubit(0);
    apply_h(a);
    cnot(a, b);
    return {a, b};
  }

  /// CNOT(q1 -> q2), H(q1), then measure both. Consumes both qubits.
  BellOutcome bell_measure(QubitRef q1, QubitRef q2) {
    if (q1 == q2) {
      throw InvalidQubit("bell_measure: both arguments are the same qubit");
    }
    cnot(q1, q2);
    apply_h(q1);
    BellOutcome out;
    out.b1 = measure(q1);
    out.b2 = measure(q2);
    return out;
  }

  bool is_valid(QubitRef q) const { return owner_.contains(q.id()); }

  std::size_t live_qubits() const { return owner_.size(); }
  std::size_t group_count() const { return groups_.size(); }

  std::size_t group_size(QubitRef q) const {
    return groups_.at(group_of(q)).members.size();
  }

  /// Largest group ever formed by this engine.
  std::size_t max_group_size() const { return max_group_size_; }

  GroupState state_of(QubitRef q) const {
    const Group& g = groups_.at(group_of(q));
    return {g.members, g.amplitudes};
  }

 private:
  struct Group {
    std::vector<QubitRef> members;
    std::vector<Amplitude> amplitudes;
  };

  // Row-major 2x2 unitary.
  struct Gate {
    Amplitude m00, m01, m10, m11;
  };

  std::uint64_t group_of(QubitRef q) const {
    const auto it = owner_.find(q.id());
    if (it == owner_.end()) {
      throw InvalidQubit("qubit " + std::to_string(q.id()) +
                         " is not live (measured or never created)");
    }
    return it->second;
  }

  static std::size_t position_of(const Group& g, QubitRef q) {
    for (std::size_t i = 0; i < g.members.size(); ++i) {
      if (g.members[i] == q) return i;
    }
    throw InvalidQubit("qubit missing from its own group");
  }

  static std::size_t mask_of(const Group& g, QubitRef q) {
    return std::size_t{1} << (g.members.size() - 1 - position_of(g, q));
  }

  void apply_single(QubitRef q, const Gate& u) {
    Group& g = groups_.at(group_of(q));
    const std::size_t mask = mask_of(g, q);
    for (std::size_t i = 0; i < g.amplitudes.size(); ++i) {
      if (i & mask) continue;
      const Amplitude a0 = g.amplitudes[i];
      const Amplitude a1 = g.amplitudes[i | mask];
      g.amplitudes[i] = u.m00 * a0 + u.m01 * a1;
      g.amplitudes[i | mask] = u.m10 * a0 + u.m11 * a1;
    }
    check_norm(g);
  }

  // Tensor product hi (x) lo; hi's members take the high index bits.
  std::uint64_t merge(std::uint64_t hi_id, std::uint64_t lo_id) {
    Group hi = std::move(groups_.at(hi_id));
    Group lo = std::move(groups_.at(lo_id));
    groups_.erase(hi_id);
    groups_.erase(lo_id);

    Group merged;
    merged.members = std::move(hi.members);
    merged.members.insert(merged.members.end(), lo.members.begin(), lo.members.end());
    merged.amplitudes.resize(hi.amplitudes.size() * lo.amplitudes.size());
    for (std::size_t i = 0; i < hi.amplitudes.size(); ++i) {
      for (std::size_t j = 0; j < lo.amplitudes.size(); ++j) {
        merged.amplitudes[i * lo.amplitudes.size() + j] = hi.amplitudes[i] * lo.amplitudes[j];
      }
    }
    const std::uint64_t gid = next_group_id_++;
    for (QubitRef m : merged.members) owner_[m.id()] = gid;
    note_group_size(merged.members.size());
    groups_.emplace(gid, std::move(merged));
    return gid;
  }

  void note_group_size(std::size_t n) {
    if (n > max_group_size_) max_group_size_ = n;
  }

  static void check_norm([[maybe_unused]] const Group& g) {
#ifndef NDEBUG
    double total = 0.0;
    for (const Amplitude& a : g.amplitudes) total += std::norm(a);
    assert(std::abs(total - 1.0) < 1e-9 && "amplitude vector lost normalization");
#endif
  }

  std::mt19937_64 rng_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  std::unordered_map<std::uint64_t, Group> groups_;
  std::unordered_map<std::uint64_t, std::uint64_t> owner_;  // qubit id -> group id
  std::uint64_t next_qubit_id_ = 1;
  std::uint64_t next_group_id_ = 1;
  std::size_t max_group_size_ = 0;
};

/// Superdense encoding on the sender-held half of a Phi+ pair:
/// (0,0) -> I, (0,1) -> X, (1,0) -> Z, (1,1) -> X then Z.
inline void superdense_encode(Engine& engine, QubitRef half, Bit b1, Bit b2) {
  if (b2) engine.apply_x(half);
  if (b1) engine.apply_z(half);
}

/// Inverse of superdense_encode: Bell measurement of (sent half, local half).
inline BellOutcome superdense_decode(Engine& engine, QubitRef sent, QubitRef local) {
  return engine.bell_measure(sent, local);
}

}  // namespace gewi::qsim
