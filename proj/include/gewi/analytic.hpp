#pragma once

#include <cstdint>

// Closed-form cost of one periodic burst. B packets of D bits are sent after
// E EPR frames of L pairs each; every stored pair saves one qubit until the
// burst is fully superdense.
namespace gewi::analytic {

struct AnalyticPoint {
  std::uint64_t B = 1;
  std::uint64_t E = 0;
  std::uint64_t D = 168;
  std::uint64_t L = 0;
  double transmissions = 0.0;
  double C = 1.0;
};

/// Payload qubits needed for one burst: DB - EL while EL < BD/2, else BD/2.
/// Half-integral only when BD is odd.
inline double burst_transmissions(std::uint64_t B, std::uint64_t E, std::uint64_t D,
                                  std::uint64_t L) {
  const std::uint64_t bd = B * D;
  const std::uint64_t el = E * L;
  if (2 * el < bd) return static_cast<double>(bd - el);
  return static_cast<double>(bd) / 2.0;
}

/// Bits per transmission: BD / (DB - EL) while EL < BD/2, else 2.
inline double bits_per_transmission(std::uint64_t B, std::uint64_t E, std::uint64_t D,
                                    std::uint64_t L) {
  const std::uint64_t bd = B * D;
  const std::uint64_t el = E * L;
  if (2 * el < bd) return static_cast<double>(bd) / static_cast<double>(bd - el);
  return 2.0;
}

inline AnalyticPoint evaluate(std::uint64_t B, std::uint64_t E, std::uint64_t D, std::uint64_t L) {
  return {B, E, D, L, burst_transmissions(B, E, D, L), bits_per_transmission(B, E, D, L)};
}

}  // namespace gewi::analytic
