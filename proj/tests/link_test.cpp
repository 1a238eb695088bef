#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "gewi/link.hpp"

using namespace gewi;

namespace {

LinkConfig make_cfg(FlagMode mode, std::size_t L, std::optional<std::size_t> cap = std::nullopt) {
  LinkConfig c;
  c.flags.mode = mode;
  c.epr_frame_len = L;
  c.capacity = cap;
  return c;
}

Bytes packet(std::size_t n, std::uint8_t seed = 1) {
  Bytes p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = static_cast<std::uint8_t>((seed + 3 * i) % 0x7E);
  return p;
}

}  // namespace

TEST(SenderStep, DataTakesPriority) {
  Link link(make_cfg(FlagMode::in_band_uniform, 8));
  link.enqueue(packet(21));
  std::size_t budget = 5;
  EXPECT_EQ(link.sender_step(budget), SenderAction::sent_data);
  EXPECT_EQ(budget, 5u);
  EXPECT_EQ(link.stats().data_frames, 1u);
  EXPECT_EQ(link.stats().epr_frames, 0u);
}

TEST(SenderStep, IdleBudgetBuysEprFrames) {
  Link link(make_cfg(FlagMode::in_band_uniform, 8));
  std::size_t budget = 2;
  EXPECT_EQ(link.sender_step(budget), SenderAction::sent_epr);
  EXPECT_EQ(link.sender_step(budget), SenderAction::sent_epr);
  EXPECT_EQ(budget, 0u);
  EXPECT_EQ(link.sender_step(budget), SenderAction::idle);
  EXPECT_EQ(link.stats().epr_frames, 2u);
  EXPECT_EQ(link.stats().epr_pairs_generated, 16u);
}

TEST(SenderStep, FullBufferIsIdle) {
  Link link(make_cfg(FlagMode::in_band_uniform, 8, 8));
  std::size_t budget = 10;
  EXPECT_EQ(link.sender_step(budget), SenderAction::sent_epr);
  EXPECT_EQ(link.sender_step(budget), SenderAction::idle);
  EXPECT_EQ(budget, 9u);

  Link zero(make_cfg(FlagMode::in_band_uniform, 8, 0));
  EXPECT_EQ(zero.sender_step(budget), SenderAction::idle);
}

TEST(ReceiverStep, DeliversDataFrame) {
  Link link(make_cfg(FlagMode::oracle_delimited, 8));
  const Bytes p = packet(21);
  link.enqueue(p);
  std::size_t budget = 0;
  link.sender_step(budget);
  const auto r = link.receiver_step();
  ASSERT_TRUE(r.has_value());
  EXPECT_EQ(r->kind, FrameKind::data);
  EXPECT_EQ(r->payload, p);
  EXPECT_EQ(link.stats().data_bits_delivered, 168u);
  EXPECT_EQ(link.take_delivered(), std::vector<Bytes>{p});
}

TEST(ReceiverStep, StoresEprFrame) {
  Link link(make_cfg(FlagMode::in_band_uniform, 8));
  std::size_t budget = 1;
  link.sender_step(budget);
  const auto r = link.receiver_step();
  ASSERT_TRUE(r.has_value());
  EXPECT_EQ(r->kind, FrameKind::epr);
  EXPECT_EQ(r->epr_stored, 8u);
  EXPECT_EQ(link.receiver_buffer().size(), 8u);
  EXPECT_TRUE(link.buffers_symmetric());
}

TEST(ReceiverStep, EmptyChannelYieldsNothing) {
  Link link(make_cfg(FlagMode::in_band_uniform, 8));
  EXPECT_FALSE(link.receiver_step().has_value());
}

TEST(AvgBitsPerDataQubit, ClassicalRunIsOne) {
  Link link(make_cfg(FlagMode::oracle_delimited, 8));
  for (int i = 0; i < 3; ++i) link.enqueue(packet(21, i));
  std::size_t budget = 0;
  while (link.sender_step(budget) != SenderAction::idle) link.drain();
  EXPECT_EQ(avg_bits_per_data_qubit(link.stats()), 1.0);
}

TEST(AvgBitsPerDataQubit, FullySuperdenseRunIsTwo) {
  Link link(make_cfg(FlagMode::oracle_delimited, 100));
  std::size_t budget = 2;
  while (link.sender_step(budget) != SenderAction::idle) link.drain();
  for (int i = 0; i < 2; ++i) link.enqueue(packet(21, i));  // 2 * 84 pairs <= 200
  while (link.sender_step(budget) != SenderAction::idle) link.drain();
  EXPECT_EQ(avg_bits_per_data_qubit(link.stats()), 2.0);
}

TEST(AvgBitsPerDataQubit, TenPacketBurstAfterTenShortEprFrames) {
  // 80 pairs against 1680 bits: 1680 / (1680 - 80) = 1.05.
  Link link(make_cfg(FlagMode::oracle_delimited, 8));
  std::size_t budget = 10;
  while (link.sender_step(budget) != SenderAction::idle) link.drain();
  for (int i = 0; i < 10; ++i) link.enqueue(packet(21, i));
  while (link.sender_step(budget) != SenderAction::idle) link.drain();
  EXPECT_EQ(link.stats().data_payload_qubits, 1600u);
  EXPECT_NEAR(avg_bits_per_data_qubit(link.stats()), 1.05, 1e-12);
}

TEST(AvgBitsPerDataQubit, UndefinedWithoutData) {
  EXPECT_THROW(avg_bits_per_data_qubit(LinkStats{}), MetricError);
}

TEST(LinkStats, DifferenceAndSum) {
  LinkStats a;
  a.header_qubits = 3;
  a.data_payload_qubits = 10;
  a.flag_qubits = 24;
  a.epr_payload_qubits = 5;
  LinkStats b = a;
  b += a;
  EXPECT_EQ(b.total_transmissions(), 84u);
  EXPECT_EQ(b - a, a);
}

TEST(LinkProperties, RandomStepSequences) {
  std::mt19937 rng(99);
  for (int trial = 0; trial < 60; ++trial) {
    const FlagMode mode = trial % 2 ? FlagMode::oracle_delimited : FlagMode::in_band_uniform;
    const std::size_t L = rng() % 40;
    const std::optional<std::size_t> cap =
        trial % 3 == 0 ? std::optional<std::size_t>(rng() % 120) : std::nullopt;
    Link link(make_cfg(mode, L, cap), trial);
    std::vector<Bytes> sent;

    for (int step = 0; step < 40; ++step) {
      if (rng() % 3 == 0) {
        const Bytes p = packet(1 + rng() % 30, static_cast<std::uint8_t>(rng()));
        sent.push_back(p);
        link.enqueue(p);
      }
      const LinkStats before = link.stats();
      const std::size_t pending = link.pending_packets();
      std::size_t budget = rng() % 2;
      const SenderAction a = link.sender_step(budget);
      const LinkStats d = link.stats() - before;

      // Exactly one kind of frame per step.
      EXPECT_LE(d.data_frames + d.epr_frames, 1u);
      if (a == SenderAction::sent_data) {
        EXPECT_EQ(d.data_frames, 1u);
        EXPECT_EQ(link.pending_packets(), pending - 1);
        EXPECT_EQ(d.epr_pairs_generated, 0u);
      } else if (a == SenderAction::sent_epr) {
        EXPECT_EQ(d.epr_frames, 1u);
        EXPECT_EQ(d.epr_pairs_consumed, 0u);
        EXPECT_EQ(pending, 0u);
      } else {
        EXPECT_EQ(d, LinkStats{});
      }
      EXPECT_EQ(d.header_qubits, d.data_frames + d.epr_frames);

      link.drain();
      ASSERT_TRUE(link.buffers_symmetric());
      const LinkStats& s = link.stats();
      EXPECT_LE(s.epr_pairs_consumed, s.epr_pairs_generated);
      EXPECT_EQ(s.epr_pairs_generated - s.epr_pairs_consumed, link.sender_buffer().size());
      EXPECT_EQ(link.channel().qubits_sent(), link.channel().qubits_delivered());
      EXPECT_EQ(link.channel().qubits_delivered(), s.total_transmissions());
    }
    std::size_t budget = 0;
    while (link.sender_step(budget) != SenderAction::idle) link.drain();
    EXPECT_EQ(link.take_delivered(), sent);
    EXPECT_LE(link.engine().max_group_size(), 2u);
  }
}
