#include "doctest.h"

#include <cmath>
#include <map>
#include <vector>

#include "oran/radio_env.hpp"

using namespace oran;

namespace {

// Single-slice, single-BS config for scripted scenarios.
NetworkConfig tiny_config() {
  NetworkConfig cfg;
  cfg.num_bs = 1;
  cfg.slices_per_bs = {SliceConfig{SliceType::kEmbb, 2, 0.5, 32, 0.0,
                                   TrafficModel::kConstantBitRate, 0.1}};
  cfg.rb_groups = 10;
  return cfg;
}

Packet make_packet(int bs, int slice, int device, int size_bits,
                   std::int64_t arrival, std::uint64_t id) {
  Packet p;
  p.id = id;
  p.bs = bs;
  p.slice = slice;
  p.device = device;
  p.size_bits = size_bits;
  p.remaining_bits = size_bits;
  p.arrival_tti = arrival;
  return p;
}

RbAllocation all_rbs_to(const NetworkConfig& cfg, int bs, int ue) {
  RbAllocation alloc(cfg.num_bs, cfg.num_rbs);
  for (int rb = 0; rb < cfg.num_rbs; ++rb) alloc.set(bs, rb, ue);
  return alloc;
}

std::vector<Rng> traffic_streams(const NetworkConfig& cfg, std::uint64_t seed) {
  std::vector<Rng> rngs;
  for (int bs = 0; bs < cfg.num_bs; ++bs)
    rngs.push_back(make_stream(seed, StreamId::kTraffic, bs));
  return rngs;
}

}  // namespace

TEST_CASE("sinr matches the closed form without interferers") {
  NetworkConfig cfg = tiny_config();
  ChannelModel chan = ChannelModel::flat(1, cfg.total_ues(), 1e-10);
  RbAllocation alloc(1, cfg.num_rbs);
  alloc.set(0, 5, 0);
  // Per-RB power 1e-2 W; oracle evaluated independently from the formula.
  const std::vector<double> power = {1e-2 * cfg.num_rbs};
  const double noise = 180000.0 * std::pow(10.0, -20.4);
  const double expected = 1e-10 * 1e-2 / noise;
  CHECK(compute_sinr(alloc, power, chan, cfg, 0, 5, 0) ==
        doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("symmetric interferer drives sinr to one") {
  NetworkConfig cfg;
  cfg.num_bs = 2;
  ChannelModel chan = ChannelModel::flat(2, cfg.total_ues(), 1e-3);
  RbAllocation alloc(2, cfg.num_rbs);
  alloc.set(0, 0, 0);
  alloc.set(1, 0, cfg.global_ue(1, 0));
  const std::vector<double> power = {1.0, 1.0};
  CHECK(compute_sinr(alloc, power, chan, cfg, 0, 0, 0) ==
        doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("zero power means zero sinr") {
  NetworkConfig cfg = tiny_config();
  ChannelModel chan = ChannelModel::flat(1, cfg.total_ues(), 1e-8);
  RbAllocation alloc(1, cfg.num_rbs);
  alloc.set(0, 0, 0);
  CHECK(compute_sinr(alloc, {0.0}, chan, cfg, 0, 0, 0) == 0.0);
}

TEST_CASE("sinr on an unassigned rb is rejected") {
  NetworkConfig cfg = tiny_config();
  ChannelModel chan = ChannelModel::flat(1, cfg.total_ues(), 1e-8);
  RbAllocation alloc(1, cfg.num_rbs);
  CHECK_THROWS(compute_sinr(alloc, {1.0}, chan, cfg, 0, 0, 0));
}

TEST_CASE("sinr is monotone in serving power and interference") {
  NetworkConfig cfg;
  cfg.num_bs = 2;
  ChannelModel chan = ChannelModel::flat(2, cfg.total_ues(), 1e-9);
  RbAllocation alone(2, cfg.num_rbs);
  alone.set(0, 3, 0);
  const double low = compute_sinr(alone, {0.4, 1.0}, chan, cfg, 0, 3, 0);
  const double high = compute_sinr(alone, {0.9, 1.0}, chan, cfg, 0, 3, 0);
  CHECK(high > low);

  RbAllocation shared = alone;
  shared.set(1, 3, cfg.global_ue(1, 0));
  CHECK(compute_sinr(shared, {0.4, 1.0}, chan, cfg, 0, 3, 0) < low);
}

TEST_CASE("capacity of one rb at unit sinr is the rb bandwidth") {
  NetworkConfig cfg = tiny_config();
  const double gain = 1e-9;
  const double power = cfg.noise_w_per_rb() * cfg.num_rbs / gain;  // sinr = 1
  ChannelModel chan = ChannelModel::flat(1, cfg.total_ues(), gain);
  RbAllocation alloc(1, cfg.num_rbs);
  alloc.set(0, 0, 0);
  CHECK(link_capacity(0, 0, alloc, {power}, chan, cfg) ==
        doctest::Approx(180000.0).epsilon(1e-9));
}

TEST_CASE("capacity with no rbs is zero") {
  NetworkConfig cfg = tiny_config();
  ChannelModel chan = ChannelModel::flat(1, cfg.total_ues(), 1e-9);
  RbAllocation alloc(1, cfg.num_rbs);
  CHECK(link_capacity(0, 0, alloc, {1.0}, chan, cfg) == 0.0);
}

TEST_CASE("two rbs at sinr three give twice the double rate") {
  NetworkConfig cfg = tiny_config();
  const double gain = 1e-9;
  const double power = 3.0 * cfg.noise_w_per_rb() * cfg.num_rbs / gain;
  ChannelModel chan = ChannelModel::flat(1, cfg.total_ues(), gain);
  RbAllocation alloc(1, cfg.num_rbs);
  alloc.set(0, 0, 0);
  alloc.set(0, 1, 0);
  // log2(1 + 3) = 2 exactly.
  CHECK(link_capacity(0, 0, alloc, {power}, chan, cfg) ==
        doctest::Approx(720000.0).epsilon(1e-9));
}

TEST_CASE("capacity is additive over rbs") {
  NetworkConfig cfg;
  cfg.num_bs = 2;
  Rng topo = make_stream(3, StreamId::kTopology);
  const ChannelModel chan = build_topology(cfg, topo);
  RbAllocation alloc(2, cfg.num_rbs);
  Rng rng(17);
  for (int rb = 0; rb < cfg.num_rbs; ++rb) {
    alloc.set(0, rb, static_cast<int>(rng.uniform_int(cfg.ues_per_bs())));
    if (rng.uniform() < 0.5)
      alloc.set(1, rb, cfg.global_ue(1, static_cast<int>(rng.uniform_int(cfg.ues_per_bs()))));
  }
  const std::vector<double> power = {0.7, 0.9};
  const int ue = 0;
  const double whole = link_capacity(0, ue, alloc, power, chan, cfg);
  double parts = 0.0;
  for (int rb : alloc.rbs_of(0, ue)) {
    RbAllocation single = alloc;
    for (int other : alloc.rbs_of(0, ue))
      if (other != rb) single.set(0, other, RbAllocation::kUnassigned);
    parts += link_capacity(0, ue, single, power, chan, cfg);
  }
  CHECK(whole == doctest::Approx(parts).epsilon(1e-9));
}

TEST_CASE("cbr traffic emits exactly one packet per tti at parity") {
  NetworkConfig cfg = tiny_config();
  cfg.tti_duration_s = 1e-3;
  cfg.slices_per_bs[0].offered_load_bps = 256000.0;  // 32 B / ms
  TrafficGenerator gen(cfg);
  auto rngs = traffic_streams(cfg, 1);
  for (std::int64_t tti = 0; tti < 1000; ++tti) {
    const auto packets = gen.generate(tti, rngs);
    CHECK(packets.size() == 1);
    CHECK(packets[0].size_bits == 256);
    CHECK(packets[0].arrival_tti == tti);
  }
}

TEST_CASE("zero load emits nothing") {
  NetworkConfig cfg = tiny_config();
  TrafficGenerator gen(cfg);
  auto rngs = traffic_streams(cfg, 1);
  for (std::int64_t tti = 0; tti < 1000; ++tti)
    CHECK(gen.generate(tti, rngs).empty());
}

TEST_CASE("poisson traffic hits the offered load within one percent") {
  NetworkConfig cfg = tiny_config();
  cfg.slices_per_bs[0].traffic_model = TrafficModel::kPoisson;
  cfg.slices_per_bs[0].packet_size_bytes = 16;
  cfg.slices_per_bs[0].offered_load_bps = 1.0e6;
  TrafficGenerator gen(cfg);
  auto rngs = traffic_streams(cfg, 5);
  const std::int64_t ttis = 1000000;
  std::int64_t bits = 0;
  for (std::int64_t tti = 0; tti < ttis; ++tti)
    for (const Packet& p : gen.generate(tti, rngs)) bits += p.size_bits;
  const double rate = static_cast<double>(bits) / (ttis * cfg.tti_duration_s);
  CHECK(rate == doctest::Approx(1.0e6).epsilon(0.01));
}

TEST_CASE("arrivals round-robin across slice devices") {
  NetworkConfig cfg = tiny_config();
  cfg.tti_duration_s = 1e-3;
  cfg.slices_per_bs[0].offered_load_bps = 256000.0;
  TrafficGenerator gen(cfg);
  auto rngs = traffic_streams(cfg, 1);
  std::vector<int> devices;
  for (std::int64_t tti = 0; tti < 6; ++tti)
    for (const Packet& p : gen.generate(tti, rngs)) devices.push_back(p.device);
  CHECK(devices == std::vector<int>{0, 1, 0, 1, 0, 1});
}

TEST_CASE("a packet served within one tti completes with delay one") {
  NetworkConfig cfg = tiny_config();
  ChannelModel chan = ChannelModel::flat(1, cfg.total_ues(), 1e-8);
  CellState state(cfg);
  TrafficGenerator gen(cfg);
  auto rngs = traffic_streams(cfg, 1);
  state.enqueue(make_packet(0, 0, 0, 256, 0, 1));
  const RbAllocation alloc = all_rbs_to(cfg, 0, 0);
  const TtiReport report = step_tti(state, gen, alloc, chan, cfg, rngs, 0);
  REQUIRE(report.completed_packets.size() == 1);
  const Packet& p = report.completed_packets[0];
  CHECK(p.total_delay_ttis() == 1);
  CHECK(report.slice(0, 0, 1).delivered_bits == 256);
  CHECK(report.slice(0, 0, 1).completed_delays_s[0] ==
        doctest::Approx(cfg.tti_duration_s).epsilon(1e-12));
}

TEST_CASE("decode failure retransmits after the round trip") {
  NetworkConfig cfg = tiny_config();
  cfg.decode_sinr_threshold_db = 25.0;  // pass at P_max, fail at P_max/10
  ChannelModel chan = ChannelModel::flat(1, cfg.total_ues(), 1e-10);
  CellState state(cfg);
  TrafficGenerator gen(cfg);
  auto rngs = traffic_streams(cfg, 1);
  const RbAllocation alloc = all_rbs_to(cfg, 0, 0);
  const RbAllocation idle(cfg.num_bs, cfg.num_rbs);

  state.set_tx_power_w(0, 0.1);
  state.enqueue(make_packet(0, 0, 0, 256, 0, 1));
  TtiReport r0 = step_tti(state, gen, alloc, chan, cfg, rngs, 0);
  CHECK(r0.completed_packets.empty());
  CHECK(r0.slice(0, 0, 1).dropped_packets == 0);
  CHECK(state.queue_len(0, 0) == 0);  // held, not queued

  for (std::int64_t tti = 1; tti <= 3; ++tti) {
    TtiReport r = step_tti(state, gen, idle, chan, cfg, rngs, tti);
    CHECK(r.completed_packets.empty());
  }

  state.set_tx_power_w(0, 1.0);
  TtiReport r4 = step_tti(state, gen, alloc, chan, cfg, rngs, 4);
  REQUIRE(r4.completed_packets.size() == 1);
  const Packet& p = r4.completed_packets[0];
  CHECK(p.total_delay_ttis() == 5);  // 1 service + 4 round trip
  CHECK(p.tx_attempts == 2);
  CHECK(p.rtx_delay_ttis(cfg.retx_round_trip_ttis) == 4);
}

TEST_CASE("a packet failing all attempts is dropped") {
  NetworkConfig cfg = tiny_config();
  cfg.decode_sinr_threshold_db = 60.0;  // unreachable
  ChannelModel chan = ChannelModel::flat(1, cfg.total_ues(), 1e-10);
  CellState state(cfg);
  TrafficGenerator gen(cfg);
  auto rngs = traffic_streams(cfg, 1);
  const RbAllocation alloc = all_rbs_to(cfg, 0, 0);
  state.enqueue(make_packet(0, 0, 0, 256, 0, 1));

  int drops = 0;
  for (std::int64_t tti = 0; tti <= 8; ++tti) {
    TtiReport r = step_tti(state, gen, alloc, chan, cfg, rngs, tti);
    drops += r.slice(0, 0, 1).dropped_packets;
    CHECK(r.completed_packets.empty());
  }
  CHECK(drops == 1);  // attempt at tti 0 fails, retx at tti 4 fails, dropped
  CHECK(state.queue_len(0, 0) == 0);
  CHECK(state.in_system_size_bits(0, 0) == 0);
}

TEST_CASE("scripted three-packet scenario decomposes delays") {
  NetworkConfig cfg = tiny_config();
  cfg.decode_sinr_threshold_db = 25.0;
  ChannelModel chan = ChannelModel::flat(1, cfg.total_ues(), 1e-10);
  CellState state(cfg);
  TrafficGenerator gen(cfg);
  auto rngs = traffic_streams(cfg, 1);
  const RbAllocation to_ue0 = all_rbs_to(cfg, 0, 0);
  const RbAllocation to_ue1 = all_rbs_to(cfg, 0, 1);
  const RbAllocation idle(cfg.num_bs, cfg.num_rbs);

  state.enqueue(make_packet(0, 0, 0, 256, 0, 1));  // P1, served immediately
  state.enqueue(make_packet(0, 0, 1, 256, 0, 2));  // P2, waits one TTI

  std::map<std::uint64_t, Packet> done;
  auto run = [&](std::int64_t tti, const RbAllocation& alloc) {
    for (const Packet& p : step_tti(state, gen, alloc, chan, cfg, rngs, tti)
                               .completed_packets)
      done[p.id] = p;
  };

  run(0, to_ue0);                                   // P1 completes
  run(1, to_ue1);                                   // P2 completes
  state.enqueue(make_packet(0, 0, 0, 256, 2, 3));   // P3
  state.set_tx_power_w(0, 0.1);
  run(2, to_ue0);                                   // P3 fails decode
  run(3, idle);
  run(4, idle);
  run(5, idle);
  state.set_tx_power_w(0, 1.0);
  run(6, to_ue0);                                   // P3 retransmits, succeeds

  REQUIRE(done.size() == 3);
  const int rtt = cfg.retx_round_trip_ttis;

  const Packet& p1 = done.at(1);
  CHECK(p1.total_delay_ttis() == 1);
  CHECK(p1.queue_delay_ttis(rtt) == 0);
  CHECK(p1.tx_delay_ttis() == 1);
  CHECK(p1.rtx_delay_ttis(rtt) == 0);

  const Packet& p2 = done.at(2);
  CHECK(p2.total_delay_ttis() == 2);
  CHECK(p2.queue_delay_ttis(rtt) == 1);
  CHECK(p2.tx_delay_ttis() == 1);
  CHECK(p2.rtx_delay_ttis(rtt) == 0);

  const Packet& p3 = done.at(3);
  CHECK(p3.total_delay_ttis() == 5);
  CHECK(p3.queue_delay_ttis(rtt) == 0);
  CHECK(p3.tx_delay_ttis() == 1);
  CHECK(p3.rtx_delay_ttis(rtt) == 4);  // the round trip, observable exactly

  for (const auto& [id, p] : done)
    CHECK(p.total_delay_ttis() == p.queue_delay_ttis(rtt) + p.tx_delay_ttis() +
                                      p.rtx_delay_ttis(rtt));
}

TEST_CASE("a ue without rbs cannot shrink its queue") {
  NetworkConfig cfg = tiny_config();
  ChannelModel chan = ChannelModel::flat(1, cfg.total_ues(), 1e-8);
  CellState state(cfg);
  TrafficGenerator gen(cfg);
  auto rngs = traffic_streams(cfg, 1);
  state.enqueue(make_packet(0, 0, 0, 256, 0, 1));
  state.enqueue(make_packet(0, 0, 0, 256, 0, 2));
  const RbAllocation idle(cfg.num_bs, cfg.num_rbs);
  const int before = state.queue_len(0, 0);
  step_tti(state, gen, idle, chan, cfg, rngs, 0);
  CHECK(state.queue_len(0, 0) >= before);
}

TEST_CASE("bits are conserved through service, retransmission and drops") {
  NetworkConfig cfg;  // full two-BS default
  cfg.decode_sinr_threshold_db = 20.0;  // provoke some failures
  Rng topo = make_stream(23, StreamId::kTopology);
  const ChannelModel chan = build_topology(cfg, topo);
  CellState state(cfg);
  TrafficGenerator gen(cfg);
  auto rngs = traffic_streams(cfg, 23);
  Rng policy(99);

  const int num_slices = cfg.num_slices();
  std::vector<std::int64_t> arrived(cfg.num_bs * num_slices, 0);
  std::vector<std::int64_t> delivered(cfg.num_bs * num_slices, 0);
  std::vector<std::int64_t> dropped_bits(cfg.num_bs * num_slices, 0);

  for (std::int64_t tti = 0; tti < 300; ++tti) {
    RbAllocation alloc(cfg.num_bs, cfg.num_rbs);
    for (int bs = 0; bs < cfg.num_bs; ++bs)
      for (int rb = 0; rb < cfg.num_rbs; ++rb)
        if (policy.uniform() < 0.8)
          alloc.set(bs, rb, cfg.global_ue(bs, static_cast<int>(
                                                  policy.uniform_int(cfg.ues_per_bs()))));
    const TtiReport r = step_tti(state, gen, alloc, chan, cfg, rngs, tti);
    for (int bs = 0; bs < cfg.num_bs; ++bs) {
      for (int s = 0; s < num_slices; ++s) {
        const auto& m = r.slice(bs, s, num_slices);
        const int size_bits = cfg.slices_per_bs[s].packet_size_bits();
        arrived[bs * num_slices + s] +=
            static_cast<std::int64_t>(m.arrived_packets) * size_bits;
        delivered[bs * num_slices + s] += m.delivered_bits;
        dropped_bits[bs * num_slices + s] +=
            static_cast<std::int64_t>(m.dropped_packets) * size_bits;
        CHECK(arrived[bs * num_slices + s] ==
              delivered[bs * num_slices + s] + dropped_bits[bs * num_slices + s] +
                  state.in_system_size_bits(bs, s));
      }
    }
  }
}

TEST_CASE("identical config and seed give identical tti reports") {
  NetworkConfig cfg;
  auto run_once = [&](std::uint64_t seed) {
    Rng topo = make_stream(seed, StreamId::kTopology);
    const ChannelModel chan = build_topology(cfg, topo);
    CellState state(cfg);
    TrafficGenerator gen(cfg);
    auto rngs = traffic_streams(cfg, seed);
    std::vector<std::int64_t> delivered;
    std::vector<int> queues;
    for (std::int64_t tti = 0; tti < 100; ++tti) {
      RbAllocation alloc(cfg.num_bs, cfg.num_rbs);
      for (int bs = 0; bs < cfg.num_bs; ++bs)
        for (int rb = 0; rb < cfg.num_rbs; ++rb)
          alloc.set(bs, rb, cfg.global_ue(bs, rb % cfg.ues_per_bs()));
      const TtiReport r = step_tti(state, gen, alloc, chan, cfg, rngs, tti);
      for (const auto& m : r.slices) {
        delivered.push_back(m.delivered_bits);
        queues.push_back(m.queue_len);
      }
    }
    return std::make_pair(delivered, queues);
  };
  CHECK(run_once(31) == run_once(31));
}

TEST_CASE("embb reward is half at throughput parity") {
  SliceConfig slice;
  slice.slice_type = SliceType::kEmbb;
  slice.offered_load_bps = 1.0e6;
  SliceEpochMetrics m;
  m.delivered_bits = 1000;  // 1 Mbps over 1 ms
  m.arrived_packets = 4;
  CHECK(slice_reward(m, slice, 1e-3) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("urllc reward is one at zero delay and degrades with drops") {
  SliceConfig slice;
  slice.slice_type = SliceType::kUrllc;
  slice.delay_budget_s = 0.01;
  SliceEpochMetrics m;
  m.delay_sum_s = 0.0;
  m.delay_count = 3;
  m.arrived_packets = 3;
  CHECK(slice_reward(m, slice, 1e-3) == doctest::Approx(1.0));

  SliceEpochMetrics drops;
  drops.dropped_packets = 2;  // all samples at the budget
  drops.arrived_packets = 2;
  CHECK(slice_reward(drops, slice, 1e-3) == doctest::Approx(0.0));
}

TEST_CASE("idle slices earn nothing") {
  SliceConfig embb;
  embb.slice_type = SliceType::kEmbb;
  SliceConfig urllc;
  urllc.slice_type = SliceType::kUrllc;
  SliceEpochMetrics empty;
  CHECK(slice_reward(empty, embb, 1e-3) == 0.0);
  CHECK(slice_reward(empty, urllc, 1e-3) == 0.0);
}

TEST_CASE("rewards stay inside their ranges") {
  Rng rng(77);
  SliceConfig embb;
  embb.slice_type = SliceType::kEmbb;
  embb.offered_load_bps = 1e6;
  SliceConfig urllc;
  urllc.slice_type = SliceType::kUrllc;
  urllc.delay_budget_s = 0.01;
  for (int i = 0; i < 2000; ++i) {
    SliceEpochMetrics m;
    m.delivered_bits = static_cast<std::int64_t>(rng.uniform_int(1000000));
    m.delay_count = static_cast<int>(rng.uniform_int(50));
    m.delay_sum_s = rng.uniform(0.0, 0.05) * m.delay_count;
    m.dropped_packets = static_cast<int>(rng.uniform_int(5));
    m.arrived_packets = static_cast<int>(rng.uniform_int(100));
    m.queue_len_end = static_cast<int>(rng.uniform_int(10));
    const double re = slice_reward(m, embb, 1e-3);
    CHECK(re >= 0.0);
    CHECK(re < 1.0);
    const double ru = slice_reward(m, urllc, 1e-3);
    CHECK(ru >= 0.0);
    CHECK(ru <= 1.0);
  }
}
