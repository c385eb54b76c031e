#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <vector>

#include "oran/channel.hpp"
#include "oran/config.hpp"
#include "oran/rng.hpp"

namespace oran {

struct Packet {
  std::uint64_t id = 0;
  int bs = 0;
  int slice = 0;
  int device = 0;  // global UE index
  std::int64_t size_bits = 0;
  std::int64_t remaining_bits = 0;
  std::int64_t arrival_tti = 0;
  int tx_attempts = 0;  // completed transmission attempts
  std::int64_t retx_ready_tti = -1;
  std::int64_t completed_tti = -1;
  std::int64_t queue_entered_service_tti = -1;  // first TTI with any bits served
  int service_ttis_first_attempt = 0;
  int service_ttis_retx = 0;

  // Delay accounting for completed packets, in TTIs. The total counts the
  // arrival TTI itself, so a packet served the TTI it arrives has delay 1.
  std::int64_t total_delay_ttis() const { return completed_tti - arrival_tti + 1; }
  int tx_delay_ttis() const { return service_ttis_first_attempt; }
  // Hold time plus retransmission service time.
  std::int64_t rtx_delay_ttis(int round_trip_ttis) const {
    return static_cast<std::int64_t>(tx_attempts - 1) * (round_trip_ttis - 1) +
           service_ttis_retx;
  }
  std::int64_t queue_delay_ttis(int round_trip_ttis) const {
    return total_delay_ttis() - tx_delay_ttis() - rtx_delay_ttis(round_trip_ttis);
  }
};

// Per-(BS, RB) device assignment; kUnassigned leaves the RB idle. At most one
// device per RB, and the device must be served by that BS.
struct RbAllocation {
  static constexpr std::int32_t kUnassigned = -1;

  int num_bs = 0;
  int num_rbs = 0;
  std::vector<std::int32_t> assignment;  // (bs, rb) row-major, global UE index

  RbAllocation() = default;
  RbAllocation(int bs_count, int rb_count)
      : num_bs(bs_count),
        num_rbs(rb_count),
        assignment(static_cast<std::size_t>(bs_count) * rb_count, kUnassigned) {}

  std::int32_t get(int bs, int rb) const { return assignment[bs * num_rbs + rb]; }
  void set(int bs, int rb, std::int32_t ue) { assignment[bs * num_rbs + rb] = ue; }
  void clear() { assignment.assign(assignment.size(), kUnassigned); }
  std::vector<int> rbs_of(int bs, std::int32_t ue) const;
  void validate(const NetworkConfig& cfg) const;
};

// Packet arrival process. CBR slices use a fractional bit accumulator so the
// long-run rate is exact; Poisson slices draw per-TTI arrival counts. Packets
// round-robin across the devices of their slice.
class TrafficGenerator {
 public:
  explicit TrafficGenerator(const NetworkConfig& cfg);

  // Arrivals for every (bs, slice) at this TTI. rngs: one stream per BS.
  std::vector<Packet> generate(std::int64_t tti, std::vector<Rng>& rngs);

 private:
  const NetworkConfig* cfg_;
  std::vector<double> cbr_accumulator_bits_;  // (bs, slice)
  std::vector<int> rr_cursor_;                // (bs, slice)
  std::uint64_t next_id_ = 0;
};

struct SliceTtiMetrics {
  std::int64_t delivered_bits = 0;  // bits of successfully completed packets
  std::vector<double> completed_delays_s;
  int dropped_packets = 0;
  int arrived_packets = 0;
  int queue_len = 0;  // end of TTI, held packets excluded
};

struct TtiReport {
  std::int64_t tti = 0;
  std::vector<SliceTtiMetrics> slices;     // (bs, slice) row-major
  std::vector<std::int64_t> served_bits_per_ue;  // transmitted bits, per global UE
  std::vector<double> power_w;             // per BS
  std::vector<double> sinr_samples;        // effective SINR of each scheduled UE
  std::vector<Packet> completed_packets;   // full records, delay components intact

  SliceTtiMetrics& slice(int bs, int s, int num_slices) {
    return slices[bs * num_slices + s];
  }
  const SliceTtiMetrics& slice(int bs, int s, int num_slices) const {
    return slices[bs * num_slices + s];
  }
};

// Mutable world of one simulation run: per-UE FIFO queues, the
// retransmission hold buffer and per-BS transmit powers.
class CellState {
 public:
  explicit CellState(const NetworkConfig& cfg);

  double tx_power_w(int bs) const { return tx_power_w_[bs]; }
  void set_tx_power_w(int bs, double watts);

  void enqueue(Packet p);
  // Moves packets whose retransmission round trip has elapsed back to the
  // front of their device queue. Idempotent within a TTI.
  void release_due_retx(std::int64_t tti);
  void hold_for_retx(Packet p, std::int64_t ready_tti);

  const std::deque<Packet>& queue(int global_ue) const { return queues_[global_ue]; }
  std::deque<Packet>& queue(int global_ue) { return queues_[global_ue]; }

  int queue_len(int bs, int slice) const;           // packets
  std::int64_t queued_bits(int global_ue) const;    // remaining bits
  // Full-size bits of packets still in the system (queued + held), for
  // conservation checks.
  std::int64_t in_system_size_bits(int bs, int slice) const;

  const NetworkConfig& config() const { return *cfg_; }

 private:
  const NetworkConfig* cfg_;
  std::vector<double> tx_power_w_;
  std::vector<std::deque<Packet>> queues_;              // per global UE
  std::map<std::int64_t, std::vector<Packet>> hold_;    // ready_tti -> packets
};

// Eq-1 SINR of (bs, rb, ue) under the joint allocation. Power is split
// uniformly across RBs; interference counts only co-channel RBs actually
// assigned by other BSs. Throws if the RB is not assigned to the UE.
double compute_sinr(const RbAllocation& alloc, const std::vector<double>& power_w,
                    const ChannelModel& gains, const NetworkConfig& cfg, int bs,
                    int rb, int ue);

// Shannon capacity summed over the UE's assigned RBs, bits/s.
double link_capacity(int bs, int ue, const RbAllocation& alloc,
                     const std::vector<double>& power_w, const ChannelModel& gains,
                     const NetworkConfig& cfg);

// Scheduler-side capacity estimate: worst-case interference (every other BS
// transmitting on all RBs at its current power). Uniform power makes this
// per-RB value identical across RBs of one link.
double estimate_rb_capacity(int bs, int ue, const std::vector<double>& power_w,
                            const ChannelModel& gains, const NetworkConfig& cfg);

// One TTI: release due retransmissions, enqueue arrivals, serve scheduled
// UEs, decode-check finishing packets, account delays and drops.
TtiReport step_tti(CellState& state, TrafficGenerator& traffic,
                   const RbAllocation& alloc, const ChannelModel& gains,
                   const NetworkConfig& cfg, std::vector<Rng>& traffic_rngs,
                   std::int64_t tti);

// Metrics of one slice aggregated over a decision epoch.
struct SliceEpochMetrics {
  std::int64_t delivered_bits = 0;
  double delay_sum_s = 0.0;  // completed packets only
  int delay_count = 0;
  int dropped_packets = 0;
  int arrived_packets = 0;
  int queue_len_end = 0;

  bool active() const {
    return delivered_bits > 0 || arrived_packets > 0 || dropped_packets > 0 ||
           queue_len_end > 0;
  }
  // Mean delay with dropped packets counted at the budget. 0 when nothing
  // completed or dropped.
  double mean_delay_s(double drop_delay_s) const {
    const int n = delay_count + dropped_packets;
    if (n == 0) return 0.0;
    return (delay_sum_s + dropped_packets * drop_delay_s) / n;
  }
};

class EpochAccumulator {
 public:
  EpochAccumulator(int num_bs, int num_slices)
      : num_slices_(num_slices),
        metrics_(static_cast<std::size_t>(num_bs) * num_slices) {}

  void add(const TtiReport& report);
  const SliceEpochMetrics& slice(int bs, int s) const {
    return metrics_[bs * num_slices_ + s];
  }
  std::vector<SliceEpochMetrics> bs_metrics(int bs) const {
    return {metrics_.begin() + bs * num_slices_,
            metrics_.begin() + (bs + 1) * num_slices_};
  }

 private:
  int num_slices_;
  std::vector<SliceEpochMetrics> metrics_;
};

// Per-slice reward over one decision epoch. eMBB: (2/pi) atan(throughput /
// offered load), URLLC: 1 - clamped normalized mean delay; idle slices score 0.
double slice_reward(const SliceEpochMetrics& m, const SliceConfig& slice,
                    double epoch_duration_s);

}  // namespace oran
