#pragma once

#include <cstdint>
#include <deque>
#include <vector>

#include "oran/config.hpp"
#include "oran/radio_env.hpp"

namespace oran {

// Sliding window of transmitted bits per UE, the denominator of the
// proportional-fair ratio.
class PpfState {
 public:
  PpfState(int num_ues, int window_ttis, double tti_duration_s);

  // Advance one TTI with the bits actually transmitted to each UE.
  void push(const std::vector<std::int64_t>& served_bits_per_ue);

  // Windowed average rate in bits/s; 0 until the UE has any history.
  double avg_rate_bps(int ue) const;
  // Average rate as if `projected_bits` more bits had been delivered within
  // the current window. Used between RB-group assignments of one TTI.
  double projected_rate_bps(int ue, double projected_bits) const;

  int window_len() const { return window_ttis_; }

 private:
  int window_ttis_;
  double tti_duration_s_;
  std::vector<std::deque<std::int64_t>> window_;  // per UE
  std::vector<double> window_sum_;
};

struct PpfCandidate {
  int ue = 0;
  double capacity_bps = 0.0;  // instantaneous rate if scheduled
  double avg_rate_bps = 0.0;  // windowed (possibly projected) average
};

// argmax of capacity / max(avg_rate, floor); ties broken by lowest UE id.
// Throws on an empty candidate list (the caller leaves the RBs idle).
int ppf_select(const std::vector<PpfCandidate>& candidates, double rate_floor_bps);

// Intra-slice allocation for one BS. `partition` holds RB-group counts per
// slice and must sum to rb_groups. Groups map to contiguous RB ranges in
// slice order; inside a slice each group goes to the PPF winner, with the
// window projected forward by the bits the group is expected to drain.
// Devices with empty queues never receive RBs. Writes into `alloc`.
void allocate_intra_slice(const std::vector<int>& partition, int bs,
                          const CellState& state, const PpfState& ppf,
                          const std::vector<double>& power_w,
                          const ChannelModel& gains, const NetworkConfig& cfg,
                          RbAllocation& alloc);

// Advance the PPF window from a finished TTI.
void update_avg_rate(PpfState& ppf, const TtiReport& report);

}  // namespace oran
