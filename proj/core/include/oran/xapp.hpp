#pragma once

#include <vector>

#include "oran/config.hpp"
#include "oran/radio_env.hpp"

namespace oran {

// Power-control agent (alpha): picks one of L_max discrete power levels.
struct PowerAgentSpec {
  int power_levels = 10;          // L_max
  double penalty_coefficient = 0.01;
  double queue_norm_packets = 200.0;

  static PowerAgentSpec from(const NetworkConfig& cfg, const TrainConfig& train) {
    return {cfg.power_levels, train.power_penalty, train.queue_norm_packets};
  }
  // Per-slice queue + per-slice delay + current power.
  int state_size(int num_slices) const { return 2 * num_slices + 1; }
  int action_space() const { return power_levels; }
};

// Resource-allocation agent (beta): picks one composition of R_max RB groups
// over the slices.
struct RaAgentSpec {
  int rb_groups = 10;  // R_max
  int num_slices = 4;
  double queue_norm_packets = 200.0;
  std::vector<std::vector<int>> actions;  // all compositions, lexicographic

  static RaAgentSpec from(const NetworkConfig& cfg, const TrainConfig& train);
  int state_size() const { return 2 * num_slices; }
  int action_space() const { return static_cast<int>(actions.size()); }
};

// All ordered N-tuples of nonnegative integers summing to total, in
// lexicographic order. Size is C(total + n - 1, n - 1).
std::vector<std::vector<int>> enumerate_partitions(int total, int n);

// Feature vectors; every entry lies in [0, 1].
std::vector<double> observe_power_state(const std::vector<SliceEpochMetrics>& metrics,
                                        double tx_power_w, const NetworkConfig& cfg,
                                        const PowerAgentSpec& spec);
std::vector<double> observe_ra_state(const std::vector<SliceEpochMetrics>& metrics,
                                     const NetworkConfig& cfg,
                                     const RaAgentSpec& spec);

// Level index (0-based) -> transmit power in watts: (index+1) * P_max / L_max.
double decode_power_action(int action_index, const PowerAgentSpec& spec,
                           const NetworkConfig& cfg);

// Weighted slice-reward sum minus the power penalty alpha_pen * level.
double power_reward(const std::vector<double>& slice_rewards,
                    const std::vector<double>& weights, int action_index,
                    const PowerAgentSpec& spec);

// Weighted slice-reward sum.
double ra_reward(const std::vector<double>& slice_rewards,
                 const std::vector<double>& weights);

}  // namespace oran
