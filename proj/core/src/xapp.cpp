#include "oran/xapp.hpp"

#include <algorithm>
#include <stdexcept>

namespace oran {

RaAgentSpec RaAgentSpec::from(const NetworkConfig& cfg, const TrainConfig& train) {
  RaAgentSpec spec;
  spec.rb_groups = cfg.rb_groups;
  spec.num_slices = cfg.num_slices();
  spec.queue_norm_packets = train.queue_norm_packets;
  spec.actions = enumerate_partitions(spec.rb_groups, spec.num_slices);
  return spec;
}

std::vector<std::vector<int>> enumerate_partitions(int total, int n) {
  if (total < 0 || n < 1)
    throw std::invalid_argument("enumerate_partitions: need total >= 0, n >= 1");
  std::vector<std::vector<int>> out;
  std::vector<int> current(n, 0);
  // Lexicographic order: position i takes 0..remaining, recurse on the rest.
  auto rec = [&](auto&& self, int pos, int remaining) -> void {
    if (pos == n - 1) {
      current[pos] = remaining;
      out.push_back(current);
      return;
    }
    for (int take = 0; take <= remaining; ++take) {
      current[pos] = take;
      self(self, pos + 1, remaining - take);
    }
  };
  rec(rec, 0, total);
  return out;
}

namespace {

double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

void append_queue_delay_features(const std::vector<SliceEpochMetrics>& metrics,
                                 const NetworkConfig& cfg, double queue_norm,
                                 std::vector<double>& features) {
  for (std::size_t s = 0; s < metrics.size(); ++s)
    features.push_back(clamp01(metrics[s].queue_len_end / queue_norm));
  for (std::size_t s = 0; s < metrics.size(); ++s) {
    const double budget = cfg.slices_per_bs[s].delay_budget_s;
    features.push_back(clamp01(metrics[s].mean_delay_s(budget) / budget));
  }
}

}  // namespace

std::vector<double> observe_power_state(const std::vector<SliceEpochMetrics>& metrics,
                                        double tx_power_w, const NetworkConfig& cfg,
                                        const PowerAgentSpec& spec) {
  if (static_cast<int>(metrics.size()) != cfg.num_slices())
    throw std::invalid_argument("observe_power_state: metrics size mismatch");
  std::vector<double> features;
  features.reserve(spec.state_size(cfg.num_slices()));
  append_queue_delay_features(metrics, cfg, spec.queue_norm_packets, features);
  features.push_back(clamp01(tx_power_w / cfg.max_tx_power_w()));
  return features;
}

std::vector<double> observe_ra_state(const std::vector<SliceEpochMetrics>& metrics,
                                     const NetworkConfig& cfg,
                                     const RaAgentSpec& spec) {
  if (static_cast<int>(metrics.size()) != cfg.num_slices())
    throw std::invalid_argument("observe_ra_state: metrics size mismatch");
  std::vector<double> features;
  features.reserve(spec.state_size());
  append_queue_delay_features(metrics, cfg, spec.queue_norm_packets, features);
  return features;
}

double decode_power_action(int action_index, const PowerAgentSpec& spec,
                           const NetworkConfig& cfg) {
  if (action_index < 0 || action_index >= spec.power_levels)
    throw std::invalid_argument("decode_power_action: index out of range");
  return (action_index + 1) * cfg.max_tx_power_w() / spec.power_levels;
}

double power_reward(const std::vector<double>& slice_rewards,
                    const std::vector<double>& weights, int action_index,
                    const PowerAgentSpec& spec) {
  return ra_reward(slice_rewards, weights) -
         spec.penalty_coefficient * (action_index + 1);
}

double ra_reward(const std::vector<double>& slice_rewards,
                 const std::vector<double>& weights) {
  if (slice_rewards.size() != weights.size())
    throw std::invalid_argument("ra_reward: rewards/weights size mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i)
    sum += weights[i] * slice_rewards[i];
  return sum;
}

}  // namespace oran
