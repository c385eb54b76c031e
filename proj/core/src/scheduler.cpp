#include "oran/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace oran {

PpfState::PpfState(int num_ues, int window_ttis, double tti_duration_s)
    : window_ttis_(window_ttis),
      tti_duration_s_(tti_duration_s),
      window_(num_ues),
      window_sum_(num_ues, 0.0) {}

void PpfState::push(const std::vector<std::int64_t>& served_bits_per_ue) {
  for (std::size_t ue = 0; ue < window_.size(); ++ue) {
    auto& w = window_[ue];
    w.push_back(served_bits_per_ue[ue]);
    window_sum_[ue] += static_cast<double>(served_bits_per_ue[ue]);
    if (static_cast<int>(w.size()) > window_ttis_) {
      window_sum_[ue] -= static_cast<double>(w.front());
      w.pop_front();
    }
  }
}

double PpfState::avg_rate_bps(int ue) const {
  const auto& w = window_[ue];
  if (w.empty()) return 0.0;
  return window_sum_[ue] / (static_cast<double>(w.size()) * tti_duration_s_);
}

double PpfState::projected_rate_bps(int ue, double projected_bits) const {
  const double ttis = std::max<double>(1.0, static_cast<double>(window_[ue].size()));
  return (window_sum_[ue] + projected_bits) / (ttis * tti_duration_s_);
}

int ppf_select(const std::vector<PpfCandidate>& candidates, double rate_floor_bps) {
  if (candidates.empty())
    throw std::invalid_argument("ppf_select: empty candidate list");
  int best_ue = -1;
  double best_ratio = -1.0;
  for (const PpfCandidate& c : candidates) {
    const double ratio = c.capacity_bps / std::max(c.avg_rate_bps, rate_floor_bps);
    if (ratio > best_ratio || (ratio == best_ratio && c.ue < best_ue)) {
      best_ratio = ratio;
      best_ue = c.ue;
    }
  }
  return best_ue;
}

void allocate_intra_slice(const std::vector<int>& partition, int bs,
                          const CellState& state, const PpfState& ppf,
                          const std::vector<double>& power_w,
                          const ChannelModel& gains, const NetworkConfig& cfg,
                          RbAllocation& alloc) {
  if (static_cast<int>(partition.size()) != cfg.num_slices())
    throw std::invalid_argument("allocate_intra_slice: partition size mismatch");
  int sum = 0;
  for (int p : partition) sum += p;
  if (sum != cfg.rb_groups)
    throw std::invalid_argument("allocate_intra_slice: partition must sum to rb_groups");

  const int group_rbs = cfg.rbs_per_group();
  const double group_bandwidth_scale = static_cast<double>(group_rbs);

  int next_group = 0;
  for (int s = 0; s < cfg.num_slices(); ++s) {
    const int group_begin = next_group;
    const int group_end = next_group + partition[s];
    next_group = group_end;

    const int dev_begin = cfg.slice_device_begin(s);
    const int dev_end = dev_begin + cfg.slices_per_bs[s].num_devices;

    // Backlog and projected bits per device, maintained across groups.
    std::vector<int> ues;
    std::vector<double> backlog_bits;
    std::vector<double> projected_bits;
    std::vector<double> group_capacity_bps;
    for (int d = dev_begin; d < dev_end; ++d) {
      const int ue = cfg.global_ue(bs, d);
      ues.push_back(ue);
      backlog_bits.push_back(static_cast<double>(state.queued_bits(ue)));
      projected_bits.push_back(0.0);
      group_capacity_bps.push_back(
          estimate_rb_capacity(bs, ue, power_w, gains, cfg) * group_bandwidth_scale);
    }

    for (int g = group_begin; g < group_end; ++g) {
      std::vector<PpfCandidate> candidates;
      for (std::size_t i = 0; i < ues.size(); ++i) {
        if (backlog_bits[i] <= 0.0) continue;
        candidates.push_back({ues[i], group_capacity_bps[i],
                              ppf.projected_rate_bps(ues[i], projected_bits[i])});
      }
      if (candidates.empty()) break;  // slice drained, remaining groups idle

      const int winner = ppf_select(candidates, cfg.ppf_rate_floor_bps);
      for (int rb = g * group_rbs; rb < (g + 1) * group_rbs; ++rb)
        alloc.set(bs, rb, winner);

      const auto it = std::find(ues.begin(), ues.end(), winner);
      const std::size_t i = static_cast<std::size_t>(it - ues.begin());
      const double drained =
          std::min(backlog_bits[i], group_capacity_bps[i] * cfg.tti_duration_s);
      backlog_bits[i] -= drained;
      projected_bits[i] += drained;
    }
  }
}

void update_avg_rate(PpfState& ppf, const TtiReport& report) {
  ppf.push(report.served_bits_per_ue);
}

}  // namespace oran
