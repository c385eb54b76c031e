#include "oran/radio_env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace oran {

std::vector<int> RbAllocation::rbs_of(int bs, std::int32_t ue) const {
  std::vector<int> rbs;
  for (int rb = 0; rb < num_rbs; ++rb)
    if (get(bs, rb) == ue) rbs.push_back(rb);
  return rbs;
}

void RbAllocation::validate(const NetworkConfig& cfg) const {
  if (num_bs != cfg.num_bs || num_rbs != cfg.num_rbs)
    throw std::invalid_argument("RbAllocation shape does not match config");
  for (int bs = 0; bs < num_bs; ++bs) {
    for (int rb = 0; rb < num_rbs; ++rb) {
      const std::int32_t ue = get(bs, rb);
      if (ue == kUnassigned) continue;
      if (ue < 0 || ue >= cfg.total_ues())
        throw std::invalid_argument("RbAllocation: UE index out of range");
      if (cfg.serving_bs(ue) != bs)
        throw std::invalid_argument("RbAllocation: UE assigned to a foreign BS");
    }
  }
}

TrafficGenerator::TrafficGenerator(const NetworkConfig& cfg) : cfg_(&cfg) {
  const std::size_t n = static_cast<std::size_t>(cfg.num_bs) * cfg.num_slices();
  cbr_accumulator_bits_.assign(n, 0.0);
  rr_cursor_.assign(n, 0);
}

std::vector<Packet> TrafficGenerator::generate(std::int64_t tti,
                                               std::vector<Rng>& rngs) {
  std::vector<Packet> out;
  for (int bs = 0; bs < cfg_->num_bs; ++bs) {
    for (int s = 0; s < cfg_->num_slices(); ++s) {
      const SliceConfig& slice = cfg_->slices_per_bs[s];
      const std::size_t idx = bs * cfg_->num_slices() + s;
      const int size_bits = slice.packet_size_bits();
      std::int64_t arrivals = 0;
      if (slice.offered_load_bps <= 0.0) {
        arrivals = 0;
      } else if (slice.traffic_model == TrafficModel::kConstantBitRate) {
        cbr_accumulator_bits_[idx] += slice.offered_load_bps * cfg_->tti_duration_s;
        // Guard against drift: the accumulator stays within one packet of 0.
        while (cbr_accumulator_bits_[idx] >= size_bits - 1e-9) {
          cbr_accumulator_bits_[idx] -= size_bits;
          ++arrivals;
        }
      } else {
        const double mean =
            slice.offered_load_bps * cfg_->tti_duration_s / size_bits;
        arrivals = static_cast<std::int64_t>(rngs[bs].poisson(mean));
      }
      for (std::int64_t i = 0; i < arrivals; ++i) {
        Packet p;
        p.id = next_id_++;
        p.bs = bs;
        p.slice = s;
        const int local =
            cfg_->slice_device_begin(s) + rr_cursor_[idx] % slice.num_devices;
        rr_cursor_[idx] = (rr_cursor_[idx] + 1) % slice.num_devices;
        p.device = cfg_->global_ue(bs, local);
        p.size_bits = size_bits;
        p.remaining_bits = size_bits;
        p.arrival_tti = tti;
        out.push_back(p);
      }
    }
  }
  return out;
}

CellState::CellState(const NetworkConfig& cfg) : cfg_(&cfg) {
  tx_power_w_.assign(cfg.num_bs, cfg.max_tx_power_w());
  queues_.resize(cfg.total_ues());
}

void CellState::set_tx_power_w(int bs, double watts) {
  if (watts < cfg_->min_tx_power_w() - 1e-12 ||
      watts > cfg_->max_tx_power_w() + 1e-12)
    throw std::invalid_argument("tx power outside [P_min, P_max]");
  tx_power_w_[bs] = watts;
}

void CellState::enqueue(Packet p) { queues_[p.device].push_back(std::move(p)); }

void CellState::release_due_retx(std::int64_t tti) {
  auto it = hold_.begin();
  while (it != hold_.end() && it->first <= tti) {
    // Front-insert preserving arrival order: retransmissions are older than
    // anything currently queued.
    auto& packets = it->second;
    for (auto rit = packets.rbegin(); rit != packets.rend(); ++rit) {
      rit->retx_ready_tti = -1;
      queues_[rit->device].push_front(std::move(*rit));
    }
    it = hold_.erase(it);
  }
}

void CellState::hold_for_retx(Packet p, std::int64_t ready_tti) {
  p.retx_ready_tti = ready_tti;
  p.remaining_bits = p.size_bits;  // full retransmission, no soft combining
  hold_[ready_tti].push_back(std::move(p));
}

int CellState::queue_len(int bs, int slice) const {
  int n = 0;
  const int begin = cfg_->slice_device_begin(slice);
  const int end = begin + cfg_->slices_per_bs[slice].num_devices;
  for (int d = begin; d < end; ++d)
    n += static_cast<int>(queues_[cfg_->global_ue(bs, d)].size());
  return n;
}

std::int64_t CellState::queued_bits(int global_ue) const {
  std::int64_t bits = 0;
  for (const Packet& p : queues_[global_ue]) bits += p.remaining_bits;
  return bits;
}

std::int64_t CellState::in_system_size_bits(int bs, int slice) const {
  std::int64_t bits = 0;
  const int begin = cfg_->slice_device_begin(slice);
  const int end = begin + cfg_->slices_per_bs[slice].num_devices;
  for (int d = begin; d < end; ++d)
    for (const Packet& p : queues_[cfg_->global_ue(bs, d)]) bits += p.size_bits;
  for (const auto& [tti, packets] : hold_)
    for (const Packet& p : packets)
      if (p.bs == bs && p.slice == slice) bits += p.size_bits;
  return bits;
}

double compute_sinr(const RbAllocation& alloc, const std::vector<double>& power_w,
                    const ChannelModel& gains, const NetworkConfig& cfg, int bs,
                    int rb, int ue) {
  if (alloc.get(bs, rb) != ue)
    throw std::invalid_argument("compute_sinr: RB not assigned to this UE");
  const double p_rb = power_w[bs] / cfg.num_rbs;
  double interference = 0.0;
  for (int other = 0; other < cfg.num_bs; ++other) {
    if (other == bs) continue;
    if (alloc.get(other, rb) == RbAllocation::kUnassigned) continue;
    interference += gains.gain(other, ue) * power_w[other] / cfg.num_rbs;
  }
  return gains.gain(bs, ue) * p_rb / (interference + cfg.noise_w_per_rb());
}

double link_capacity(int bs, int ue, const RbAllocation& alloc,
                     const std::vector<double>& power_w, const ChannelModel& gains,
                     const NetworkConfig& cfg) {
  double capacity = 0.0;
  for (int rb = 0; rb < cfg.num_rbs; ++rb) {
    if (alloc.get(bs, rb) != ue) continue;
    const double sinr = compute_sinr(alloc, power_w, gains, cfg, bs, rb, ue);
    capacity += cfg.rb_bandwidth_hz() * std::log2(1.0 + sinr);
  }
  return capacity;
}

double estimate_rb_capacity(int bs, int ue, const std::vector<double>& power_w,
                            const ChannelModel& gains, const NetworkConfig& cfg) {
  const double p_rb = power_w[bs] / cfg.num_rbs;
  double interference = 0.0;
  for (int other = 0; other < cfg.num_bs; ++other) {
    if (other == bs) continue;
    interference += gains.gain(other, ue) * power_w[other] / cfg.num_rbs;
  }
  const double sinr = gains.gain(bs, ue) * p_rb / (interference + cfg.noise_w_per_rb());
  return cfg.rb_bandwidth_hz() * std::log2(1.0 + sinr);
}

TtiReport step_tti(CellState& state, TrafficGenerator& traffic,
                   const RbAllocation& alloc, const ChannelModel& gains,
                   const NetworkConfig& cfg, std::vector<Rng>& traffic_rngs,
                   std::int64_t tti) {
  TtiReport report;
  report.tti = tti;
  report.slices.resize(static_cast<std::size_t>(cfg.num_bs) * cfg.num_slices());
  report.served_bits_per_ue.assign(cfg.total_ues(), 0);
  report.power_w.resize(cfg.num_bs);
  for (int bs = 0; bs < cfg.num_bs; ++bs) report.power_w[bs] = state.tx_power_w(bs);

  state.release_due_retx(tti);

  for (Packet& p : traffic.generate(tti, traffic_rngs)) {
    ++report.slice(p.bs, p.slice, cfg.num_slices()).arrived_packets;
    state.enqueue(std::move(p));
  }

  std::vector<double> power(cfg.num_bs);
  for (int bs = 0; bs < cfg.num_bs; ++bs) power[bs] = state.tx_power_w(bs);

  const double threshold = db_to_linear(cfg.decode_sinr_threshold_db);
  for (int bs = 0; bs < cfg.num_bs; ++bs) {
    for (int local = 0; local < cfg.ues_per_bs(); ++local) {
      const int ue = cfg.global_ue(bs, local);
      const std::vector<int> rbs = alloc.rbs_of(bs, ue);
      if (rbs.empty()) continue;

      double capacity = 0.0;
      double sinr_sum = 0.0;
      for (int rb : rbs) {
        const double sinr = compute_sinr(alloc, power, gains, cfg, bs, rb, ue);
        sinr_sum += sinr;
        capacity += cfg.rb_bandwidth_hz() * std::log2(1.0 + sinr);
      }
      const double effective_sinr = sinr_sum / static_cast<double>(rbs.size());
      report.sinr_samples.push_back(effective_sinr);

      std::int64_t budget =
          static_cast<std::int64_t>(std::floor(capacity * cfg.tti_duration_s));
      auto& queue = state.queue(ue);
      while (budget > 0 && !queue.empty()) {
        Packet& p = queue.front();
        const std::int64_t take = std::min<std::int64_t>(budget, p.remaining_bits);
        if (take <= 0) break;
        p.remaining_bits -= take;
        budget -= take;
        report.served_bits_per_ue[ue] += take;
        if (p.queue_entered_service_tti < 0) p.queue_entered_service_tti = tti;
        if (p.tx_attempts == 0)
          ++p.service_ttis_first_attempt;
        else
          ++p.service_ttis_retx;

        if (p.remaining_bits > 0) break;  // budget exhausted mid-packet

        ++p.tx_attempts;
        auto& m = report.slice(bs, p.slice, cfg.num_slices());
        if (effective_sinr >= threshold) {
          p.completed_tti = tti;
          m.delivered_bits += p.size_bits;
          m.completed_delays_s.push_back(p.total_delay_ttis() * cfg.tti_duration_s);
          report.completed_packets.push_back(p);
          queue.pop_front();
        } else if (p.tx_attempts > cfg.max_retransmissions) {
          ++m.dropped_packets;
          queue.pop_front();
        } else {
          Packet held = std::move(p);
          queue.pop_front();
          state.hold_for_retx(std::move(held), tti + cfg.retx_round_trip_ttis);
        }
      }
    }
  }

  for (int bs = 0; bs < cfg.num_bs; ++bs)
    for (int s = 0; s < cfg.num_slices(); ++s)
      report.slice(bs, s, cfg.num_slices()).queue_len = state.queue_len(bs, s);
  return report;
}

void EpochAccumulator::add(const TtiReport& report) {
  for (std::size_t i = 0; i < metrics_.size(); ++i) {
    const SliceTtiMetrics& in = report.slices[i];
    SliceEpochMetrics& out = metrics_[i];
    out.delivered_bits += in.delivered_bits;
    for (double d : in.completed_delays_s) out.delay_sum_s += d;
    out.delay_count += static_cast<int>(in.completed_delays_s.size());
    out.dropped_packets += in.dropped_packets;
    out.arrived_packets += in.arrived_packets;
    out.queue_len_end = in.queue_len;  // last TTI wins
  }
}

double slice_reward(const SliceEpochMetrics& m, const SliceConfig& slice,
                    double epoch_duration_s) {
  if (!m.active()) return 0.0;
  if (slice.slice_type == SliceType::kEmbb) {
    const double offered_bits = slice.offered_load_bps * epoch_duration_s;
    if (offered_bits <= 0.0) return 0.0;
    const double ratio = static_cast<double>(m.delivered_bits) / offered_bits;
    return 2.0 / 3.14159265358979323846 * std::atan(ratio);
  }
  const int samples = m.delay_count + m.dropped_packets;
  if (samples == 0) return 0.0;
  const double mean = m.mean_delay_s(slice.delay_budget_s);
  return 1.0 - std::min(1.0, mean / slice.delay_budget_s);
}

}  // namespace oran
