#include "oran/config.hpp"

#include <stdexcept>

namespace oran {

std::string to_string(SliceType t) {
  return t == SliceType::kEmbb ? "embb" : "urllc";
}

std::string to_string(TrafficModel t) {
  return t == TrafficModel::kConstantBitRate ? "cbr" : "poisson";
}

std::string to_string(Regime r) {
  switch (r) {
    case Regime::kIrl: return "irl";
    case Regime::kCrl: return "crl";
    case Regime::kFrl: return "frl";
  }
  return "?";
}

Regime regime_from_string(const std::string& s) {
  if (s == "irl" || s == "IRL") return Regime::kIrl;
  if (s == "crl" || s == "CRL") return Regime::kCrl;
  if (s == "frl" || s == "FRL") return Regime::kFrl;
  throw std::invalid_argument("unknown regime '" + s + "' (expected irl, crl or frl)");
}

std::vector<SliceConfig> NetworkConfig::default_slices(double embb_load_total_bps,
                                                       double urllc_load_total_bps) {
  std::vector<SliceConfig> slices(4);
  // eMBB1, eMBB2: CBR 32-byte packets. URLLC1, URLLC2: Poisson 16-byte.
  for (int i = 0; i < 2; ++i) {
    slices[i].slice_type = SliceType::kEmbb;
    slices[i].traffic_model = TrafficModel::kConstantBitRate;
    slices[i].packet_size_bytes = 32;
    slices[i].offered_load_bps = embb_load_total_bps / 2.0;
    slices[i].delay_budget_s = 0.1;
  }
  for (int i = 2; i < 4; ++i) {
    slices[i].slice_type = SliceType::kUrllc;
    slices[i].traffic_model = TrafficModel::kPoisson;
    slices[i].packet_size_bytes = 16;
    slices[i].offered_load_bps = urllc_load_total_bps / 2.0;
    slices[i].delay_budget_s = 0.01;
  }
  // Priority order URLLC2 > URLLC1 > eMBB2 > eMBB1.
  slices[0].priority_weight = 0.1;
  slices[1].priority_weight = 0.2;
  slices[2].priority_weight = 0.3;
  slices[3].priority_weight = 0.4;
  return slices;
}

int NetworkConfig::ues_per_bs() const {
  int n = 0;
  for (const auto& s : slices_per_bs) n += s.num_devices;
  return n;
}

int NetworkConfig::slice_device_begin(int slice) const {
  int begin = 0;
  for (int i = 0; i < slice; ++i) begin += slices_per_bs[i].num_devices;
  return begin;
}

int NetworkConfig::slice_of_local_device(int local_device) const {
  int begin = 0;
  for (int i = 0; i < num_slices(); ++i) {
    begin += slices_per_bs[i].num_devices;
    if (local_device < begin) return i;
  }
  throw std::invalid_argument("local device index out of range");
}

void NetworkConfig::set_embb_load_bps(double total_per_bs) {
  int n = 0;
  for (const auto& s : slices_per_bs)
    if (s.slice_type == SliceType::kEmbb) ++n;
  if (n == 0) return;
  for (auto& s : slices_per_bs)
    if (s.slice_type == SliceType::kEmbb) s.offered_load_bps = total_per_bs / n;
}

void NetworkConfig::set_urllc_load_bps(double total_per_bs) {
  int n = 0;
  for (const auto& s : slices_per_bs)
    if (s.slice_type == SliceType::kUrllc) ++n;
  if (n == 0) return;
  for (auto& s : slices_per_bs)
    if (s.slice_type == SliceType::kUrllc) s.offered_load_bps = total_per_bs / n;
}

namespace {
[[noreturn]] void reject(const std::string& key, const std::string& why) {
  throw std::invalid_argument("invalid config: " + key + " " + why);
}
}  // namespace

void NetworkConfig::validate() const {
  if (num_rbs <= 0) reject("num_rbs", "must be positive");
  if (rb_bandwidth_hz() * num_rbs > bandwidth_hz + 1e-6)
    reject("num_rbs", "RB bandwidth times RB count exceeds bandwidth_hz");
  if (rb_groups <= 0) reject("rb_groups", "must be positive");
  if (num_rbs % rb_groups != 0) reject("rb_groups", "must divide num_rbs");
  if (num_bs <= 0) reject("num_bs", "must be positive");
  if (inter_bs_distance_m <= 0) reject("inter_bs_distance_m", "must be positive");
  if (slices_per_bs.empty()) reject("slices", "must be nonempty");
  if (power_levels < 2) reject("power_levels", "must be at least 2");
  if (tti_duration_s <= 0) reject("tti_duration_s", "must be positive");
  if (max_retransmissions < 0) reject("max_retransmissions", "must be nonnegative");
  if (retx_round_trip_ttis < 1) reject("retx_round_trip_ttis", "must be at least 1");
  if (decision_epoch_ttis <= 0) reject("decision_epoch_ttis", "must be positive");
  if (ppf_window_ttis <= 0) reject("ppf_window_ttis", "must be positive");
  if (ppf_rate_floor_bps <= 0) reject("ppf_rate_floor_bps", "must be positive");
  if (min_tx_power_dbm > max_tx_power_dbm)
    reject("min_tx_power_dbm", "must not exceed max_tx_power_dbm");
  for (std::size_t i = 0; i < slices_per_bs.size(); ++i) {
    const auto& s = slices_per_bs[i];
    const std::string key = "slices[" + std::to_string(i) + "]";
    if (s.num_devices <= 0) reject(key + ".num_devices", "must be positive");
    if (s.priority_weight <= 0) reject(key + ".priority_weight", "must be positive");
    if (s.packet_size_bytes <= 0) reject(key + ".packet_size_bytes", "must be positive");
    if (s.offered_load_bps < 0) reject(key + ".offered_load_bps", "must be nonnegative");
    if (s.delay_budget_s <= 0) reject(key + ".delay_budget_s", "must be positive");
  }
  for (std::size_t i = 1; i < slices_per_bs.size(); ++i) {
    if (slices_per_bs[i].priority_weight == slices_per_bs[i - 1].priority_weight)
      reject("slices", "priority weights must be strictly ordered");
  }
  // The lowest decodable power level must respect the minimum power bound.
  if (max_tx_power_w() / power_levels < min_tx_power_w() - 1e-12)
    reject("min_tx_power_dbm", "exceeds the lowest power level P_max/L_max");
}

void TrainConfig::validate() const {
  if (discount < 0.0 || discount >= 1.0) reject("train.discount", "must be in [0, 1)");
  if (learning_rate <= 0.0) reject("train.learning_rate", "must be positive");
  if (batch_size <= 0) reject("train.batch_size", "must be positive");
  if (replay_capacity < batch_size)
    reject("train.replay_capacity", "must be at least batch_size");
  if (target_sync_epochs <= 0) reject("train.target_sync_epochs", "must be positive");
  if (ttis <= 0) reject("train.ttis", "must be positive");
  if (train_steps_per_epoch < 0) reject("train.train_steps_per_epoch", "must be nonnegative");
  if (epsilon_start < 0.0 || epsilon_start > 1.0) reject("train.epsilon_start", "must be in [0, 1]");
  if (epsilon_end < 0.0 || epsilon_end > 1.0) reject("train.epsilon_end", "must be in [0, 1]");
  if (epsilon_decay_fraction < 0.0 || epsilon_decay_fraction > 1.0)
    reject("train.epsilon_decay_fraction", "must be in [0, 1]");
  if (local_hidden.empty() || global_hidden.empty() || crl_hidden.empty())
    reject("train.hidden", "layer lists must be nonempty");
  if (power_penalty < 0.0) reject("train.power_penalty", "must be nonnegative");
  if (queue_norm_packets <= 0.0) reject("train.queue_norm_packets", "must be positive");
}

void ExperimentPlan::validate() const {
  if (regimes.empty()) reject("plan.regimes", "must be nonempty");
  if (embb_loads_bps.empty()) reject("plan.embb_loads_bps", "must be nonempty");
  if (seeds.empty()) reject("plan.seeds", "must be nonempty");
  if (ttis_per_run <= 0) reject("plan.ttis_per_run", "must be positive");
  if (warmup_fraction < 0.0 || warmup_fraction >= 1.0)
    reject("plan.warmup_fraction", "must be in [0, 1)");
  if (urllc_load_bps < 0.0) reject("plan.urllc_load_bps", "must be nonnegative");
  for (double l : embb_loads_bps)
    if (l < 0.0) reject("plan.embb_loads_bps", "must be nonnegative");
}

}  // namespace oran
