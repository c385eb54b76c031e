#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace oran {

enum class SliceType { kEmbb, kUrllc };
enum class TrafficModel { kConstantBitRate, kPoisson };
enum class Regime { kIrl, kCrl, kFrl };

std::string to_string(SliceType t);
std::string to_string(TrafficModel t);
std::string to_string(Regime r);
Regime regime_from_string(const std::string& s);

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

struct SliceConfig {
  SliceType slice_type = SliceType::kEmbb;
  int num_devices = 3;
  double priority_weight = 0.1;
  int packet_size_bytes = 32;
  double offered_load_bps = 4.0e6;
  TrafficModel traffic_model = TrafficModel::kConstantBitRate;
  double delay_budget_s = 0.1;  // URLLC default 10 ms, eMBB 100 ms

  int packet_size_bits() const { return packet_size_bytes * 8; }
};

// Physical, traffic and topology parameterization. Defaults reproduce the
// reference carrier: 20 MHz, 100 RBs, 2 gNBs 500 m apart, 12 UEs per BS in
// 2 eMBB + 2 URLLC slices.
struct NetworkConfig {
  double bandwidth_hz = 20.0e6;
  int num_rbs = 100;
  int subcarriers_per_rb = 12;
  double subcarrier_spacing_hz = 15000.0;
  double max_tx_power_dbm = 30.0;
  double min_tx_power_dbm = 20.0;
  double antenna_gain_db = 15.0;  // combined Tx/Rx, applied once per link
  double noise_density_dbm_hz = -174.0;
  double tti_duration_s = 2.0 / 14.0 * 1.0e-3;  // 2 OFDM symbols, 15 kHz numerology
  int num_bs = 2;
  double inter_bs_distance_m = 500.0;
  std::vector<SliceConfig> slices_per_bs;  // same layout in every BS
  int max_retransmissions = 1;
  int retx_round_trip_ttis = 4;
  double shadowing_sigma_db = 8.0;
  double pathloss_fixed_db = 128.1;      // 128.1 + 37.6 log10(d_km)
  double pathloss_per_decade_db = 37.6;
  double decode_sinr_threshold_db = 0.0;
  int power_levels = 10;   // L_max
  int rb_groups = 10;      // R_max
  int decision_epoch_ttis = 10;
  int ppf_window_ttis = 100;
  double ppf_rate_floor_bps = 1.0;

  NetworkConfig() { slices_per_bs = default_slices(8.0e6, 2.0e6); }

  // Canonical slice layout: eMBB1, eMBB2, URLLC1, URLLC2 with strictly
  // increasing priority weights. Loads are per-BS aggregates split equally
  // across the slices of each type.
  static std::vector<SliceConfig> default_slices(double embb_load_total_bps,
                                                 double urllc_load_total_bps);

  double rb_bandwidth_hz() const { return subcarriers_per_rb * subcarrier_spacing_hz; }
  double max_tx_power_w() const { return dbm_to_watts(max_tx_power_dbm); }
  double min_tx_power_w() const { return dbm_to_watts(min_tx_power_dbm); }
  // Thermal noise over one RB, in watts.
  double noise_w_per_rb() const {
    return rb_bandwidth_hz() * dbm_to_watts(noise_density_dbm_hz);
  }
  int ues_per_bs() const;
  int total_ues() const { return num_bs * ues_per_bs(); }
  int num_slices() const { return static_cast<int>(slices_per_bs.size()); }
  int rbs_per_group() const { return num_rbs / rb_groups; }

  // Local device index range [begin, end) of a slice within one BS.
  int slice_device_begin(int slice) const;
  int slice_of_local_device(int local_device) const;
  int global_ue(int bs, int local_device) const { return bs * ues_per_bs() + local_device; }
  int serving_bs(int global_ue) const { return global_ue / ues_per_bs(); }
  int local_device(int global_ue) const { return global_ue % ues_per_bs(); }

  // Overwrites slice offered loads from per-BS aggregates.
  void set_embb_load_bps(double total_per_bs);
  void set_urllc_load_bps(double total_per_bs);

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

// Hyperparameters of the learning stack. All values are logged into run
// outputs so every result is reproducible from its own record.
struct TrainConfig {
  Regime regime = Regime::kFrl;
  double discount = 0.9;
  double learning_rate = 1.0e-3;
  double momentum = 0.0;
  int batch_size = 32;
  int replay_capacity = 10000;
  int target_sync_epochs = 200;
  int ttis = 5000;
  int train_steps_per_epoch = 1;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  double epsilon_decay_fraction = 0.5;  // decay over this fraction of epochs
  std::vector<int> local_hidden = {64, 64};
  std::vector<int> global_hidden = {128, 128};
  std::vector<int> crl_hidden = {128, 128};
  double global_residual_init_noise = 0.0;  // 0 = exact identity calibration at init
  bool freeze_global = false;               // diagnostic: skip theta_g updates
  double power_penalty = 0.01;              // per power level step
  double queue_norm_packets = 200.0;        // feature clamp for queue lengths

  void validate() const;
};

// Experiment grid: regimes x eMBB loads x seeds.
struct ExperimentPlan {
  std::vector<Regime> regimes = {Regime::kIrl, Regime::kCrl, Regime::kFrl};
  std::vector<double> embb_loads_bps = {4.0e6, 6.0e6, 8.0e6, 10.0e6};
  double urllc_load_bps = 2.0e6;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  int ttis_per_run = 5000;
  std::uint64_t master_seed = 1;
  double warmup_fraction = 0.1;  // excluded from delay/throughput summaries
  std::string output_dir = "out";

  int total_runs() const {
    return static_cast<int>(regimes.size() * embb_loads_bps.size() * seeds.size());
  }
  void validate() const;
};

}  // namespace oran
