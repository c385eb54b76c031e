#include "oran/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#include "oran/channel.hpp"
#include "oran/neural.hpp"
#include "oran/rng.hpp"
#include "oran/xapp.hpp"

namespace oran {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& key, const std::string& why) {
  throw std::invalid_argument("config: " + key + " " + why);
}

// Strict object reader: every key must be known and well-typed.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string prefix)
      : j_(j), prefix_(std::move(prefix)) {
    if (!j_.is_object()) config_error(prefix_.empty() ? "root" : prefix_, "must be an object");
  }

  bool has(const char* key) {
    return j_.contains(key);
  }

  double number(const char* key, double def) {
    consumed_.push_back(key);
    if (!j_.contains(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_number()) config_error(path(key), "must be a number");
    return v.get<double>();
  }

  int integer(const char* key, int def) {
    consumed_.push_back(key);
    if (!j_.contains(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) config_error(path(key), "must be an integer");
    return v.get<int>();
  }

  std::uint64_t unsigned64(const char* key, std::uint64_t def) {
    consumed_.push_back(key);
    if (!j_.contains(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
      config_error(path(key), "must be a nonnegative integer");
    return v.get<std::uint64_t>();
  }

  bool boolean(const char* key, bool def) {
    consumed_.push_back(key);
    if (!j_.contains(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_boolean()) config_error(path(key), "must be a boolean");
    return v.get<bool>();
  }

  std::string text(const char* key, const std::string& def) {
    consumed_.push_back(key);
    if (!j_.contains(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_string()) config_error(path(key), "must be a string");
    return v.get<std::string>();
  }

  std::vector<int> int_list(const char* key, std::vector<int> def) {
    consumed_.push_back(key);
    if (!j_.contains(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_array()) config_error(path(key), "must be an array");
    std::vector<int> out;
    for (const json& e : v) {
      if (!e.is_number_integer()) config_error(path(key), "must hold integers");
      out.push_back(e.get<int>());
    }
    return out;
  }

  std::vector<double> number_list(const char* key, std::vector<double> def) {
    consumed_.push_back(key);
    if (!j_.contains(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_array()) config_error(path(key), "must be an array");
    std::vector<double> out;
    for (const json& e : v) {
      if (!e.is_number()) config_error(path(key), "must hold numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::vector<std::uint64_t> unsigned_list(const char* key,
                                           std::vector<std::uint64_t> def) {
    consumed_.push_back(key);
    if (!j_.contains(key)) return def;
    const json& v = j_.at(key);
    if (!v.is_array()) config_error(path(key), "must be an array");
    std::vector<std::uint64_t> out;
    for (const json& e : v) {
      if (!e.is_number_integer() || e.get<std::int64_t>() < 0)
        config_error(path(key), "must hold nonnegative integers");
      out.push_back(e.get<std::uint64_t>());
    }
    return out;
  }

  const json* child(const char* key) {
    consumed_.push_back(key);
    if (!j_.contains(key)) return nullptr;
    return &j_.at(key);
  }

  // Rejects any key that no getter claimed.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (std::find(consumed_.begin(), consumed_.end(), it.key()) == consumed_.end())
        config_error(path(it.key().c_str()), "is not a recognized key");
    }
  }

 private:
  std::string path(const char* key) const {
    return prefix_.empty() ? key : prefix_ + "." + key;
  }

  const json& j_;
  std::string prefix_;
  std::vector<std::string> consumed_;
};

SliceConfig parse_slice(const json& j, const std::string& prefix) {
  SliceConfig def;
  ObjectReader r(j, prefix);
  const std::string type = r.text("slice_type", "embb");
  if (type == "embb") {
    def.slice_type = SliceType::kEmbb;
  } else if (type == "urllc") {
    def.slice_type = SliceType::kUrllc;
  } else {
    config_error(prefix + ".slice_type", "must be 'embb' or 'urllc'");
  }
  def.num_devices = r.integer("num_devices", def.num_devices);
  def.priority_weight = r.number("priority_weight", def.priority_weight);
  def.packet_size_bytes = r.integer("packet_size_bytes", def.packet_size_bytes);
  def.offered_load_bps = r.number("offered_load_bps", def.offered_load_bps);
  const std::string model = r.text("traffic_model", "cbr");
  if (model == "cbr") {
    def.traffic_model = TrafficModel::kConstantBitRate;
  } else if (model == "poisson") {
    def.traffic_model = TrafficModel::kPoisson;
  } else {
    config_error(prefix + ".traffic_model", "must be 'cbr' or 'poisson'");
  }
  def.delay_budget_s = r.number("delay_budget_s", def.delay_budget_s);
  r.finish();
  return def;
}

NetworkConfig parse_network(const json& j) {
  NetworkConfig cfg;
  ObjectReader r(j, "network");
  cfg.bandwidth_hz = r.number("bandwidth_hz", cfg.bandwidth_hz);
  cfg.num_rbs = r.integer("num_rbs", cfg.num_rbs);
  cfg.subcarriers_per_rb = r.integer("subcarriers_per_rb", cfg.subcarriers_per_rb);
  cfg.subcarrier_spacing_hz = r.number("subcarrier_spacing_hz", cfg.subcarrier_spacing_hz);
  cfg.max_tx_power_dbm = r.number("max_tx_power_dbm", cfg.max_tx_power_dbm);
  cfg.min_tx_power_dbm = r.number("min_tx_power_dbm", cfg.min_tx_power_dbm);
  cfg.antenna_gain_db = r.number("antenna_gain_db", cfg.antenna_gain_db);
  cfg.noise_density_dbm_hz = r.number("noise_density_dbm_hz", cfg.noise_density_dbm_hz);
  cfg.tti_duration_s = r.number("tti_duration_s", cfg.tti_duration_s);
  cfg.num_bs = r.integer("num_bs", cfg.num_bs);
  cfg.inter_bs_distance_m = r.number("inter_bs_distance_m", cfg.inter_bs_distance_m);
  cfg.max_retransmissions = r.integer("max_retransmissions", cfg.max_retransmissions);
  cfg.retx_round_trip_ttis = r.integer("retx_round_trip_ttis", cfg.retx_round_trip_ttis);
  cfg.shadowing_sigma_db = r.number("shadowing_sigma_db", cfg.shadowing_sigma_db);
  cfg.pathloss_fixed_db = r.number("pathloss_fixed_db", cfg.pathloss_fixed_db);
  cfg.pathloss_per_decade_db = r.number("pathloss_per_decade_db", cfg.pathloss_per_decade_db);
  cfg.decode_sinr_threshold_db =
      r.number("decode_sinr_threshold_db", cfg.decode_sinr_threshold_db);
  cfg.power_levels = r.integer("power_levels", cfg.power_levels);
  cfg.rb_groups = r.integer("rb_groups", cfg.rb_groups);
  cfg.decision_epoch_ttis = r.integer("decision_epoch_ttis", cfg.decision_epoch_ttis);
  cfg.ppf_window_ttis = r.integer("ppf_window_ttis", cfg.ppf_window_ttis);
  cfg.ppf_rate_floor_bps = r.number("ppf_rate_floor_bps", cfg.ppf_rate_floor_bps);

  if (const json* slices = r.child("slices")) {
    if (!slices->is_array() || slices->empty())
      config_error("network.slices", "must be a nonempty array");
    cfg.slices_per_bs.clear();
    for (std::size_t i = 0; i < slices->size(); ++i)
      cfg.slices_per_bs.push_back(parse_slice(
          (*slices)[i], "network.slices[" + std::to_string(i) + "]"));
  }
  // Aggregate per-BS loads, split equally across the slices of each type.
  if (r.has("embb_load_bps")) cfg.set_embb_load_bps(r.number("embb_load_bps", 0.0));
  else r.number("embb_load_bps", 0.0);
  if (r.has("urllc_load_bps")) cfg.set_urllc_load_bps(r.number("urllc_load_bps", 0.0));
  else r.number("urllc_load_bps", 0.0);
  r.finish();
  return cfg;
}

TrainConfig parse_train(const json& j) {
  TrainConfig cfg;
  ObjectReader r(j, "train");
  cfg.regime = regime_from_string(r.text("regime", to_string(cfg.regime)));
  cfg.discount = r.number("discount", cfg.discount);
  cfg.learning_rate = r.number("learning_rate", cfg.learning_rate);
  cfg.momentum = r.number("momentum", cfg.momentum);
  cfg.batch_size = r.integer("batch_size", cfg.batch_size);
  cfg.replay_capacity = r.integer("replay_capacity", cfg.replay_capacity);
  cfg.target_sync_epochs = r.integer("target_sync_epochs", cfg.target_sync_epochs);
  cfg.ttis = r.integer("ttis", cfg.ttis);
  cfg.train_steps_per_epoch = r.integer("train_steps_per_epoch", cfg.train_steps_per_epoch);
  cfg.epsilon_start = r.number("epsilon_start", cfg.epsilon_start);
  cfg.epsilon_end = r.number("epsilon_end", cfg.epsilon_end);
  cfg.epsilon_decay_fraction = r.number("epsilon_decay_fraction", cfg.epsilon_decay_fraction);
  cfg.local_hidden = r.int_list("local_hidden", cfg.local_hidden);
  cfg.global_hidden = r.int_list("global_hidden", cfg.global_hidden);
  cfg.crl_hidden = r.int_list("crl_hidden", cfg.crl_hidden);
  cfg.global_residual_init_noise =
      r.number("global_residual_init_noise", cfg.global_residual_init_noise);
  cfg.freeze_global = r.boolean("freeze_global", cfg.freeze_global);
  cfg.power_penalty = r.number("power_penalty", cfg.power_penalty);
  cfg.queue_norm_packets = r.number("queue_norm_packets", cfg.queue_norm_packets);
  r.finish();
  return cfg;
}

ExperimentPlan parse_plan(const json& j) {
  ExperimentPlan plan;
  ObjectReader r(j, "plan");
  if (const json* regimes = r.child("regimes")) {
    if (!regimes->is_array()) config_error("plan.regimes", "must be an array");
    plan.regimes.clear();
    for (const json& e : *regimes) {
      if (!e.is_string()) config_error("plan.regimes", "must hold strings");
      plan.regimes.push_back(regime_from_string(e.get<std::string>()));
    }
  }
  plan.embb_loads_bps = r.number_list("embb_loads_bps", plan.embb_loads_bps);
  plan.urllc_load_bps = r.number("urllc_load_bps", plan.urllc_load_bps);
  if (r.has("num_seeds")) {
    const int n = r.integer("num_seeds", 0);
    if (n <= 0) config_error("plan.num_seeds", "must be positive");
    plan.seeds.clear();
    for (int i = 1; i <= n; ++i) plan.seeds.push_back(i);
  } else {
    r.integer("num_seeds", 0);
  }
  plan.seeds = r.unsigned_list("seeds", plan.seeds);
  plan.ttis_per_run = r.integer("ttis_per_run", plan.ttis_per_run);
  plan.master_seed = r.unsigned64("master_seed", plan.master_seed);
  plan.warmup_fraction = r.number("warmup_fraction", plan.warmup_fraction);
  plan.output_dir = r.text("output_dir", plan.output_dir);
  r.finish();
  return plan;
}

json slice_to_json(const SliceConfig& s) {
  json j;
  j["slice_type"] = to_string(s.slice_type);
  j["num_devices"] = s.num_devices;
  j["priority_weight"] = s.priority_weight;
  j["packet_size_bytes"] = s.packet_size_bytes;
  j["offered_load_bps"] = s.offered_load_bps;
  j["traffic_model"] = to_string(s.traffic_model);
  j["delay_budget_s"] = s.delay_budget_s;
  return j;
}

json network_to_json(const NetworkConfig& cfg) {
  json j;
  j["bandwidth_hz"] = cfg.bandwidth_hz;
  j["num_rbs"] = cfg.num_rbs;
  j["subcarriers_per_rb"] = cfg.subcarriers_per_rb;
  j["subcarrier_spacing_hz"] = cfg.subcarrier_spacing_hz;
  j["max_tx_power_dbm"] = cfg.max_tx_power_dbm;
  j["min_tx_power_dbm"] = cfg.min_tx_power_dbm;
  j["antenna_gain_db"] = cfg.antenna_gain_db;
  j["noise_density_dbm_hz"] = cfg.noise_density_dbm_hz;
  j["tti_duration_s"] = cfg.tti_duration_s;
  j["num_bs"] = cfg.num_bs;
  j["inter_bs_distance_m"] = cfg.inter_bs_distance_m;
  j["max_retransmissions"] = cfg.max_retransmissions;
  j["retx_round_trip_ttis"] = cfg.retx_round_trip_ttis;
  j["shadowing_sigma_db"] = cfg.shadowing_sigma_db;
  j["pathloss_fixed_db"] = cfg.pathloss_fixed_db;
  j["pathloss_per_decade_db"] = cfg.pathloss_per_decade_db;
  j["decode_sinr_threshold_db"] = cfg.decode_sinr_threshold_db;
  j["power_levels"] = cfg.power_levels;
  j["rb_groups"] = cfg.rb_groups;
  j["decision_epoch_ttis"] = cfg.decision_epoch_ttis;
  j["ppf_window_ttis"] = cfg.ppf_window_ttis;
  j["ppf_rate_floor_bps"] = cfg.ppf_rate_floor_bps;
  j["slices"] = json::array();
  for (const SliceConfig& s : cfg.slices_per_bs) j["slices"].push_back(slice_to_json(s));
  return j;
}

json train_to_json(const TrainConfig& cfg) {
  json j;
  j["regime"] = to_string(cfg.regime);
  j["discount"] = cfg.discount;
  j["learning_rate"] = cfg.learning_rate;
  j["momentum"] = cfg.momentum;
  j["batch_size"] = cfg.batch_size;
  j["replay_capacity"] = cfg.replay_capacity;
  j["target_sync_epochs"] = cfg.target_sync_epochs;
  j["ttis"] = cfg.ttis;
  j["train_steps_per_epoch"] = cfg.train_steps_per_epoch;
  j["epsilon_start"] = cfg.epsilon_start;
  j["epsilon_end"] = cfg.epsilon_end;
  j["epsilon_decay_fraction"] = cfg.epsilon_decay_fraction;
  j["local_hidden"] = cfg.local_hidden;
  j["global_hidden"] = cfg.global_hidden;
  j["crl_hidden"] = cfg.crl_hidden;
  j["global_residual_init_noise"] = cfg.global_residual_init_noise;
  j["freeze_global"] = cfg.freeze_global;
  j["power_penalty"] = cfg.power_penalty;
  j["queue_norm_packets"] = cfg.queue_norm_packets;
  return j;
}

json plan_to_json(const ExperimentPlan& plan) {
  json j;
  j["regimes"] = json::array();
  for (Regime r : plan.regimes) j["regimes"].push_back(to_string(r));
  j["embb_loads_bps"] = plan.embb_loads_bps;
  j["urllc_load_bps"] = plan.urllc_load_bps;
  j["seeds"] = plan.seeds;
  j["ttis_per_run"] = plan.ttis_per_run;
  j["master_seed"] = plan.master_seed;
  j["warmup_fraction"] = plan.warmup_fraction;
  j["output_dir"] = plan.output_dir;
  return j;
}

double embb_load_of(const NetworkConfig& net) {
  double total = 0.0;
  for (const SliceConfig& s : net.slices_per_bs)
    if (s.slice_type == SliceType::kEmbb) total += s.offered_load_bps;
  return total;
}

double urllc_load_of(const NetworkConfig& net) {
  double total = 0.0;
  for (const SliceConfig& s : net.slices_per_bs)
    if (s.slice_type == SliceType::kUrllc) total += s.offered_load_bps;
  return total;
}

}  // namespace

AppConfig parse_config(const std::string& text) {
  AppConfig config;
  std::string trimmed = text;
  trimmed.erase(0, trimmed.find_first_not_of(" \t\r\n"));
  if (!trimmed.empty()) {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw std::invalid_argument(std::string("config: malformed JSON: ") + e.what());
    }
    ObjectReader root(j, "");
    if (const json* network = root.child("network")) config.network = parse_network(*network);
    if (const json* train = root.child("train")) config.train = parse_train(*train);
    if (const json* plan = root.child("plan")) config.plan = parse_plan(*plan);
    root.finish();
  }
  config.network.validate();
  config.train.validate();
  config.plan.validate();
  return config;
}

AppConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string emit_config(const AppConfig& config) {
  json j;
  j["network"] = network_to_json(config.network);
  j["train"] = train_to_json(config.train);
  j["plan"] = plan_to_json(config.plan);
  return j.dump(2) + "\n";
}

RunSummary compute_summary(const std::vector<TtiRow>& rows,
                           const std::vector<double>& reward_trace,
                           const NetworkConfig& net, double warmup_fraction) {
  RunSummary s;
  if (!rows.empty()) {
    const std::int64_t total_ttis = rows.back().tti + 1;
    const std::int64_t warmup_ttis =
        static_cast<std::int64_t>(std::floor(total_ttis * warmup_fraction));
    double delay_weighted_sum = 0.0;
    std::int64_t embb_bits = 0;
    for (const TtiRow& row : rows) {
      if (row.tti < warmup_ttis) continue;
      const bool urllc =
          net.slices_per_bs[row.slice].slice_type == SliceType::kUrllc;
      if (urllc) {
        delay_weighted_sum += row.mean_delay_s * row.completed_packets;
        s.urllc_completed += row.completed_packets;
        s.urllc_dropped += row.dropped;
      } else {
        embb_bits += row.delivered_bits;
        s.embb_dropped += row.dropped;
      }
    }
    if (s.urllc_completed > 0)
      s.urllc_mean_delay_s = delay_weighted_sum / static_cast<double>(s.urllc_completed);
    const double measured_s = (total_ttis - warmup_ttis) * net.tti_duration_s;
    if (measured_s > 0.0)
      s.embb_throughput_bps = static_cast<double>(embb_bits) / measured_s;
  }
  if (!reward_trace.empty()) {
    const std::size_t n = reward_trace.size();
    const std::size_t tail =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(n * 0.1)));
    double tail_sum = 0.0;
    for (std::size_t i = n - tail; i < n; ++i) tail_sum += reward_trace[i];
    s.final_reward = tail_sum / static_cast<double>(tail);
    double sum = 0.0;
    for (double r : reward_trace) sum += r;
    s.mean_reward = sum / static_cast<double>(n);
  }
  return s;
}

void write_run_csv(const std::vector<TtiRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "tti,bs,slice,delivered_bits,completed_packets,mean_delay_s,dropped,"
         "queue_len,power_w,action_alpha,action_beta,reward_alpha,reward_beta\n";
  char line[512];
  for (const TtiRow& r : rows) {
    std::snprintf(line, sizeof(line),
                  "%lld,%d,%d,%lld,%d,%.17g,%d,%d,%.17g,%d,%d,%.17g,%.17g\n",
                  static_cast<long long>(r.tti), r.bs, r.slice,
                  static_cast<long long>(r.delivered_bits), r.completed_packets,
                  r.mean_delay_s, r.dropped, r.queue_len, r.power_w,
                  r.action_alpha, r.action_beta, r.reward_alpha, r.reward_beta);
    out << line;
  }
}

namespace {

double parse_double_field(const std::string& field, const std::string& path) {
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw std::runtime_error(path + ": bad numeric field '" + field + "'");
  return value;
}

std::int64_t parse_int_field(const std::string& field, const std::string& path) {
  std::int64_t value = 0;
  const auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw std::runtime_error(path + ": bad integer field '" + field + "'");
  return value;
}

}  // namespace

std::vector<TtiRow> read_run_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  std::vector<TtiRow> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      fields.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 13)
      throw std::runtime_error(path + ": expected 13 fields, got " +
                               std::to_string(fields.size()));
    TtiRow r;
    r.tti = parse_int_field(fields[0], path);
    r.bs = static_cast<int>(parse_int_field(fields[1], path));
    r.slice = static_cast<int>(parse_int_field(fields[2], path));
    r.delivered_bits = parse_int_field(fields[3], path);
    r.completed_packets = static_cast<int>(parse_int_field(fields[4], path));
    r.mean_delay_s = parse_double_field(fields[5], path);
    r.dropped = static_cast<int>(parse_int_field(fields[6], path));
    r.queue_len = static_cast<int>(parse_int_field(fields[7], path));
    r.power_w = parse_double_field(fields[8], path);
    r.action_alpha = static_cast<int>(parse_int_field(fields[9], path));
    r.action_beta = static_cast<int>(parse_int_field(fields[10], path));
    r.reward_alpha = parse_double_field(fields[11], path);
    r.reward_beta = parse_double_field(fields[12], path);
    rows.push_back(r);
  }
  return rows;
}

namespace {

json summary_to_json(const RunSummary& s) {
  json j;
  j["urllc_mean_delay_s"] = s.urllc_mean_delay_s;
  j["embb_throughput_bps"] = s.embb_throughput_bps;
  j["urllc_dropped"] = s.urllc_dropped;
  j["embb_dropped"] = s.embb_dropped;
  j["urllc_completed"] = s.urllc_completed;
  j["final_reward"] = s.final_reward;
  j["mean_reward"] = s.mean_reward;
  return j;
}

RunSummary summary_from_json(const json& j) {
  RunSummary s;
  s.urllc_mean_delay_s = j.at("urllc_mean_delay_s").get<double>();
  s.embb_throughput_bps = j.at("embb_throughput_bps").get<double>();
  s.urllc_dropped = j.at("urllc_dropped").get<std::int64_t>();
  s.embb_dropped = j.at("embb_dropped").get<std::int64_t>();
  s.urllc_completed = j.at("urllc_completed").get<std::int64_t>();
  s.final_reward = j.at("final_reward").get<double>();
  s.mean_reward = j.at("mean_reward").get<double>();
  return s;
}

}  // namespace

RunRecord execute_run(const NetworkConfig& net, const TrainConfig& train,
                      std::uint64_t seed, double warmup_fraction,
                      const std::string& out_dir, const std::string& stem) {
  RunOptions options;
  options.warmup_fraction = warmup_fraction;
  const RunData data = run_training(net, train, seed, options);

  RunRecord record;
  record.regime = train.regime;
  record.embb_load_bps = embb_load_of(net);
  record.urllc_load_bps = urllc_load_of(net);
  record.seed = seed;
  record.warmup_fraction = warmup_fraction;
  record.net = net;
  record.train = train;
  for (const EpochRecord& e : data.epochs)
    record.reward_trace.push_back(e.total_reward());
  record.urllc_delay_samples = data.urllc_delay_samples;
  record.summary = compute_summary(data.rows, record.reward_trace, net, warmup_fraction);

  fs::create_directories(out_dir);
  record.csv_path = (fs::path(out_dir) / (stem + ".csv")).string();
  record.json_path = (fs::path(out_dir) / (stem + ".json")).string();
  write_run_csv(data.rows, record.csv_path);

  json j;
  j["regime"] = to_string(record.regime);
  j["embb_load_bps"] = record.embb_load_bps;
  j["urllc_load_bps"] = record.urllc_load_bps;
  j["seed"] = record.seed;
  j["warmup_fraction"] = record.warmup_fraction;
  j["config"]["network"] = network_to_json(net);
  j["config"]["train"] = train_to_json(train);
  j["summary"] = summary_to_json(record.summary);
  j["reward_trace"] = record.reward_trace;
  j["urllc_delay_samples"] = record.urllc_delay_samples;
  std::ofstream out(record.json_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + record.json_path + " for writing");
  out << j.dump(2) << "\n";
  return record;
}

RunRecord read_run_record(const std::string& json_path) {
  std::ifstream in(json_path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + json_path);
  json j = json::parse(in);
  RunRecord record;
  record.regime = regime_from_string(j.at("regime").get<std::string>());
  record.embb_load_bps = j.at("embb_load_bps").get<double>();
  record.urllc_load_bps = j.at("urllc_load_bps").get<double>();
  record.seed = j.at("seed").get<std::uint64_t>();
  record.warmup_fraction = j.at("warmup_fraction").get<double>();
  record.net = parse_network(j.at("config").at("network"));
  record.train = parse_train(j.at("config").at("train"));
  record.summary = summary_from_json(j.at("summary"));
  record.reward_trace = j.at("reward_trace").get<std::vector<double>>();
  record.urllc_delay_samples =
      j.at("urllc_delay_samples").get<std::vector<double>>();
  record.json_path = json_path;
  record.csv_path = json_path.substr(0, json_path.size() - 5) + ".csv";
  return record;
}

namespace {

std::string run_stem(Regime regime, double embb_load_bps, std::uint64_t seed_entry) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "run_%s_embb%.0f_seed%llu",
                to_string(regime).c_str(), embb_load_bps,
                static_cast<unsigned long long>(seed_entry));
  return buf;
}

}  // namespace

Manifest run_experiment(const AppConfig& config, int jobs) {
  config.network.validate();
  config.train.validate();
  config.plan.validate();
  const ExperimentPlan& plan = config.plan;

  fs::create_directories(plan.output_dir);
  {
    // Reject an unwritable output directory before any simulation starts.
    const fs::path probe = fs::path(plan.output_dir) / ".write_probe";
    std::ofstream test(probe);
    if (!test) throw std::runtime_error("output dir not writable: " + plan.output_dir);
    test.close();
    fs::remove(probe);
  }

  struct Task {
    Regime regime;
    double embb_load_bps;
    std::uint64_t seed_entry;
    std::uint64_t run_seed;
    std::string stem;
  };
  std::vector<Task> tasks;
  for (Regime regime : plan.regimes) {
    for (double load : plan.embb_loads_bps) {
      for (std::uint64_t seed_entry : plan.seeds) {
        Task t;
        t.regime = regime;
        t.embb_load_bps = load;
        t.seed_entry = seed_entry;
        // All regimes and loads share the derived seed of a plan entry, so
        // cross-regime comparisons are paired on topology and traffic.
        t.run_seed = derive_seed(plan.master_seed, StreamId::kRunSeed, seed_entry);
        t.stem = run_stem(regime, load, seed_entry);
        tasks.push_back(std::move(t));
      }
    }
  }

  std::vector<RunRecord> records(tasks.size());
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::size_t next_task = 0;
  std::mutex task_mutex;

  auto worker = [&]() {
    while (true) {
      std::size_t index;
      {
        std::lock_guard<std::mutex> lock(task_mutex);
        if (next_task >= tasks.size()) return;
        index = next_task++;
      }
      const Task& t = tasks[index];
      try {
        NetworkConfig net = config.network;
        net.set_embb_load_bps(t.embb_load_bps);
        net.set_urllc_load_bps(plan.urllc_load_bps);
        TrainConfig train = config.train;
        train.regime = t.regime;
        train.ttis = plan.ttis_per_run;
        records[index] = execute_run(net, train, t.run_seed, plan.warmup_fraction,
                                     plan.output_dir, t.stem);
        records[index].seed = t.seed_entry;  // plan entry; run seed in manifest
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };

  const int worker_count = std::max(1, std::min<int>(jobs, static_cast<int>(tasks.size())));
  std::vector<std::thread> threads;
  for (int i = 0; i < worker_count; ++i) threads.emplace_back(worker);
  for (std::thread& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);

  json manifest;
  manifest["master_seed"] = plan.master_seed;
  manifest["plan"] = plan_to_json(plan);
  manifest["runs"] = json::array();
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    json run;
    run["regime"] = to_string(tasks[i].regime);
    run["embb_load_bps"] = tasks[i].embb_load_bps;
    run["seed"] = tasks[i].seed_entry;
    run["run_seed"] = tasks[i].run_seed;
    run["csv"] = tasks[i].stem + ".csv";
    run["json"] = tasks[i].stem + ".json";
    manifest["runs"].push_back(run);
  }
  const fs::path manifest_path = fs::path(plan.output_dir) / "manifest.json";
  std::ofstream out(manifest_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + manifest_path.string());
  out << manifest.dump(2) << "\n";

  Manifest result;
  result.master_seed = plan.master_seed;
  result.runs = std::move(records);
  return result;
}

Manifest read_manifest(const std::string& out_dir) {
  const fs::path manifest_path = fs::path(out_dir) / "manifest.json";
  std::ifstream in(manifest_path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + manifest_path.string());
  json j = json::parse(in);
  Manifest m;
  m.master_seed = j.at("master_seed").get<std::uint64_t>();
  for (const json& run : j.at("runs")) {
    const std::string json_rel = run.at("json").get<std::string>();
    RunRecord record = read_run_record((fs::path(out_dir) / json_rel).string());
    record.seed = run.at("seed").get<std::uint64_t>();
    m.runs.push_back(std::move(record));
  }
  return m;
}

std::vector<std::pair<double, double>> eccdf(const std::vector<double>& samples) {
  if (samples.empty()) throw std::invalid_argument("eccdf: no samples");
  std::vector<double> sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  std::vector<std::pair<double, double>> curve;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;
    // i is the last index holding this value; fraction strictly greater.
    curve.emplace_back(sorted[i], (sorted.size() - (i + 1)) / n);
  }
  return curve;
}

namespace {

struct CellKey {
  Regime regime;
  double load;
  bool operator<(const CellKey& o) const {
    if (regime != o.regime) return static_cast<int>(regime) < static_cast<int>(o.regime);
    return load < o.load;
  }
  bool operator==(const CellKey& o) const {
    return regime == o.regime && load == o.load;
  }
};

double mean_of(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return v.empty() ? 0.0 : sum / static_cast<double>(v.size());
}

// Sample standard deviation, n - 1 denominator; 0 for n < 2.
double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mu = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - mu) * (x - mu);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

}  // namespace

std::vector<SummaryCell> summarize(const std::vector<RunRecord>& records) {
  std::vector<CellKey> keys;
  for (const RunRecord& r : records) {
    const CellKey key{r.regime, r.embb_load_bps};
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
  }
  std::sort(keys.begin(), keys.end());

  std::vector<SummaryCell> cells;
  for (const CellKey& key : keys) {
    std::vector<double> delays, tputs, rewards;
    for (const RunRecord& r : records) {
      if (!(CellKey{r.regime, r.embb_load_bps} == key)) continue;
      delays.push_back(r.summary.urllc_mean_delay_s);
      tputs.push_back(r.summary.embb_throughput_bps);
      rewards.push_back(r.summary.final_reward);
    }
    SummaryCell cell;
    cell.regime = key.regime;
    cell.embb_load_bps = key.load;
    cell.num_runs = static_cast<int>(delays.size());
    cell.delay_mean_s = mean_of(delays);
    cell.delay_std_s = sample_std(delays);
    cell.throughput_mean_bps = mean_of(tputs);
    cell.throughput_std_bps = sample_std(tputs);
    cell.reward_mean = mean_of(rewards);
    cell.reward_std = sample_std(rewards);
    cells.push_back(cell);
  }

  // Relative deltas vs the IRL cell at the same load.
  for (SummaryCell& cell : cells) {
    const auto irl = std::find_if(cells.begin(), cells.end(), [&](const SummaryCell& c) {
      return c.regime == Regime::kIrl && c.embb_load_bps == cell.embb_load_bps;
    });
    if (irl == cells.end() || irl->delay_mean_s == 0.0 ||
        irl->throughput_mean_bps == 0.0) {
      cell.delay_improvement_vs_irl = std::numeric_limits<double>::quiet_NaN();
      cell.throughput_improvement_vs_irl = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    cell.delay_improvement_vs_irl =
        (irl->delay_mean_s - cell.delay_mean_s) / irl->delay_mean_s;
    cell.throughput_improvement_vs_irl =
        (cell.throughput_mean_bps - irl->throughput_mean_bps) / irl->throughput_mean_bps;
  }
  return cells;
}

std::string summary_table_text(const std::vector<SummaryCell>& cells) {
  char line[256];
  std::string out;
  std::snprintf(line, sizeof(line), "%-6s %10s %4s %14s %14s %12s %12s %12s\n",
                "regime", "embb_mbps", "n", "delay_ms", "delay_std", "tput_mbps",
                "reward", "d_vs_irl");
  out += line;
  for (const SummaryCell& c : cells) {
    std::snprintf(line, sizeof(line),
                  "%-6s %10.2f %4d %14.4f %14.4f %12.3f %12.4f %11.1f%%\n",
                  to_string(c.regime).c_str(), c.embb_load_bps / 1e6, c.num_runs,
                  c.delay_mean_s * 1e3, c.delay_std_s * 1e3,
                  c.throughput_mean_bps / 1e6, c.reward_mean,
                  c.delay_improvement_vs_irl * 100.0);
    out += line;
  }
  return out;
}

void write_summary_csv(const std::vector<SummaryCell>& cells, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "regime,embb_load_bps,num_runs,urllc_delay_mean_s,urllc_delay_std_s,"
         "embb_throughput_mean_bps,embb_throughput_std_bps,final_reward_mean,"
         "final_reward_std,delay_improvement_vs_irl,throughput_improvement_vs_irl\n";
  char line[512];
  for (const SummaryCell& c : cells) {
    std::snprintf(line, sizeof(line),
                  "%s,%.17g,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  to_string(c.regime).c_str(), c.embb_load_bps, c.num_runs,
                  c.delay_mean_s, c.delay_std_s, c.throughput_mean_bps,
                  c.throughput_std_bps, c.reward_mean, c.reward_std,
                  c.delay_improvement_vs_irl, c.throughput_improvement_vs_irl);
    out << line;
  }
}

std::vector<SummaryCell> report(const std::string& out_dir) {
  const Manifest manifest = read_manifest(out_dir);

  // The stored summary must agree exactly with a recompute from raw CSVs.
  for (const RunRecord& record : manifest.runs) {
    const std::vector<TtiRow> rows = read_run_csv(record.csv_path);
    const RunSummary recomputed =
        compute_summary(rows, record.reward_trace, record.net, record.warmup_fraction);
    if (!(recomputed == record.summary))
      throw std::runtime_error("summary mismatch for " + record.csv_path +
                               " (stored summary does not match raw CSV recompute)");
  }

  const std::vector<SummaryCell> cells = summarize(manifest.runs);
  write_summary_csv(cells, (fs::path(out_dir) / "summary.csv").string());
  {
    std::ofstream out(fs::path(out_dir) / "summary.txt", std::ios::binary);
    out << summary_table_text(cells);
  }

  for (const SummaryCell& cell : cells) {
    std::vector<double> samples;
    for (const RunRecord& record : manifest.runs) {
      if (record.regime != cell.regime || record.embb_load_bps != cell.embb_load_bps)
        continue;
      samples.insert(samples.end(), record.urllc_delay_samples.begin(),
                     record.urllc_delay_samples.end());
    }
    if (samples.empty()) continue;
    char name[128];
    std::snprintf(name, sizeof(name), "eccdf_%s_embb%.0f.csv",
                  to_string(cell.regime).c_str(), cell.embb_load_bps);
    std::ofstream out(fs::path(out_dir) / name, std::ios::binary);
    out << "threshold_s,fraction_above\n";
    char line[128];
    for (const auto& [threshold, fraction] : eccdf(samples)) {
      std::snprintf(line, sizeof(line), "%.17g,%.17g\n", threshold, fraction);
      out << line;
    }
  }
  return cells;
}

bool run_selftest(std::ostream& out) {
  int failures = 0;
  const auto check = [&](const char* name, bool ok) {
    out << (ok ? "ok   " : "FAIL ") << name << "\n";
    if (!ok) ++failures;
  };
  const auto near = [](double a, double b, double rel) {
    return std::abs(a - b) <= rel * std::max({1e-300, std::abs(a), std::abs(b)});
  };

  NetworkConfig cfg;
  cfg.validate();

  // SINR against the closed form with no interferers.
  {
    NetworkConfig c = cfg;
    c.num_bs = 1;
    ChannelModel chan = ChannelModel::flat(1, c.total_ues(), 1e-10);
    RbAllocation alloc(1, c.num_rbs);
    alloc.set(0, 0, 0);
    const std::vector<double> power = {1e-2 * c.num_rbs};
    const double got = compute_sinr(alloc, power, chan, c, 0, 0, 0);
    const double expected = 1e-10 * 1e-2 / (180000.0 * std::pow(10.0, -20.4));
    check("sinr_hand_value", near(got, expected, 1e-9));
  }
  // Capacity: one RB at unit SINR is one RB bandwidth.
  {
    NetworkConfig c = cfg;
    c.num_bs = 1;
    const double noise = c.noise_w_per_rb();
    const double gain = 1.0;
    const double p_total = noise * c.num_rbs / gain;  // per-RB SINR exactly 1
    ChannelModel chan = ChannelModel::flat(1, c.total_ues(), gain);
    RbAllocation alloc(1, c.num_rbs);
    alloc.set(0, 0, 0);
    const double got = link_capacity(0, 0, alloc, {p_total}, chan, c);
    check("capacity_one_rb_unit_sinr", near(got, 180000.0, 1e-9));
  }
  // Pathloss at 1 km is the fixed term exactly.
  {
    check("pathloss_1km", near(pathloss_db(1000.0, cfg), 128.1, 1e-12));
  }
  // Composition count C(13, 3) = 286.
  {
    const auto partitions = enumerate_partitions(10, 4);
    bool ok = partitions.size() == 286;
    for (const auto& p : partitions) {
      int sum = 0;
      for (int x : p) sum += x;
      ok = ok && sum == 10;
    }
    check("partitions_10_4", ok);
  }
  // Analytic gradient vs central finite differences on a small net.
  {
    Rng rng(7);
    MlpModel model = make_mlp({4, 8, 3}, rng);
    std::vector<double> input(4);
    for (double& x : input) x = rng.uniform(-1.0, 1.0);
    const Gradients grads = backward_td(model, input, 1, 0.5);
    bool ok = true;
    const double h = 1e-5;
    for (int l = 0; l < model.num_layers() && ok; ++l) {
      for (std::size_t i = 0; i < model.weights[l].v.size(); ++i) {
        MlpModel plus = model, minus = model;
        plus.weights[l].v[i] += h;
        minus.weights[l].v[i] -= h;
        const double qp = forward(plus, input)[1];
        const double qm = forward(minus, input)[1];
        const double lp = 0.5 * (0.5 - qp) * (0.5 - qp);
        const double lm = 0.5 * (0.5 - qm) * (0.5 - qm);
        const double numeric = (lp - lm) / (2.0 * h);
        const double analytic = grads.weights[l].v[i];
        if (std::abs(numeric - analytic) >
            1e-4 * std::max(1e-6, std::abs(numeric) + std::abs(analytic))) {
          ok = false;
          break;
        }
      }
    }
    check("gradient_finite_difference", ok);
  }
  // Epsilon-greedy argmax and tie rule.
  {
    Rng rng(3);
    const bool ok = epsilon_greedy({1.0, 3.0, 2.0}, 0.0, rng) == 1 &&
                    epsilon_greedy({5.0, 5.0}, 0.0, rng) == 0;
    check("epsilon_greedy_argmax", ok);
  }
  // ECCDF counting.
  {
    const auto curve = eccdf({1.0, 2.0, 3.0});
    const bool ok = curve.size() == 3 && curve[1].first == 2.0 &&
                    near(curve[1].second, 1.0 / 3.0, 1e-12);
    check("eccdf_counting", ok);
  }
  // Determinism: identical seeds give identical reward traces.
  {
    NetworkConfig net = cfg;
    TrainConfig train;
    train.ttis = 100;
    train.regime = Regime::kFrl;
    const RunData a = run_training(net, train, 11);
    const RunData b = run_training(net, train, 11);
    bool ok = a.epochs.size() == b.epochs.size();
    for (std::size_t i = 0; ok && i < a.epochs.size(); ++i)
      ok = a.epochs[i].total_reward() == b.epochs[i].total_reward();
    check("run_determinism", ok);
  }

  out << (failures == 0 ? "selftest passed\n" : "selftest FAILED\n");
  return failures == 0;
}

}  // namespace oran
