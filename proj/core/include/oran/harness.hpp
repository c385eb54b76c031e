#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "oran/config.hpp"
#include "oran/federation.hpp"

namespace oran {

struct AppConfig {
  NetworkConfig network;
  TrainConfig train;
  ExperimentPlan plan;
};

// Structured-text (JSON) configuration. Every omitted key takes the
// documented default; unknown keys, type mismatches and violated invariants
// are rejected with a message naming the key. An empty file yields the full
// default configuration.
AppConfig load_config(const std::string& path);
AppConfig parse_config(const std::string& text);
std::string emit_config(const AppConfig& config);  // resolved, reload-stable

// Post-warm-up scalar summary of one run; recomputable exactly from the
// run's CSV rows and reward trace.
struct RunSummary {
  double urllc_mean_delay_s = 0.0;   // completed packets only
  double embb_throughput_bps = 0.0;  // network aggregate
  std::int64_t urllc_dropped = 0;
  std::int64_t embb_dropped = 0;
  std::int64_t urllc_completed = 0;
  double final_reward = 0.0;  // mean total reward, last 10% of epochs
  double mean_reward = 0.0;

  bool operator==(const RunSummary&) const = default;
};

RunSummary compute_summary(const std::vector<TtiRow>& rows,
                           const std::vector<double>& reward_trace,
                           const NetworkConfig& net, double warmup_fraction);

struct RunRecord {
  Regime regime = Regime::kFrl;
  double embb_load_bps = 0.0;
  double urllc_load_bps = 0.0;
  std::uint64_t seed = 0;
  double warmup_fraction = 0.1;
  NetworkConfig net;
  TrainConfig train;
  RunSummary summary;
  std::vector<double> reward_trace;
  std::vector<double> urllc_delay_samples;
  std::string csv_path;
  std::string json_path;
};

// CSV schema, fixed order, header mandatory:
// tti,bs,slice,delivered_bits,completed_packets,mean_delay_s,dropped,
// queue_len,power_w,action_alpha,action_beta,reward_alpha,reward_beta
void write_run_csv(const std::vector<TtiRow>& rows, const std::string& path);
std::vector<TtiRow> read_run_csv(const std::string& path);

// Executes one run end to end and writes <stem>.csv and <stem>.json.
RunRecord execute_run(const NetworkConfig& net, const TrainConfig& train,
                      std::uint64_t seed, double warmup_fraction,
                      const std::string& out_dir, const std::string& stem);

RunRecord read_run_record(const std::string& json_path);

struct Manifest {
  std::uint64_t master_seed = 0;
  std::vector<RunRecord> runs;  // csv/json paths populated
};

// Cartesian product regimes x loads x seeds. Each plan seed entry maps to a
// derived run seed (derive_seed(master, kRunSeed, entry)); all regimes and
// loads share the derived seed so comparisons are paired. Runs may execute
// on `jobs` worker threads; outputs are deterministic regardless.
Manifest run_experiment(const AppConfig& config, int jobs = 1);

Manifest read_manifest(const std::string& out_dir);

// Empirical complementary CDF evaluated at the sorted unique sample values;
// fraction strictly greater than the threshold. Throws on empty input.
std::vector<std::pair<double, double>> eccdf(const std::vector<double>& samples);

struct SummaryCell {
  Regime regime = Regime::kFrl;
  double embb_load_bps = 0.0;
  int num_runs = 0;
  double delay_mean_s = 0.0, delay_std_s = 0.0;
  double throughput_mean_bps = 0.0, throughput_std_bps = 0.0;
  double reward_mean = 0.0, reward_std = 0.0;
  // (IRL - x) / IRL for delay, (x - IRL) / IRL for throughput; NaN when the
  // IRL cell is absent.
  double delay_improvement_vs_irl = 0.0;
  double throughput_improvement_vs_irl = 0.0;
};

// Seed-averaged statistics per (regime, load); sample standard deviation
// (n - 1 denominator, 0 for a single run).
std::vector<SummaryCell> summarize(const std::vector<RunRecord>& records);

std::string summary_table_text(const std::vector<SummaryCell>& cells);
void write_summary_csv(const std::vector<SummaryCell>& cells, const std::string& path);

// Reads a sweep output directory, verifies stored summaries against a
// recompute from the raw CSVs, and writes summary.csv, summary.txt, and one
// ECCDF file per (regime, load) cell. Throws on any mismatch.
std::vector<SummaryCell> report(const std::string& out_dir);

// Built-in oracle suite (physics, combinatorics, gradients, determinism).
// Prints one line per check; returns false if any check fails.
bool run_selftest(std::ostream& out);

}  // namespace oran
