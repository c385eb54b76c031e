#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "oran/harness.hpp"

using namespace oran;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const char* name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

AppConfig small_app_config() {
  AppConfig config;
  config.network.num_bs = 1;
  config.network.slices_per_bs = NetworkConfig::default_slices(2e6, 1e6);
  config.train.ttis = 60;
  config.train.batch_size = 4;
  config.train.local_hidden = {8};
  config.train.global_hidden = {8};
  config.train.crl_hidden = {8};
  config.plan.regimes = {Regime::kFrl};
  config.plan.embb_loads_bps = {2e6};
  config.plan.urllc_load_bps = 1e6;
  config.plan.seeds = {1, 2};
  config.plan.ttis_per_run = 60;
  return config;
}

}  // namespace

TEST_CASE("an empty config file resolves to the documented defaults") {
  const AppConfig config = parse_config("");
  CHECK(config.network.bandwidth_hz == 20.0e6);
  CHECK(config.network.num_rbs == 100);
  CHECK(config.network.subcarriers_per_rb == 12);
  CHECK(config.network.max_tx_power_dbm == 30.0);
  CHECK(config.network.antenna_gain_db == 15.0);
  CHECK(config.network.num_bs == 2);
  CHECK(config.network.inter_bs_distance_m == 500.0);
  CHECK(config.network.ues_per_bs() == 12);
  CHECK(config.network.max_retransmissions == 1);
  CHECK(config.network.retx_round_trip_ttis == 4);
  CHECK(config.network.shadowing_sigma_db == 8.0);
  CHECK(config.network.slices_per_bs.size() == 4);
  CHECK(config.network.slices_per_bs[0].packet_size_bytes == 32);
  CHECK(config.network.slices_per_bs[2].packet_size_bytes == 16);
  CHECK(config.network.slices_per_bs[2].traffic_model == TrafficModel::kPoisson);
  // Priority strictly increasing toward URLLC2.
  for (int s = 1; s < 4; ++s)
    CHECK(config.network.slices_per_bs[s].priority_weight >
          config.network.slices_per_bs[s - 1].priority_weight);
  CHECK(config.plan.total_runs() == 3 * 4 * 10);
  CHECK(config.train.discount == 0.9);
}

TEST_CASE("violated invariants are rejected by key name") {
  CHECK_THROWS_WITH_AS(parse_config(R"({"network": {"rb_groups": 7}})"),
                       doctest::Contains("rb_groups"), std::invalid_argument);
}

TEST_CASE("unknown keys are rejected by name") {
  CHECK_THROWS_WITH_AS(parse_config(R"({"network": {"bandwith_hz": 1e7}})"),
                       doctest::Contains("bandwith_hz"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(parse_config(R"({"color": "red"})"),
                       doctest::Contains("color"), std::invalid_argument);
}

TEST_CASE("type mismatches are rejected by name") {
  CHECK_THROWS_WITH_AS(parse_config(R"({"network": {"num_rbs": "many"}})"),
                       doctest::Contains("num_rbs"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(parse_config(R"({"train": {"discount": []}})"),
                       doctest::Contains("discount"), std::invalid_argument);
}

TEST_CASE("malformed json is rejected") {
  CHECK_THROWS_AS(parse_config("{"), std::invalid_argument);
}

TEST_CASE("emitting and reloading the defaults is stable") {
  const AppConfig defaults = parse_config("");
  const std::string emitted = emit_config(defaults);
  const AppConfig reloaded = parse_config(emitted);
  CHECK(emit_config(reloaded) == emitted);
  CHECK(reloaded.network.slices_per_bs[3].priority_weight ==
        defaults.network.slices_per_bs[3].priority_weight);
}

TEST_CASE("aggregate loads split equally across slices of the type") {
  const AppConfig config = parse_config(
      R"({"network": {"embb_load_bps": 10e6, "urllc_load_bps": 2e6}})");
  CHECK(config.network.slices_per_bs[0].offered_load_bps == doctest::Approx(5e6));
  CHECK(config.network.slices_per_bs[1].offered_load_bps == doctest::Approx(5e6));
  CHECK(config.network.slices_per_bs[2].offered_load_bps == doctest::Approx(1e6));
}

TEST_CASE("explicit slice lists are honored") {
  const AppConfig config = parse_config(R"({"network": {
    "num_bs": 1,
    "slices": [
      {"slice_type": "embb", "num_devices": 2, "priority_weight": 0.5,
       "offered_load_bps": 1e6},
      {"slice_type": "urllc", "num_devices": 1, "priority_weight": 0.7,
       "packet_size_bytes": 16, "traffic_model": "poisson",
       "offered_load_bps": 5e5, "delay_budget_s": 0.01}
    ]}})");
  CHECK(config.network.num_slices() == 2);
  CHECK(config.network.ues_per_bs() == 3);
  CHECK(config.network.slices_per_bs[1].slice_type == SliceType::kUrllc);
}

TEST_CASE("csv rows round-trip exactly") {
  std::vector<TtiRow> rows;
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    TtiRow r;
    r.tti = i;
    r.bs = static_cast<int>(rng.uniform_int(2));
    r.slice = static_cast<int>(rng.uniform_int(4));
    r.delivered_bits = static_cast<std::int64_t>(rng.uniform_int(1 << 20));
    r.completed_packets = static_cast<int>(rng.uniform_int(10));
    r.mean_delay_s = rng.uniform(0.0, 0.02);
    r.dropped = static_cast<int>(rng.uniform_int(3));
    r.queue_len = static_cast<int>(rng.uniform_int(100));
    r.power_w = rng.uniform(0.1, 1.0);
    r.action_alpha = static_cast<int>(rng.uniform_int(10));
    r.action_beta = static_cast<int>(rng.uniform_int(286));
    r.reward_alpha = rng.uniform(-1.0, 1.0);
    r.reward_beta = rng.uniform(0.0, 1.0);
    rows.push_back(r);
  }
  const fs::path dir = fresh_dir("oranslice_csv_test");
  const std::string path = (dir / "rows.csv").string();
  write_run_csv(rows, path);
  const std::vector<TtiRow> loaded = read_run_csv(path);
  REQUIRE(loaded.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(loaded[i].tti == rows[i].tti);
    CHECK(loaded[i].mean_delay_s == rows[i].mean_delay_s);  // bit-exact
    CHECK(loaded[i].power_w == rows[i].power_w);
    CHECK(loaded[i].reward_alpha == rows[i].reward_alpha);
    CHECK(loaded[i].delivered_bits == rows[i].delivered_bits);
  }
  const std::string text = slurp(path);
  CHECK(text.find("tti,bs,slice,delivered_bits") == 0);
  CHECK(text.find("\r") == std::string::npos);  // LF endings
}

TEST_CASE("summaries recomputed from the csv agree exactly") {
  AppConfig config = small_app_config();
  const fs::path dir = fresh_dir("oranslice_summary_test");
  const RunRecord record = execute_run(config.network, config.train, 3, 0.1,
                                       dir.string(), "probe");
  const std::vector<TtiRow> rows = read_run_csv(record.csv_path);
  const RunSummary recomputed =
      compute_summary(rows, record.reward_trace, record.net, 0.1);
  CHECK(recomputed == record.summary);

  const RunRecord reloaded = read_run_record(record.json_path);
  CHECK(reloaded.summary == record.summary);
  CHECK(reloaded.reward_trace == record.reward_trace);
}

TEST_CASE("identical runs produce byte-identical outputs") {
  AppConfig config = small_app_config();
  const fs::path dir1 = fresh_dir("oranslice_det_a");
  const fs::path dir2 = fresh_dir("oranslice_det_b");
  execute_run(config.network, config.train, 7, 0.1, dir1.string(), "run");
  execute_run(config.network, config.train, 7, 0.1, dir2.string(), "run");
  CHECK(slurp((dir1 / "run.csv").string()) == slurp((dir2 / "run.csv").string()));
  CHECK(slurp((dir1 / "run.json").string()) == slurp((dir2 / "run.json").string()));
}

TEST_CASE("a small sweep writes run files plus a manifest") {
  AppConfig config = small_app_config();
  const fs::path dir = fresh_dir("oranslice_sweep_test");
  config.plan.output_dir = dir.string();
  const Manifest manifest = run_experiment(config, 2);
  CHECK(manifest.runs.size() == 2);
  CHECK(fs::exists(dir / "manifest.json"));
  for (const RunRecord& r : manifest.runs) {
    CHECK(fs::exists(r.csv_path));
    CHECK(fs::exists(r.json_path));
  }
  const Manifest reloaded = read_manifest(dir.string());
  CHECK(reloaded.runs.size() == 2);
  CHECK(reloaded.master_seed == config.plan.master_seed);

  // Re-running the same plan reproduces the files byte for byte.
  const std::string csv_before = slurp(manifest.runs[0].csv_path);
  const fs::path dir2 = fresh_dir("oranslice_sweep_test2");
  AppConfig again = config;
  again.plan.output_dir = dir2.string();
  const Manifest second = run_experiment(again, 1);
  CHECK(slurp(second.runs[0].csv_path) == csv_before);
}

TEST_CASE("eccdf counts strictly-greater fractions") {
  const auto curve = eccdf({1.0, 2.0, 3.0});
  REQUIRE(curve.size() == 3);
  CHECK(curve[0] == std::pair<double, double>{1.0, 2.0 / 3.0});
  CHECK(curve[1] == std::pair<double, double>{2.0, 1.0 / 3.0});
  CHECK(curve[2] == std::pair<double, double>{3.0, 0.0});
}

TEST_CASE("eccdf of identical samples is a single zero point") {
  const auto curve = eccdf({5.0, 5.0, 5.0});
  REQUIRE(curve.size() == 1);
  CHECK(curve[0] == std::pair<double, double>{5.0, 0.0});
}

TEST_CASE("eccdf rejects empty input") { CHECK_THROWS(eccdf({})); }

TEST_CASE("eccdf of uniform draws tracks one minus x") {
  Rng rng(123);
  std::vector<double> samples(1000);
  for (double& s : samples) s = rng.uniform();
  const auto curve = eccdf(samples);
  CHECK(curve.front().second >= (samples.size() - 1.0) / samples.size() - 1e-12);
  CHECK(curve.front().second < 1.0);
  double previous = 1.0;
  for (const auto& [x, frac] : curve) {
    CHECK(frac <= previous);
    previous = frac;
    CHECK(std::abs(frac - (1.0 - x)) < 0.05);
  }
}

TEST_CASE("summarize averages per cell with the n-minus-one estimator") {
  RunRecord a, b;
  a.regime = b.regime = Regime::kFrl;
  a.embb_load_bps = b.embb_load_bps = 8e6;
  a.summary.urllc_mean_delay_s = 4.0;
  b.summary.urllc_mean_delay_s = 6.0;
  a.summary.embb_throughput_bps = 1e6;
  b.summary.embb_throughput_bps = 3e6;
  const auto cells = summarize({a, b});
  REQUIRE(cells.size() == 1);
  CHECK(cells[0].num_runs == 2);
  CHECK(cells[0].delay_mean_s == doctest::Approx(5.0));
  CHECK(cells[0].delay_std_s == doctest::Approx(std::sqrt(2.0)));
  CHECK(cells[0].throughput_mean_bps == doctest::Approx(2e6));

  const auto single = summarize({a});
  CHECK(single[0].delay_mean_s == doctest::Approx(4.0));
  CHECK(single[0].delay_std_s == 0.0);
}

TEST_CASE("frl improvements are measured against the irl cell") {
  RunRecord irl, frl;
  irl.regime = Regime::kIrl;
  frl.regime = Regime::kFrl;
  irl.embb_load_bps = frl.embb_load_bps = 10e6;
  irl.summary.urllc_mean_delay_s = 3e-3;
  frl.summary.urllc_mean_delay_s = 2e-3;
  irl.summary.embb_throughput_bps = 9e6;
  frl.summary.embb_throughput_bps = 9.9e6;
  const auto cells = summarize({irl, frl});
  REQUIRE(cells.size() == 2);
  const SummaryCell& f = cells[1];
  CHECK(f.regime == Regime::kFrl);
  CHECK(f.delay_improvement_vs_irl == doctest::Approx(1.0 / 3.0));
  CHECK(f.throughput_improvement_vs_irl == doctest::Approx(0.1));
  CHECK(cells[0].delay_improvement_vs_irl == doctest::Approx(0.0));
}

TEST_CASE("report verifies, summarizes and writes eccdf curves") {
  AppConfig config = small_app_config();
  const fs::path dir = fresh_dir("oranslice_report_test");
  config.plan.output_dir = dir.string();
  run_experiment(config, 2);
  const auto cells = report(dir.string());
  CHECK(cells.size() == 1);
  CHECK(fs::exists(dir / "summary.csv"));
  CHECK(fs::exists(dir / "summary.txt"));
  CHECK(fs::exists(dir / "eccdf_frl_embb2000000.csv"));
  const std::string table = summary_table_text(cells);
  CHECK(table.find("frl") != std::string::npos);

  // Tampering with a CSV must be caught by the recompute check.
  std::ofstream tamper(dir / "run_frl_embb2000000_seed1.csv",
                       std::ios::binary | std::ios::app);
  tamper << "999,0,0,64,1,0.001,0,0,1,0,0,0,0\n";
  tamper.close();
  CHECK_THROWS(report(dir.string()));
}

TEST_CASE("the built-in selftest passes") {
  std::stringstream out;
  CHECK(run_selftest(out));
}
