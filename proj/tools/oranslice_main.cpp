// oranslice - O-RAN slicing simulator with federated DQN xAPP coordination.
//
// Subcommands:
//   run      one training run, writes <out>/<stem>.csv and .json
//   sweep    full experiment grid (regimes x eMBB loads x seeds) + manifest
//   report   summaries and ECCDF curves from a sweep output directory
//   selftest built-in oracle suite

#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "oran/harness.hpp"

namespace {

oran::AppConfig load_or_default(const std::string& config_path) {
  if (config_path.empty()) return oran::AppConfig{};
  return oran::load_config(config_path);
}

std::string default_run_stem(const oran::TrainConfig& train, double embb_load,
                             std::uint64_t seed) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "run_%s_embb%.0f_seed%llu",
                oran::to_string(train.regime).c_str(), embb_load,
                static_cast<unsigned long long>(seed));
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"O-RAN slicing simulator with federated DQN xAPP coordination"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::string regime;
  std::uint64_t seed = 1;
  double embb_load = -1.0;
  int ttis = -1;
  int jobs = 1;

  CLI::App* run = app.add_subcommand("run", "Execute one training run");
  run->add_option("--config", config_path, "JSON configuration file");
  run->add_option("--regime", regime, "irl, crl or frl (default: config)");
  run->add_option("--seed", seed, "run seed")->capture_default_str();
  run->add_option("--embb-load", embb_load, "per-BS aggregate eMBB load in bps");
  run->add_option("--ttis", ttis, "TTIs to simulate");
  run->add_option("--out", out_dir, "output directory")->capture_default_str();

  CLI::App* sweep = app.add_subcommand("sweep", "Execute the full experiment plan");
  sweep->add_option("--config", config_path, "JSON configuration file");
  sweep->add_option("--out", out_dir, "output directory (overrides plan)");
  sweep->add_option("--jobs", jobs, "worker threads")->capture_default_str();

  CLI::App* rep = app.add_subcommand("report", "Summarize a sweep output directory");
  rep->add_option("--out", out_dir, "sweep output directory")->required();

  CLI::App* selftest = app.add_subcommand("selftest", "Run the built-in oracle suite");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      oran::AppConfig config = load_or_default(config_path);
      if (!regime.empty()) config.train.regime = oran::regime_from_string(regime);
      if (embb_load >= 0.0) config.network.set_embb_load_bps(embb_load);
      config.network.set_urllc_load_bps(config.plan.urllc_load_bps);
      if (ttis > 0) config.train.ttis = ttis;
      config.network.validate();
      config.train.validate();

      double load = 0.0;
      for (const auto& s : config.network.slices_per_bs)
        if (s.slice_type == oran::SliceType::kEmbb) load += s.offered_load_bps;
      const std::string stem = default_run_stem(config.train, load, seed);
      const oran::RunRecord record =
          oran::execute_run(config.network, config.train, seed,
                            config.plan.warmup_fraction, out_dir, stem);
      std::printf("wrote %s\n", record.csv_path.c_str());
      std::printf("wrote %s\n", record.json_path.c_str());
      std::printf("urllc mean delay: %.4f ms\n", record.summary.urllc_mean_delay_s * 1e3);
      std::printf("embb throughput:  %.3f Mbps\n", record.summary.embb_throughput_bps / 1e6);
      std::printf("final reward:     %.4f\n", record.summary.final_reward);
      return 0;
    }
    if (sweep->parsed()) {
      oran::AppConfig config = load_or_default(config_path);
      if (sweep->count("--out") > 0) config.plan.output_dir = out_dir;
      const oran::Manifest manifest = oran::run_experiment(config, jobs);
      std::printf("completed %zu runs into %s\n", manifest.runs.size(),
                  config.plan.output_dir.c_str());
      return 0;
    }
    if (rep->parsed()) {
      const auto cells = oran::report(out_dir);
      std::fputs(oran::summary_table_text(cells).c_str(), stdout);
      return 0;
    }
    if (selftest->parsed()) {
      return oran::run_selftest(std::cout) ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
