#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "oran/config.hpp"
#include "oran/neural.hpp"
#include "oran/radio_env.hpp"
#include "oran/scheduler.hpp"
#include "oran/xapp.hpp"

namespace oran {

// One BS's federated stack: local DQNs for both xAPPs plus the global
// calibration network (input/output width |A_alpha| + |A_beta|, residual so
// a zero-initialized last layer is an exact identity calibration).
struct VfrlStack {
  MlpModel alpha, beta, global_net;
  MlpModel target_alpha, target_beta, target_global;
  int alpha_actions = 0;
  int beta_actions = 0;

  void sync_targets() {
    target_alpha = sync_target(alpha);
    target_beta = sync_target(beta);
    target_global = sync_target(global_net);
  }
};

struct IrlAgents {
  MlpModel alpha, beta;
  MlpModel target_alpha, target_beta;

  void sync_targets() {
    target_alpha = sync_target(alpha);
    target_beta = sync_target(beta);
  }
};

struct CrlAgent {
  MlpModel joint;
  MlpModel target_joint;
  int alpha_actions = 0;
  int beta_actions = 0;

  void sync_targets() { target_joint = sync_target(joint); }
};

VfrlStack build_vfrl_stack(const NetworkConfig& cfg, const TrainConfig& train,
                           Rng& rng_alpha, Rng& rng_beta, Rng& rng_global);
IrlAgents build_irl_agents(const NetworkConfig& cfg, const TrainConfig& train,
                           Rng& rng_alpha, Rng& rng_beta);
CrlAgent build_crl_agent(const NetworkConfig& cfg, const TrainConfig& train,
                         Rng& rng_joint);

// Row-major (alpha-major) joint action encoding for CRL.
inline int crl_encode(int action_alpha, int action_beta, int beta_actions) {
  return action_alpha * beta_actions + action_beta;
}
inline std::pair<int, int> crl_decode(int joint_index, int beta_actions) {
  return {joint_index / beta_actions, joint_index % beta_actions};
}

// The three-step VFRL cycle.
std::pair<std::vector<double>, std::vector<double>> local_inference(
    const VfrlStack& stack, const std::vector<double>& state_alpha,
    const std::vector<double>& state_beta);

std::vector<double> global_aggregate(const VfrlStack& stack,
                                     const std::vector<double>& q_alpha,
                                     const std::vector<double>& q_beta);

std::pair<int, int> global_inference(const std::vector<double>& q_global,
                                     const VfrlStack& stack, double epsilon,
                                     Rng& rng);

// One federated update on a replay batch: TD targets from the target copies
// of all three models, summed per-agent losses, gradients flowing through
// theta_g into both local models. Returns the mean per-transition loss.
double frl_train_step(VfrlStack& stack, const ReplayBuffer& replay,
                      const std::vector<int>& batch, double discount,
                      bool freeze_global = false);

double irl_train_step(IrlAgents& agents, const ReplayBuffer& replay,
                      const std::vector<int>& batch, double discount);

double crl_train_step(CrlAgent& agent, const ReplayBuffer& replay,
                      const std::vector<int>& batch, double discount);

// Linear decay from epsilon_start to epsilon_end over the first
// epsilon_decay_fraction of the run, then flat.
double epsilon_at(const TrainConfig& train, int epoch, int total_epochs);

// One per-TTI per-slice metrics row, the unit of the CSV output.
struct TtiRow {
  std::int64_t tti = 0;
  int bs = 0;
  int slice = 0;
  std::int64_t delivered_bits = 0;
  int completed_packets = 0;
  double mean_delay_s = 0.0;  // mean over this TTI's completed packets
  int dropped = 0;
  int queue_len = 0;
  double power_w = 0.0;
  int action_alpha = 0;
  int action_beta = 0;
  double reward_alpha = 0.0;  // of the owning decision epoch
  double reward_beta = 0.0;
};

struct EpochBsRecord {
  int action_alpha = 0;
  int action_beta = 0;
  double reward_alpha = 0.0;
  double reward_beta = 0.0;
  double loss = 0.0;
};

struct EpochRecord {
  int epoch = 0;
  double epsilon = 0.0;
  std::vector<EpochBsRecord> per_bs;

  double total_reward() const {
    double sum = 0.0;
    for (const auto& b : per_bs) sum += b.reward_alpha + b.reward_beta;
    return sum;
  }
};

struct RunData {
  NetworkConfig net;
  TrainConfig train;
  std::uint64_t seed = 0;
  double warmup_fraction = 0.1;
  std::vector<EpochRecord> epochs;
  std::vector<TtiRow> rows;
  // Completed-packet delays of URLLC slices after warm-up, for ECCDFs.
  std::vector<double> urllc_delay_samples;
  // Trained models, per BS (layout depends on the regime).
  std::vector<VfrlStack> frl_stacks;
  std::vector<IrlAgents> irl_agents;
  std::vector<CrlAgent> crl_agents;
};

struct RunOptions {
  double warmup_fraction = 0.1;
  // Diagnostic overrides; empty/null = derive everything from the run seed.
  std::vector<std::uint64_t> policy_seed_by_bs;
  const ChannelModel* channel_override = nullptr;
};

// Full training run: every decision epoch observes per-BS states, selects
// actions per regime, applies power + partition, simulates the epoch,
// computes rewards, stores the transition and trains.
RunData run_training(const NetworkConfig& net, const TrainConfig& train,
                     std::uint64_t seed, const RunOptions& options = {});

}  // namespace oran
