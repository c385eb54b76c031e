#include "oran/federation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace oran {

namespace {

std::vector<int> with_hidden(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> sizes;
  sizes.push_back(in);
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return sizes;
}

double max_of(const std::vector<double>& v, int begin, int end) {
  double m = v[begin];
  for (int i = begin + 1; i < end; ++i) m = std::max(m, v[i]);
  return m;
}

}  // namespace

VfrlStack build_vfrl_stack(const NetworkConfig& cfg, const TrainConfig& train,
                           Rng& rng_alpha, Rng& rng_beta, Rng& rng_global) {
  const PowerAgentSpec pspec = PowerAgentSpec::from(cfg, train);
  const RaAgentSpec rspec = RaAgentSpec::from(cfg, train);
  VfrlStack stack;
  stack.alpha_actions = pspec.action_space();
  stack.beta_actions = rspec.action_space();
  stack.alpha = make_mlp(
      with_hidden(pspec.state_size(cfg.num_slices()), train.local_hidden,
                  stack.alpha_actions),
      rng_alpha, train.learning_rate, train.momentum);
  stack.beta = make_mlp(
      with_hidden(rspec.state_size(), train.local_hidden, stack.beta_actions),
      rng_beta, train.learning_rate, train.momentum);
  const int width = stack.alpha_actions + stack.beta_actions;
  stack.global_net = make_mlp(with_hidden(width, train.global_hidden, width),
                              rng_global, train.learning_rate, train.momentum,
                              /*residual=*/true, /*zero_last_layer=*/true,
                              train.global_residual_init_noise);
  stack.sync_targets();
  return stack;
}

IrlAgents build_irl_agents(const NetworkConfig& cfg, const TrainConfig& train,
                           Rng& rng_alpha, Rng& rng_beta) {
  const PowerAgentSpec pspec = PowerAgentSpec::from(cfg, train);
  const RaAgentSpec rspec = RaAgentSpec::from(cfg, train);
  IrlAgents agents;
  agents.alpha = make_mlp(
      with_hidden(pspec.state_size(cfg.num_slices()), train.local_hidden,
                  pspec.action_space()),
      rng_alpha, train.learning_rate, train.momentum);
  agents.beta =
      make_mlp(with_hidden(rspec.state_size(), train.local_hidden,
                           rspec.action_space()),
               rng_beta, train.learning_rate, train.momentum);
  agents.sync_targets();
  return agents;
}

CrlAgent build_crl_agent(const NetworkConfig& cfg, const TrainConfig& train,
                         Rng& rng_joint) {
  const PowerAgentSpec pspec = PowerAgentSpec::from(cfg, train);
  const RaAgentSpec rspec = RaAgentSpec::from(cfg, train);
  CrlAgent agent;
  agent.alpha_actions = pspec.action_space();
  agent.beta_actions = rspec.action_space();
  const int joint_state =
      pspec.state_size(cfg.num_slices()) + rspec.state_size();
  agent.joint = make_mlp(
      with_hidden(joint_state, train.crl_hidden,
                  agent.alpha_actions * agent.beta_actions),
      rng_joint, train.learning_rate, train.momentum);
  agent.sync_targets();
  return agent;
}

std::pair<std::vector<double>, std::vector<double>> local_inference(
    const VfrlStack& stack, const std::vector<double>& state_alpha,
    const std::vector<double>& state_beta) {
  return {forward(stack.alpha, state_alpha), forward(stack.beta, state_beta)};
}

std::vector<double> global_aggregate(const VfrlStack& stack,
                                     const std::vector<double>& q_alpha,
                                     const std::vector<double>& q_beta) {
  if (static_cast<int>(q_alpha.size()) != stack.alpha_actions ||
      static_cast<int>(q_beta.size()) != stack.beta_actions)
    throw std::invalid_argument("global_aggregate: Q-table width mismatch");
  std::vector<double> joint;
  joint.reserve(q_alpha.size() + q_beta.size());
  joint.insert(joint.end(), q_alpha.begin(), q_alpha.end());
  joint.insert(joint.end(), q_beta.begin(), q_beta.end());
  return forward(stack.global_net, joint);
}

std::pair<int, int> global_inference(const std::vector<double>& q_global,
                                     const VfrlStack& stack, double epsilon,
                                     Rng& rng) {
  if (static_cast<int>(q_global.size()) != stack.alpha_actions + stack.beta_actions)
    throw std::invalid_argument("global_inference: Q-table width mismatch");
  const std::vector<double> q_alpha(q_global.begin(),
                                    q_global.begin() + stack.alpha_actions);
  const std::vector<double> q_beta(q_global.begin() + stack.alpha_actions,
                                   q_global.end());
  const int a = epsilon_greedy(q_alpha, epsilon, rng);
  const int b = epsilon_greedy(q_beta, epsilon, rng);
  return {a, b};
}

double frl_train_step(VfrlStack& stack, const ReplayBuffer& replay,
                      const std::vector<int>& batch, double discount,
                      bool freeze_global) {
  Gradients grads_alpha = Gradients::zeros_like(stack.alpha);
  Gradients grads_beta = Gradients::zeros_like(stack.beta);
  Gradients grads_global = Gradients::zeros_like(stack.global_net);
  const int na = stack.alpha_actions;
  const int nb = stack.beta_actions;
  double loss = 0.0;

  for (int idx : batch) {
    const Transition& t = replay.at(idx);
    // Next-state calibrated tables from the target copies.
    const std::vector<double> qa_next = forward(stack.target_alpha, t.next_state_alpha);
    const std::vector<double> qb_next = forward(stack.target_beta, t.next_state_beta);
    std::vector<double> joint_next;
    joint_next.reserve(na + nb);
    joint_next.insert(joint_next.end(), qa_next.begin(), qa_next.end());
    joint_next.insert(joint_next.end(), qb_next.begin(), qb_next.end());
    const std::vector<double> qg_next = forward(stack.target_global, joint_next);
    const double y_alpha = t.reward_alpha + discount * max_of(qg_next, 0, na);
    const double y_beta = t.reward_beta + discount * max_of(qg_next, na, na + nb);

    // Online pass through the full composition.
    const ForwardCache cache_alpha = forward_cached(stack.alpha, t.state_alpha);
    const ForwardCache cache_beta = forward_cached(stack.beta, t.state_beta);
    std::vector<double> joint;
    joint.reserve(na + nb);
    joint.insert(joint.end(), cache_alpha.output().begin(), cache_alpha.output().end());
    joint.insert(joint.end(), cache_beta.output().begin(), cache_beta.output().end());
    const ForwardCache cache_global = forward_cached(stack.global_net, joint);

    const double err_alpha = cache_global.output()[t.action_alpha] - y_alpha;
    const double err_beta = cache_global.output()[na + t.action_beta] - y_beta;
    loss += 0.5 * (err_alpha * err_alpha + err_beta * err_beta);

    std::vector<double> out_grad(na + nb, 0.0);
    out_grad[t.action_alpha] = err_alpha;
    out_grad[na + t.action_beta] = err_beta;
    const std::vector<double> in_grad =
        backward_from_output(stack.global_net, cache_global, out_grad, grads_global);
    const std::vector<double> grad_qa(in_grad.begin(), in_grad.begin() + na);
    const std::vector<double> grad_qb(in_grad.begin() + na, in_grad.end());
    backward_from_output(stack.alpha, cache_alpha, grad_qa, grads_alpha);
    backward_from_output(stack.beta, cache_beta, grad_qb, grads_beta);
  }

  const double scale = 1.0 / static_cast<double>(batch.size());
  sgd_step(stack.alpha, grads_alpha, scale);
  sgd_step(stack.beta, grads_beta, scale);
  if (!freeze_global) sgd_step(stack.global_net, grads_global, scale);
  return loss * scale;
}

double irl_train_step(IrlAgents& agents, const ReplayBuffer& replay,
                      const std::vector<int>& batch, double discount) {
  Gradients grads_alpha = Gradients::zeros_like(agents.alpha);
  Gradients grads_beta = Gradients::zeros_like(agents.beta);
  double loss = 0.0;
  for (int idx : batch) {
    const Transition& t = replay.at(idx);
    const std::vector<double> qa_next = forward(agents.target_alpha, t.next_state_alpha);
    const std::vector<double> qb_next = forward(agents.target_beta, t.next_state_beta);
    const double y_alpha =
        t.reward_alpha + discount * max_of(qa_next, 0, static_cast<int>(qa_next.size()));
    const double y_beta =
        t.reward_beta + discount * max_of(qb_next, 0, static_cast<int>(qb_next.size()));

    const ForwardCache cache_alpha = forward_cached(agents.alpha, t.state_alpha);
    const ForwardCache cache_beta = forward_cached(agents.beta, t.state_beta);
    const double err_alpha = cache_alpha.output()[t.action_alpha] - y_alpha;
    const double err_beta = cache_beta.output()[t.action_beta] - y_beta;
    loss += 0.5 * (err_alpha * err_alpha + err_beta * err_beta);

    std::vector<double> grad_a(cache_alpha.output().size(), 0.0);
    grad_a[t.action_alpha] = err_alpha;
    backward_from_output(agents.alpha, cache_alpha, grad_a, grads_alpha);
    std::vector<double> grad_b(cache_beta.output().size(), 0.0);
    grad_b[t.action_beta] = err_beta;
    backward_from_output(agents.beta, cache_beta, grad_b, grads_beta);
  }
  const double scale = 1.0 / static_cast<double>(batch.size());
  sgd_step(agents.alpha, grads_alpha, scale);
  sgd_step(agents.beta, grads_beta, scale);
  return loss * scale;
}

double crl_train_step(CrlAgent& agent, const ReplayBuffer& replay,
                      const std::vector<int>& batch, double discount) {
  Gradients grads = Gradients::zeros_like(agent.joint);
  double loss = 0.0;
  for (int idx : batch) {
    const Transition& t = replay.at(idx);
    std::vector<double> next_state = t.next_state_alpha;
    next_state.insert(next_state.end(), t.next_state_beta.begin(),
                      t.next_state_beta.end());
    const std::vector<double> q_next = forward(agent.target_joint, next_state);
    const double y = t.reward_alpha + t.reward_beta +
                     discount * max_of(q_next, 0, static_cast<int>(q_next.size()));

    std::vector<double> state = t.state_alpha;
    state.insert(state.end(), t.state_beta.begin(), t.state_beta.end());
    const ForwardCache cache = forward_cached(agent.joint, state);
    const int joint_action =
        crl_encode(t.action_alpha, t.action_beta, agent.beta_actions);
    const double err = cache.output()[joint_action] - y;
    loss += 0.5 * err * err;

    std::vector<double> grad(cache.output().size(), 0.0);
    grad[joint_action] = err;
    backward_from_output(agent.joint, cache, grad, grads);
  }
  const double scale = 1.0 / static_cast<double>(batch.size());
  sgd_step(agent.joint, grads, scale);
  return loss * scale;
}

double epsilon_at(const TrainConfig& train, int epoch, int total_epochs) {
  const int decay_epochs = static_cast<int>(
      std::floor(total_epochs * train.epsilon_decay_fraction));
  if (epoch >= decay_epochs || decay_epochs == 0) return train.epsilon_end;
  return train.epsilon_start +
         (train.epsilon_end - train.epsilon_start) *
             (static_cast<double>(epoch) / decay_epochs);
}

RunData run_training(const NetworkConfig& net, const TrainConfig& train,
                     std::uint64_t seed, const RunOptions& options) {
  net.validate();
  train.validate();

  RunData run;
  run.net = net;
  run.train = train;
  run.seed = seed;
  run.warmup_fraction = options.warmup_fraction;

  const int epoch_ttis = net.decision_epoch_ttis;
  const int total_epochs = train.ttis / epoch_ttis;
  const std::int64_t simulated_ttis =
      static_cast<std::int64_t>(total_epochs) * epoch_ttis;
  const std::int64_t warmup_ttis = static_cast<std::int64_t>(
      std::floor(simulated_ttis * options.warmup_fraction));
  const double epoch_duration_s = epoch_ttis * net.tti_duration_s;
  const int num_slices = net.num_slices();

  // Streams: one per consumer so regimes stay draw-for-draw comparable.
  Rng topo_rng = make_stream(seed, StreamId::kTopology);
  std::vector<Rng> traffic_rngs;
  std::vector<Rng> policy_rngs;
  std::vector<Rng> train_rngs;
  for (int bs = 0; bs < net.num_bs; ++bs) {
    traffic_rngs.push_back(make_stream(seed, StreamId::kTraffic, bs));
    const std::uint64_t policy_seed =
        bs < static_cast<int>(options.policy_seed_by_bs.size())
            ? options.policy_seed_by_bs[bs]
            : derive_seed(seed, StreamId::kPolicy, bs);
    policy_rngs.push_back(Rng(policy_seed));
    train_rngs.push_back(make_stream(seed, StreamId::kTraining, bs));
  }

  const ChannelModel chan = options.channel_override != nullptr
                                ? *options.channel_override
                                : build_topology(net, topo_rng);
  CellState state(net);
  TrafficGenerator traffic(net);
  PpfState ppf(net.total_ues(), net.ppf_window_ttis, net.tti_duration_s);

  const PowerAgentSpec pspec = PowerAgentSpec::from(net, train);
  const RaAgentSpec rspec = RaAgentSpec::from(net, train);

  // Per-BS model stacks for the selected regime. Init streams are keyed by
  // (bs, role) so alpha/beta weights agree across regimes for a given seed.
  std::vector<ReplayBuffer> replays;
  for (int bs = 0; bs < net.num_bs; ++bs) {
    Rng rng_alpha = make_stream(seed, StreamId::kInit, bs, 0);
    Rng rng_beta = make_stream(seed, StreamId::kInit, bs, 1);
    Rng rng_global = make_stream(seed, StreamId::kInit, bs, 2);
    Rng rng_joint = make_stream(seed, StreamId::kInit, bs, 3);
    switch (train.regime) {
      case Regime::kFrl:
        run.frl_stacks.push_back(
            build_vfrl_stack(net, train, rng_alpha, rng_beta, rng_global));
        break;
      case Regime::kIrl:
        run.irl_agents.push_back(build_irl_agents(net, train, rng_alpha, rng_beta));
        break;
      case Regime::kCrl:
        run.crl_agents.push_back(build_crl_agent(net, train, rng_joint));
        break;
    }
    replays.emplace_back(train.replay_capacity);
  }

  std::vector<std::vector<SliceEpochMetrics>> prev_metrics(
      net.num_bs, std::vector<SliceEpochMetrics>(num_slices));
  std::vector<std::vector<double>> state_alpha(net.num_bs);
  std::vector<std::vector<double>> state_beta(net.num_bs);
  std::vector<int> train_steps(net.num_bs, 0);

  run.rows.reserve(static_cast<std::size_t>(simulated_ttis) * net.num_bs * num_slices);

  std::vector<int> actions_alpha(net.num_bs, 0);
  std::vector<int> actions_beta(net.num_bs, 0);
  std::vector<std::vector<int>> partitions(net.num_bs);

  for (int epoch = 0; epoch < total_epochs; ++epoch) {
    const double eps = epsilon_at(train, epoch, total_epochs);

    for (int bs = 0; bs < net.num_bs; ++bs) {
      state_alpha[bs] = observe_power_state(prev_metrics[bs], state.tx_power_w(bs),
                                            net, pspec);
      state_beta[bs] = observe_ra_state(prev_metrics[bs], net, rspec);
    }

    for (int bs = 0; bs < net.num_bs; ++bs) {
      switch (train.regime) {
        case Regime::kFrl: {
          const auto [qa, qb] =
              local_inference(run.frl_stacks[bs], state_alpha[bs], state_beta[bs]);
          const std::vector<double> qg =
              global_aggregate(run.frl_stacks[bs], qa, qb);
          const auto [a, b] =
              global_inference(qg, run.frl_stacks[bs], eps, policy_rngs[bs]);
          actions_alpha[bs] = a;
          actions_beta[bs] = b;
          break;
        }
        case Regime::kIrl: {
          const std::vector<double> qa =
              forward(run.irl_agents[bs].alpha, state_alpha[bs]);
          const std::vector<double> qb =
              forward(run.irl_agents[bs].beta, state_beta[bs]);
          actions_alpha[bs] = epsilon_greedy(qa, eps, policy_rngs[bs]);
          actions_beta[bs] = epsilon_greedy(qb, eps, policy_rngs[bs]);
          break;
        }
        case Regime::kCrl: {
          std::vector<double> joint_state = state_alpha[bs];
          joint_state.insert(joint_state.end(), state_beta[bs].begin(),
                             state_beta[bs].end());
          const std::vector<double> q = forward(run.crl_agents[bs].joint, joint_state);
          const int joint = epsilon_greedy(q, eps, policy_rngs[bs]);
          const auto [a, b] = crl_decode(joint, run.crl_agents[bs].beta_actions);
          actions_alpha[bs] = a;
          actions_beta[bs] = b;
          break;
        }
      }
      state.set_tx_power_w(bs, decode_power_action(actions_alpha[bs], pspec, net));
      partitions[bs] = rspec.actions[actions_beta[bs]];
    }

    // Simulate the epoch.
    EpochAccumulator acc(net.num_bs, num_slices);
    const std::size_t epoch_row_begin = run.rows.size();
    std::vector<double> power(net.num_bs);
    for (int bs = 0; bs < net.num_bs; ++bs) power[bs] = state.tx_power_w(bs);

    for (int t = 0; t < epoch_ttis; ++t) {
      const std::int64_t tti = static_cast<std::int64_t>(epoch) * epoch_ttis + t;
      state.release_due_retx(tti);
      RbAllocation alloc(net.num_bs, net.num_rbs);
      for (int bs = 0; bs < net.num_bs; ++bs)
        allocate_intra_slice(partitions[bs], bs, state, ppf, power, chan, net, alloc);
      const TtiReport report =
          step_tti(state, traffic, alloc, chan, net, traffic_rngs, tti);
      update_avg_rate(ppf, report);
      acc.add(report);

      for (int bs = 0; bs < net.num_bs; ++bs) {
        for (int s = 0; s < num_slices; ++s) {
          const SliceTtiMetrics& m = report.slice(bs, s, num_slices);
          TtiRow row;
          row.tti = tti;
          row.bs = bs;
          row.slice = s;
          row.delivered_bits = m.delivered_bits;
          row.completed_packets = static_cast<int>(m.completed_delays_s.size());
          if (!m.completed_delays_s.empty()) {
            double sum = 0.0;
            for (double d : m.completed_delays_s) sum += d;
            row.mean_delay_s = sum / m.completed_delays_s.size();
          }
          row.dropped = m.dropped_packets;
          row.queue_len = m.queue_len;
          row.power_w = report.power_w[bs];
          row.action_alpha = actions_alpha[bs];
          row.action_beta = actions_beta[bs];
          run.rows.push_back(row);

          if (tti >= warmup_ttis &&
              net.slices_per_bs[s].slice_type == SliceType::kUrllc)
            for (double d : m.completed_delays_s)
              run.urllc_delay_samples.push_back(d);
        }
      }
    }

    // Rewards, next states, replay, training.
    EpochRecord record;
    record.epoch = epoch;
    record.epsilon = eps;
    record.per_bs.resize(net.num_bs);
    for (int bs = 0; bs < net.num_bs; ++bs) {
      const std::vector<SliceEpochMetrics> metrics = acc.bs_metrics(bs);
      std::vector<double> slice_rewards(num_slices);
      std::vector<double> weights(num_slices);
      for (int s = 0; s < num_slices; ++s) {
        slice_rewards[s] =
            slice_reward(metrics[s], net.slices_per_bs[s], epoch_duration_s);
        weights[s] = net.slices_per_bs[s].priority_weight;
      }
      const double r_alpha =
          power_reward(slice_rewards, weights, actions_alpha[bs], pspec);
      const double r_beta = ra_reward(slice_rewards, weights);

      Transition tr;
      tr.state_alpha = state_alpha[bs];
      tr.state_beta = state_beta[bs];
      tr.action_alpha = actions_alpha[bs];
      tr.action_beta = actions_beta[bs];
      tr.reward_alpha = r_alpha;
      tr.reward_beta = r_beta;
      tr.next_state_alpha =
          observe_power_state(metrics, state.tx_power_w(bs), net, pspec);
      tr.next_state_beta = observe_ra_state(metrics, net, rspec);
      replays[bs].push(std::move(tr));

      double loss = 0.0;
      if (replays[bs].size() >= train.batch_size) {
        for (int step = 0; step < train.train_steps_per_epoch; ++step) {
          const std::vector<int> batch =
              replays[bs].sample_indices(train.batch_size, train_rngs[bs]);
          switch (train.regime) {
            case Regime::kFrl:
              loss = frl_train_step(run.frl_stacks[bs], replays[bs], batch,
                                    train.discount, train.freeze_global);
              break;
            case Regime::kIrl:
              loss = irl_train_step(run.irl_agents[bs], replays[bs], batch,
                                    train.discount);
              break;
            case Regime::kCrl:
              loss = crl_train_step(run.crl_agents[bs], replays[bs], batch,
                                    train.discount);
              break;
          }
          ++train_steps[bs];
          if (train_steps[bs] % train.target_sync_epochs == 0) {
            switch (train.regime) {
              case Regime::kFrl: run.frl_stacks[bs].sync_targets(); break;
              case Regime::kIrl: run.irl_agents[bs].sync_targets(); break;
              case Regime::kCrl: run.crl_agents[bs].sync_targets(); break;
            }
          }
        }
      }

      record.per_bs[bs] = {actions_alpha[bs], actions_beta[bs], r_alpha, r_beta, loss};
      prev_metrics[bs] = metrics;

      // Backfill the epoch's rewards into its rows.
      for (std::size_t i = epoch_row_begin; i < run.rows.size(); ++i) {
        if (run.rows[i].bs != bs) continue;
        run.rows[i].reward_alpha = r_alpha;
        run.rows[i].reward_beta = r_beta;
      }
    }
    run.epochs.push_back(std::move(record));
  }
  return run;
}

}  // namespace oran
