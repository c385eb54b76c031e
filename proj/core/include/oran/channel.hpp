#pragma once

#include <vector>

#include "oran/config.hpp"
#include "oran/rng.hpp"

namespace oran {

struct Position {
  double x = 0.0;
  double y = 0.0;
};

// Static link gains for one run: pathloss + combined antenna gain + one
// log-normal shadowing draw per (BS, UE) link, stored in linear scale.
struct ChannelModel {
  int num_bs = 0;
  int num_ues = 0;
  std::vector<Position> bs_positions;
  std::vector<Position> ue_positions;
  std::vector<double> shadowing_db;     // (bs, ue) row-major
  std::vector<double> link_gain_linear; // (bs, ue) row-major

  double gain(int bs, int ue) const { return link_gain_linear[bs * num_ues + ue]; }
  double& gain(int bs, int ue) { return link_gain_linear[bs * num_ues + ue]; }
  double shadow_db(int bs, int ue) const { return shadowing_db[bs * num_ues + ue]; }

  // Uniform synthetic channel for tests: every link has the same gain.
  static ChannelModel flat(int num_bs, int num_ues, double gain_linear);
};

// 128.1 + 37.6 log10(d_km) with the distance clamped to 1 m.
double pathloss_db(double distance_m, const NetworkConfig& cfg);

// BSs on a line spaced inter_bs_distance_m apart; UEs dropped uniformly in a
// disc of radius inter_bs_distance_m / 2 around their serving BS.
ChannelModel build_topology(const NetworkConfig& cfg, Rng& rng);

}  // namespace oran
