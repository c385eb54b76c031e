#include "oran/channel.hpp"

#include <cmath>

namespace oran {

ChannelModel ChannelModel::flat(int num_bs, int num_ues, double gain_linear) {
  ChannelModel m;
  m.num_bs = num_bs;
  m.num_ues = num_ues;
  m.bs_positions.resize(num_bs);
  m.ue_positions.resize(num_ues);
  m.shadowing_db.assign(static_cast<std::size_t>(num_bs) * num_ues, 0.0);
  m.link_gain_linear.assign(static_cast<std::size_t>(num_bs) * num_ues, gain_linear);
  return m;
}

double pathloss_db(double distance_m, const NetworkConfig& cfg) {
  const double d_km = std::max(distance_m, 1.0) / 1000.0;
  return cfg.pathloss_fixed_db + cfg.pathloss_per_decade_db * std::log10(d_km);
}

ChannelModel build_topology(const NetworkConfig& cfg, Rng& rng) {
  ChannelModel m;
  m.num_bs = cfg.num_bs;
  m.num_ues = cfg.total_ues();
  m.bs_positions.resize(m.num_bs);
  for (int k = 0; k < m.num_bs; ++k)
    m.bs_positions[k] = {k * cfg.inter_bs_distance_m, 0.0};

  // UE drop: uniform in a disc around the serving BS.
  const double radius = cfg.inter_bs_distance_m / 2.0;
  m.ue_positions.resize(m.num_ues);
  for (int ue = 0; ue < m.num_ues; ++ue) {
    const Position& center = m.bs_positions[cfg.serving_bs(ue)];
    const double r = radius * std::sqrt(rng.uniform());
    const double theta = 2.0 * 3.14159265358979323846 * rng.uniform();
    m.ue_positions[ue] = {center.x + r * std::cos(theta), center.y + r * std::sin(theta)};
  }

  m.shadowing_db.resize(static_cast<std::size_t>(m.num_bs) * m.num_ues);
  m.link_gain_linear.resize(m.shadowing_db.size());
  for (int k = 0; k < m.num_bs; ++k) {
    for (int ue = 0; ue < m.num_ues; ++ue) {
      const double dx = m.bs_positions[k].x - m.ue_positions[ue].x;
      const double dy = m.bs_positions[k].y - m.ue_positions[ue].y;
      const double dist = std::sqrt(dx * dx + dy * dy);
      const double shadow = rng.normal(0.0, cfg.shadowing_sigma_db);
      m.shadowing_db[k * m.num_ues + ue] = shadow;
      const double gain_db = -pathloss_db(dist, cfg) + cfg.antenna_gain_db + shadow;
      m.link_gain_linear[k * m.num_ues + ue] = db_to_linear(gain_db);
    }
  }
  return m;
}

}  // namespace oran
