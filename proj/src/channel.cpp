#include "uavmec/channel.hpp"

#include <cmath>

namespace uavmec::channel {

void ChannelParams::validate() const {
    if (!(bandwidth_hz > 0.0)) throw ConfigError("channel: bandwidth_hz must be > 0");
    if (!(tx_power_w > 0.0)) throw ConfigError("channel: tx_power_w must be > 0");
    if (!(noise_power_w > 0.0)) throw ConfigError("channel: noise_power_w must be > 0");
    if (!(carrier_freq_hz > 0.0)) throw ConfigError("channel: carrier_freq_hz must be > 0");
    if (!(light_speed_m_s > 0.0)) throw ConfigError("channel: light_speed_m_s must be > 0");
    if (!(path_loss_exponent >= 2.0)) throw ConfigError("channel: path_loss_exponent must be >= 2");
    if (!(mu_los >= 1.0)) throw ConfigError("channel: mu_los (linear) must be >= 1");
    if (!(mu_nlos >= mu_los)) throw ConfigError("channel: mu_nlos must be >= mu_los");
    if (!(los_c1 > 0.0) || !(los_c2 > 0.0)) throw ConfigError("channel: los_c1, los_c2 must be > 0");
}

double los_probability(double elevation_deg, double c1, double c2) {
    return 1.0 / (1.0 + c1 * std::exp(-c2 * (elevation_deg - c1)));
}

double channel_gain(double horizontal_dist_m, double altitude_m, const ChannelParams& p) {
    const double d = std::hypot(horizontal_dist_m, altitude_m);
    const double elevation_deg = (180.0 / M_PI) * std::asin(altitude_m / d);
    const double p_los = los_probability(elevation_deg, p.los_c1, p.los_c2);
    const double p_nlos = 1.0 - p_los;
    const double attenuation = p_los * p.mu_los + p_nlos * p.mu_nlos;
    return 1.0 / (p.k_o() * std::pow(d, p.path_loss_exponent) * attenuation);
}

double transmission_rate(double gain, const ChannelParams& p) {
    return p.bandwidth_hz * std::log2(1.0 + p.tx_power_w * gain / p.noise_power_w);
}

}  // namespace uavmec::channel
