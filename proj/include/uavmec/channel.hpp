#pragma once

#include "uavmec/common.hpp"

namespace uavmec::channel {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

/// Air-to-ground uplink parameters. Attenuation factors are stored linear;
/// the config loader converts from dB. The LoS-probability model consumes
/// elevation angles in degrees; everything else is radians/SI.
struct ChannelParams {
    double bandwidth_hz = 1e6;
    double tx_power_w = 0.1;
    double noise_power_w = 1e-14;  // -110 dBm
    double carrier_freq_hz = 2e9;
    double light_speed_m_s = 3e8;
    double path_loss_exponent = 2.0;
    double mu_los = 1.2589254117941673;    // 1 dB
    double mu_nlos = 100.0;                // 20 dB
    double los_c1 = 9.61;
    double los_c2 = 0.16;

    /// K_o = (4*pi*f_c / c)^2.
    double k_o() const {
        const double k = 4.0 * M_PI * carrier_freq_hz / light_speed_m_s;
        return k * k;
    }

    void validate() const;
};

/// LoS probability for an elevation angle given in degrees.
double los_probability(double elevation_deg, double c1, double c2);

/// Probabilistic-LoS channel power gain between an SD and a UAV at altitude H
/// separated by `horizontal_dist_m` on the ground plane.
double channel_gain(double horizontal_dist_m, double altitude_m, const ChannelParams& p);

/// Achievable uplink rate in bits/s for a given channel power gain.
double transmission_rate(double gain, const ChannelParams& p);

}  // namespace uavmec::channel
