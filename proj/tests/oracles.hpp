// Independent reference evaluations for the physics/learning formulas, used
// as test oracles. Everything here is written directly from the closed-form
// definitions in long double arithmetic and deliberately shares no code with
// the library implementations it checks.
#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace oracles {

inline long double propulsion_power(long double v, long double p_b, long double p_i,
                                    long double v_tip, long double v_0, long double d_0,
                                    long double rho, long double s, long double area) {
    const long double blade = p_b * (1.0L + 3.0L * v * v / (v_tip * v_tip));
    const long double inner =
        sqrtl(1.0L + powl(v, 4.0L) / (4.0L * powl(v_0, 4.0L))) - v * v / (2.0L * v_0 * v_0);
    const long double induced = p_i * sqrtl(inner);
    const long double parasite = 0.5L * d_0 * rho * s * area * powl(v, 3.0L);
    return blade + induced + parasite;
}

inline long double los_probability(long double elevation_deg, long double c1, long double c2) {
    return 1.0L / (1.0L + c1 * expl(-c2 * (elevation_deg - c1)));
}

inline long double channel_gain(long double horizontal_m, long double altitude_m,
                                long double carrier_hz, long double light_speed,
                                long double alpha, long double mu_los, long double mu_nlos,
                                long double c1, long double c2) {
    const long double d = sqrtl(horizontal_m * horizontal_m + altitude_m * altitude_m);
    const long double elevation = 180.0L / M_PIl * asinl(altitude_m / d);
    const long double p_los = los_probability(elevation, c1, c2);
    const long double k_o = powl(4.0L * M_PIl * carrier_hz / light_speed, 2.0L);
    const long double attenuation = p_los * mu_los + (1.0L - p_los) * mu_nlos;
    return 1.0L / (k_o * powl(d, alpha) * attenuation);
}

inline long double transmission_rate(long double gain, long double bandwidth_hz,
                                     long double tx_power_w, long double noise_w) {
    return bandwidth_hz * log2l(1.0L + tx_power_w * gain / noise_w);
}

inline long double offload_delay(long double size_bits, long double cycles_per_bit,
                                 long double rate_bps, long double alloc_hz) {
    return size_bits / rate_bps + size_bits * cycles_per_bit / alloc_hz;
}

inline long double computation_energy(long double size_bits, long double cycles_per_bit,
                                      long double alloc_hz, long double kappa) {
    return kappa * alloc_hz * alloc_hz * size_bits * cycles_per_bit;
}

inline long double gaussian_log_prob(const std::vector<long double>& mean,
                                     const std::vector<long double>& log_std,
                                     const std::vector<long double>& x) {
    long double lp = 0.0L;
    for (std::size_t i = 0; i < mean.size(); ++i) {
        const long double sigma = expl(log_std[i]);
        const long double diff = x[i] - mean[i];
        lp += -0.5L * logl(2.0L * M_PIl) - log_std[i] - diff * diff / (2.0L * sigma * sigma);
    }
    return lp;
}

inline long double dirichlet_log_prob(const std::vector<long double>& alpha,
                                      const std::vector<long double>& x) {
    long double alpha0 = 0.0L;
    long double sum_lg = 0.0L;
    long double sum_terms = 0.0L;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        alpha0 += alpha[i];
        sum_lg += lgammal(alpha[i]);
        sum_terms += (alpha[i] - 1.0L) * logl(x[i]);
    }
    return lgammal(alpha0) - sum_lg + sum_terms;
}

/// Direct nested-sum GAE definition: A_t = sum_l (gamma*lambda)^l * delta_{t+l},
/// delta_t = r_t + gamma * V_{t+1} * (1 - done_t) - V_t, stopping at episode end.
inline std::vector<long double> gae_nested(const std::vector<long double>& rewards,
                                           const std::vector<long double>& values,
                                           const std::vector<int>& dones, long double gamma,
                                           long double lambda) {
    const std::size_t n = rewards.size();
    std::vector<long double> deltas(n);
    for (std::size_t t = 0; t < n; ++t) {
        const long double next_v = (t + 1 < n && !dones[t]) ? values[t + 1] : 0.0L;
        deltas[t] = rewards[t] + gamma * next_v * (dones[t] ? 0.0L : 1.0L) - values[t];
    }
    std::vector<long double> adv(n, 0.0L);
    for (std::size_t t = 0; t < n; ++t) {
        long double factor = 1.0L;
        for (std::size_t l = t; l < n; ++l) {
            adv[t] += factor * deltas[l];
            if (dones[l]) break;
            factor *= gamma * lambda;
        }
    }
    return adv;
}

}  // namespace oracles
