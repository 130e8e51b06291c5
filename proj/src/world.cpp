#include "uavmec/world.hpp"

#include <algorithm>
#include <cmath>

namespace uavmec::world {

void WorldConfig::validate() const {
    if (!(area_side_m > 0.0)) throw ConfigError("world: area_side_m must be > 0");
    if (!(altitude_m > 0.0)) throw ConfigError("world: altitude_m must be > 0");
    if (num_uavs < 1) throw ConfigError("world: num_uavs must be >= 1");
    if (num_sds < 1) throw ConfigError("world: num_sds must be >= 1");
    if (slots_per_episode < 1) throw ConfigError("world: slots_per_episode must be >= 1");
    if (!(slot_duration_s > 0.0)) throw ConfigError("world: slot_duration_s must be > 0");
    if (!(max_flight_dist_m > 0.0)) throw ConfigError("world: max_flight_dist_m must be > 0");
    if (!(coverage_radius_m > 0.0)) throw ConfigError("world: coverage_radius_m must be > 0");
    if (max_served_sds < 1) throw ConfigError("world: max_served_sds must be >= 1");
    if (!(mec_capacity_hz > 0.0)) throw ConfigError("world: mec_capacity_hz must be > 0");
    if (!(cpu_capacitance >= 0.0)) throw ConfigError("world: cpu_capacitance must be >= 0");
    if (fairness_lambda < 0.0 || fairness_lambda > 1.0)
        throw ConfigError("world: fairness_lambda must be in [0, 1]");
    if (grid_rows < 1 || grid_cols < 1) throw ConfigError("world: grid dimensions must be >= 1");
    if (grid_rows * grid_cols != num_uavs)
        throw ConfigError("world: grid_rows * grid_cols must equal num_uavs");
    if (num_peer_uavs_observed < 0 || num_peer_uavs_observed > num_uavs - 1)
        throw ConfigError("world: num_peer_uavs_observed must be in [0, num_uavs - 1]");
}

void RotorParams::validate() const {
    const double fields[] = {blade_profile_power_w, induced_power_w,    tip_speed_m_s,
                             mean_induced_velocity_m_s, fuselage_drag_ratio, air_density_kg_m3,
                             rotor_solidity,        rotor_disc_area_m2};
    for (double f : fields)
        if (!(f > 0.0)) throw ConfigError("rotor: all parameters must be > 0");
}

void TaskRanges::validate() const {
    if (!(size_bits_min > 0.0) || size_bits_min > size_bits_max)
        throw ConfigError("tasks: size range must satisfy 0 < min <= max");
    if (!(cycles_per_bit_min > 0.0) || cycles_per_bit_min > cycles_per_bit_max)
        throw ConfigError("tasks: intensity range must satisfy 0 < min <= max");
    if (!(deadline_s_min > 0.0) || deadline_s_min > deadline_s_max)
        throw ConfigError("tasks: deadline range must satisfy 0 < min <= max");
}

Vec2 advance_uav(Vec2 pos, double theta, double dist_m, double max_dist_m, const Rect& region) {
    if (!(dist_m >= 0.0) || dist_m > max_dist_m)
        throw std::invalid_argument("advance_uav: flight distance outside [0, d_max]");
    Vec2 moved{pos.x + dist_m * std::cos(theta), pos.y + dist_m * std::sin(theta)};
    return region.clip(moved);
}

double propulsion_power(double speed_m_s, const RotorParams& r) {
    const double v2 = speed_m_s * speed_m_s;
    const double tip2 = r.tip_speed_m_s * r.tip_speed_m_s;
    const double v04 = std::pow(r.mean_induced_velocity_m_s, 4);
    const double blade = r.blade_profile_power_w * (1.0 + 3.0 * v2 / tip2);
    const double induced =
        r.induced_power_w *
        std::sqrt(std::sqrt(1.0 + v2 * v2 / (4.0 * v04)) -
                  v2 / (2.0 * r.mean_induced_velocity_m_s * r.mean_induced_velocity_m_s));
    const double parasite = 0.5 * r.fuselage_drag_ratio * r.air_density_kg_m3 * r.rotor_solidity *
                            r.rotor_disc_area_m2 * v2 * speed_m_s;
    return blade + induced + parasite;
}

std::vector<TaskSpec> generate_tasks(Rng& rng, int count, const TaskRanges& ranges) {
    ranges.validate();
    std::vector<TaskSpec> tasks;
    tasks.reserve(count);
    for (int i = 0; i < count; ++i) {
        TaskSpec t;
        t.size_bits = rng.uniform(ranges.size_bits_min, ranges.size_bits_max);
        t.cycles_per_bit = rng.uniform(ranges.cycles_per_bit_min, ranges.cycles_per_bit_max);
        t.deadline_s = rng.uniform(ranges.deadline_s_min, ranges.deadline_s_max);
        tasks.push_back(t);
    }
    return tasks;
}

std::vector<int> associate(Vec2 uav_pos, std::span<const int> candidate_sd_ids,
                           std::span<const Vec2> sd_xy, double coverage_radius_m,
                           int max_served) {
    std::vector<std::pair<double, int>> in_range;
    for (int id : candidate_sd_ids) {
        const double d = distance(uav_pos, sd_xy[id]);
        if (d <= coverage_radius_m) in_range.emplace_back(d, id);
    }
    std::sort(in_range.begin(), in_range.end());  // distance, then lower index
    if (static_cast<int>(in_range.size()) > max_served) in_range.resize(max_served);
    std::vector<int> served;
    served.reserve(in_range.size());
    for (const auto& [d, id] : in_range) served.push_back(id);
    return served;
}

}  // namespace uavmec::world
