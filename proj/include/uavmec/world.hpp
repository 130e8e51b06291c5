#pragma once

#include <span>
#include <vector>

#include "uavmec/common.hpp"

namespace uavmec::world {

/// Geometry, fleet sizing and MEC capacity of the simulated service area.
/// The L x L square is partitioned into a grid_rows x grid_cols grid and
/// UAV n exclusively regulates cell n (row-major, x varying fastest), which
/// rules out inter-cell interference by construction.
struct WorldConfig {
    double area_side_m = 1000.0;
    double altitude_m = 120.0;
    int num_uavs = 4;
    int num_sds = 100;
    int slots_per_episode = 30;
    double slot_duration_s = 5.0;
    double max_flight_dist_m = 150.0;
    double coverage_radius_m = 250.0;
    int max_served_sds = 5;
    double mec_capacity_hz = 20e9;
    double cpu_capacitance = 1e-28;
    double fairness_lambda = 1.0;
    int grid_rows = 2;
    int grid_cols = 2;
    int num_peer_uavs_observed = 3;

    double max_speed_m_s() const { return max_flight_dist_m / slot_duration_s; }

    /// Sub-region rectangle owned by UAV `n`.
    Rect subregion(int n) const {
        const double w = area_side_m / grid_cols;
        const double h = area_side_m / grid_rows;
        const int row = n / grid_cols;
        const int col = n % grid_cols;
        return {col * w, row * h, (col + 1) * w, (row + 1) * h};
    }

    void validate() const;
};

/// Rotary-wing propulsion constants. Defaults are the standard parameter set
/// of the cited energy model for a 2 kg class UAV.
struct RotorParams {
    double blade_profile_power_w = 79.8563;
    double induced_power_w = 88.6279;
    double tip_speed_m_s = 120.0;
    double mean_induced_velocity_m_s = 4.03;
    double fuselage_drag_ratio = 0.6;
    double air_density_kg_m3 = 1.225;
    double rotor_solidity = 0.05;
    double rotor_disc_area_m2 = 0.503;

    void validate() const;
};

/// One computation task <D, C, tau>.
struct TaskSpec {
    double size_bits = 0.0;
    double cycles_per_bit = 0.0;
    double deadline_s = 0.0;
};

struct TaskRanges {
    double size_bits_min = 1e6;
    double size_bits_max = 5e6;
    double cycles_per_bit_min = 500.0;
    double cycles_per_bit_max = 1500.0;
    double deadline_s_min = 1.0;
    double deadline_s_max = 5.0;

    void validate() const;
};

/// Mutable per-episode state. Owned by exactly one Environment instance.
struct WorldState {
    std::vector<Vec2> uav_xy;
    std::vector<Vec2> sd_xy;
    std::vector<TaskSpec> tasks;
    std::vector<int> offload_counts;  // b_{m,t}
    int slot = 1;                     // 1..T
};

/// Moves a UAV by (theta, d) and clips the result into its sub-region.
/// Throws std::invalid_argument if d is outside [0, d_max]; such a value can
/// only mean an invalid action escaped the decoder.
Vec2 advance_uav(Vec2 pos, double theta, double dist_m, double max_dist_m, const Rect& region);

/// Rotary-wing propulsion power draw at horizontal speed v.
double propulsion_power(double speed_m_s, const RotorParams& rotor);

/// Samples `count` tasks, each field independent and uniform over its range.
std::vector<TaskSpec> generate_tasks(Rng& rng, int count, const TaskRanges& ranges);

/// Served-SD selection: of the candidate SDs (the UAV's own sub-region),
/// keeps those within coverage_radius of the UAV, sorted ascending by
/// horizontal distance with ties broken by lower SD index, truncated to
/// max_served entries.
std::vector<int> associate(Vec2 uav_pos, std::span<const int> candidate_sd_ids,
                           std::span<const Vec2> sd_xy, double coverage_radius_m,
                           int max_served);

}  // namespace uavmec::world
