#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "uavmec/channel.hpp"
#include "uavmec/compute.hpp"
#include "uavmec/world.hpp"

namespace uavmec::env {

/// Weights (w1..w6) combining the six reward components.
struct RewardWeights {
    std::array<double, 6> w = {100.0, 5.0, 20.0, 20.0, 10.0, 1.0};
};

struct EnvConfig {
    world::WorldConfig world;
    world::RotorParams rotor;
    channel::ChannelParams channel;
    world::TaskRanges tasks;
    RewardWeights weights;
    int observed_sds = 10;  // K_sd: SD entries per observation

    void validate() const;
};

/// Flat per-agent observation. Entries hold raw physical values
/// (meters / radians / counts / Hz); `policy_features` produces the scaled
/// copy that networks consume. Layout:
///   [0..2]                     own x, y, z=H
///   then observed_sds blocks   [bearing, distance, b count, f_min, valid]
///   then peer blocks (q of)    [bearing, distance]
struct Observation {
    std::vector<double> values;
};

struct ObservationLayout {
    static constexpr int kSdBlock = 5;
    static constexpr int kPeerBlock = 2;
    static int dim(const EnvConfig& cfg) {
        return 3 + kSdBlock * cfg.observed_sds +
               kPeerBlock * cfg.world.num_peer_uavs_observed;
    }
    static int sd_offset(int slot) { return 3 + kSdBlock * slot; }
    static int peer_offset(const EnvConfig& cfg, int slot) {
        return 3 + kSdBlock * cfg.observed_sds + kPeerBlock * slot;
    }
};

/// Fixed diagonal scaling applied to raw observation entries before they are
/// fed to any network (positions/distances by L, bearings by 2*pi, counts by
/// T, resource estimates by f_max).
std::vector<double> policy_features(const Observation& obs, const EnvConfig& cfg);

/// Decoded per-UAV action: flight pair plus the resource-allocation simplex.
/// alloc has max_served_sds entries, sums to 1, and maps position i to the
/// i-th nearest served SD (f = alloc_i * f_max).
struct Action {
    double theta = 0.0;
    double dist_m = 0.0;
    std::vector<double> alloc;
};

/// Maps raw policy outputs to a feasible Action: the flight pair is squashed
/// by tanh and affinely scaled onto [0, 2*pi] x [0, d_max]; the allocation
/// simplex is used as-is. Throws on non-finite inputs or an off-simplex
/// allocation (tolerance 1e-9).
Action decode_action(std::span<const double> raw_flight, std::span<const double> alloc_simplex,
                     const EnvConfig& cfg);

/// Six components of the per-agent reward and their weighted combination.
/// Component units: offload/num dimensionless, res in GHz, move/comp in kJ,
/// u2u in km; the fixed weights only balance at these scales.
struct RewardBreakdown {
    double offload = 0.0;
    double num = 0.0;
    double res = 0.0;
    double move = 0.0;
    double comp = 0.0;
    double u2u = 0.0;
    double extrinsic = 0.0;
};

/// Per-served-task outcome of one step, exposed for traces and tests.
struct TaskOutcome {
    int sd = -1;
    double alloc_hz = 0.0;
    double rate_bps = 0.0;
    double delay_s = 0.0;   // meaningful only when attempted
    double energy_j = 0.0;
    bool attempted = false; // false when rate or allocation was zero
    bool completed = false; // attempted and delay <= deadline
};

struct AgentStepDetail {
    std::vector<int> served;           // sorted by distance
    std::vector<TaskOutcome> outcomes; // one per served SD
    double speed_m_s = 0.0;
    double propulsion_w = 0.0;
};

struct StepResult {
    std::vector<Observation> observations;
    std::vector<RewardBreakdown> rewards;
    std::vector<AgentStepDetail> details;
    compute::SlotMetrics metrics;
    bool done = false;
};

/// Per-family feasibility report: position box, heading and distance ranges,
/// per-task and total allocation caps, task deadlines. Runtime behavior
/// enforces the hard families by construction; the report exists for tests
/// and the oracle.
struct ConstraintReport {
    bool position_x_ok = true;
    bool position_y_ok = true;
    bool theta_ok = true;
    bool dist_ok = true;
    bool alloc_each_ok = true;  // each allocation within [0, f_max]
    bool alloc_sum_ok = true;   // total allocation within capacity
    bool deadlines_ok = true;   // every attempted task met its deadline
    std::vector<std::string> violations;

    bool all_hard_ok() const {
        return position_x_ok && position_y_ok && theta_ok && dist_ok && alloc_each_ok &&
               alloc_sum_ok;
    }
};

/// Fixed SD placement and optional per-slot task schedule, for regression
/// fixtures and frozen evaluation missions.
struct Scenario {
    std::vector<Vec2> sd_xy;
    // task_schedule[t][m] = task of SD m at slot t+1; empty means sample randomly.
    std::vector<std::vector<world::TaskSpec>> task_schedule;

    static Scenario load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;
};

class Environment {
public:
    explicit Environment(EnvConfig cfg);

    /// Starts an episode: SDs uniform over the area, UAVs at their sub-region
    /// centers, fresh tasks, b = 0, t = 1.
    std::vector<Observation> reset(std::uint64_t seed);

    /// Same, but SD positions (and tasks, when a schedule is present) come
    /// from the scenario.
    std::vector<Observation> reset(const Scenario& scenario, std::uint64_t seed);

    /// Advances one time slot. Requires exactly one action per UAV and an
    /// unfinished episode.
    StepResult step(std::span<const Action> actions);

    /// Evaluates every constraint family for the given actions against the
    /// current state, by stepping a clone.
    ConstraintReport check_constraints(std::span<const Action> actions) const;

    Observation observation(int agent) const;

    const EnvConfig& config() const { return cfg_; }
    const world::WorldState& state() const { return state_; }
    bool done() const { return state_.slot > cfg_.world.slots_per_episode; }

    /// SD ids belonging to UAV n's sub-region (fixed after reset).
    const std::vector<int>& subregion_sds(int n) const { return subregion_sds_[n]; }

private:
    void assign_subregions();
    void generate_slot_tasks();

    EnvConfig cfg_;
    world::WorldState state_;
    std::vector<std::vector<int>> subregion_sds_;
    std::optional<Rng> task_rng_;
    std::vector<std::vector<world::TaskSpec>> schedule_;
    bool active_ = false;
};

}  // namespace uavmec::env
