#pragma once

#include <array>
#include <functional>

#include "uavmec/env.hpp"

namespace uavmec::baselines {

/// One sampled decision. Net-backed policies fill the raw pre-squash flight
/// pair and both log-probabilities; reference policies only fill `decoded`.
struct ActionSample {
    std::array<double, 2> flight_raw = {0.0, 0.0};
    std::vector<double> alloc;
    double logp_flight = 0.0;
    double logp_alloc = 0.0;
    env::Action decoded;
    bool has_raw = false;
};

class Policy {
public:
    virtual ~Policy() = default;
    virtual ActionSample act(const env::Observation& obs, const env::Environment& e, int agent,
                             Rng& rng) = 0;
};

/// theta ~ U[0,2pi], d ~ U[0,d_max], alloc ~ Dir(1,...,1).
class RandomPolicy : public Policy {
public:
    ActionSample act(const env::Observation& obs, const env::Environment& e, int agent,
                     Rng& rng) override;
};

/// Flies toward the centroid of the K_sd least-served SDs of the own
/// sub-region (ties by lower index) at the largest feasible distance and
/// splits resources equally across allocation slots.
class GreedyPolicy : public Policy {
public:
    ActionSample act(const env::Observation& obs, const env::Environment& e, int agent,
                     Rng& rng) override;
};

/// Everything one episode produced, in slot order.
struct EpisodeRecord {
    int episode_index = 0;
    std::vector<std::vector<env::Observation>> observations;  // [slot][agent], pre-action
    std::vector<std::vector<ActionSample>> actions;           // [slot][agent]
    std::vector<std::vector<env::RewardBreakdown>> rewards;   // [slot][agent]
    std::vector<std::vector<env::AgentStepDetail>> details;   // kept when requested
    std::vector<std::vector<Vec2>> positions;                 // post-move, kept when requested
    compute::EpisodeMetrics metrics;
    std::vector<double> agent_returns;  // extrinsic sums per agent
    std::vector<int> final_offload_counts;
};

/// Runs one full episode. `env_seed` drives placement and task generation,
/// `policy_seed` drives action sampling, so the same mission replays
/// identically under different policies.
EpisodeRecord run_episode(env::Environment& e, Policy& policy, std::uint64_t env_seed,
                          std::uint64_t policy_seed, const env::Scenario* scenario = nullptr,
                          bool keep_details = false);

/// Frozen-policy evaluation over `episodes` missions with per-episode seeds
/// derived from `seed`. Invokes `on_episode` (when set) with full details.
std::vector<EpisodeRecord> evaluate_policy(
    const env::EnvConfig& cfg, Policy& policy, int episodes, std::uint64_t seed,
    const env::Scenario* scenario = nullptr,
    const std::function<void(const EpisodeRecord&)>& on_episode = nullptr);

struct OracleConfig {
    int theta_points = 32;
    int dist_points = 16;
    int simplex_denominator = 4;
    int max_subregion_sds = 6;  // hard cap on exhaustive enumeration
};

struct OracleResult {
    env::Action best_action;
    env::RewardBreakdown best_reward;
    std::size_t enumerated = 0;
};

/// Exhaustively enumerates (theta, d, alloc) on a lattice for one agent and
/// evaluates each candidate through a real env step on a cloned state; the
/// other agents hold position with a uniform split. Returns the argmax
/// (ties keep the first candidate in enumeration order).
OracleResult brute_force_step_oracle(const env::Environment& e, int agent,
                                     const OracleConfig& cfg);

}  // namespace uavmec::baselines
