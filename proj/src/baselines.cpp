#include "uavmec/baselines.hpp"

#include <algorithm>
#include <cmath>

namespace uavmec::baselines {

ActionSample RandomPolicy::act(const env::Observation&, const env::Environment& e, int,
                               Rng& rng) {
    const auto& w = e.config().world;
    ActionSample s;
    s.decoded.theta = rng.uniform(0.0, 2.0 * M_PI);
    s.decoded.dist_m = rng.uniform(0.0, w.max_flight_dist_m);
    s.decoded.alloc.resize(w.max_served_sds);
    double total = 0.0;
    for (double& v : s.decoded.alloc) {
        v = rng.gamma(1.0);
        total += v;
    }
    for (double& v : s.decoded.alloc) v /= total;
    s.alloc = s.decoded.alloc;
    return s;
}

ActionSample GreedyPolicy::act(const env::Observation&, const env::Environment& e, int agent,
                               Rng&) {
    const auto& w = e.config().world;
    const auto& st = e.state();
    const Vec2 self = st.uav_xy[agent];

    // Least-served SDs of the own sub-region, ties by lower index.
    std::vector<int> order(e.subregion_sds(agent));
    std::stable_sort(order.begin(), order.end(), [&st](int a, int b) {
        return st.offload_counts[a] < st.offload_counts[b];
    });
    const int k = std::min<int>(e.config().observed_sds, order.size());

    ActionSample s;
    s.decoded.alloc.assign(w.max_served_sds, 1.0 / w.max_served_sds);
    s.alloc = s.decoded.alloc;
    if (k == 0) {
        s.decoded.theta = 0.0;
        s.decoded.dist_m = 0.0;
        return s;
    }
    Vec2 centroid{0.0, 0.0};
    for (int i = 0; i < k; ++i) {
        centroid.x += st.sd_xy[order[i]].x;
        centroid.y += st.sd_xy[order[i]].y;
    }
    centroid.x /= k;
    centroid.y /= k;
    const double gap = distance(self, centroid);
    s.decoded.theta = gap > 0.0 ? bearing(self, centroid) : 0.0;
    s.decoded.dist_m = std::min(gap, w.max_flight_dist_m);
    return s;
}

EpisodeRecord run_episode(env::Environment& e, Policy& policy, std::uint64_t env_seed,
                          std::uint64_t policy_seed, const env::Scenario* scenario,
                          bool keep_details) {
    const int num_agents = e.config().world.num_uavs;
    EpisodeRecord rec;
    rec.agent_returns.assign(num_agents, 0.0);

    std::vector<env::Observation> obs =
        scenario ? e.reset(*scenario, env_seed) : e.reset(env_seed);
    Rng policy_rng(policy_seed);
    std::vector<compute::SlotMetrics> slots;

    while (!e.done()) {
        std::vector<ActionSample> samples;
        std::vector<env::Action> actions;
        samples.reserve(num_agents);
        for (int n = 0; n < num_agents; ++n) {
            samples.push_back(policy.act(obs[n], e, n, policy_rng));
            actions.push_back(samples.back().decoded);
        }
        rec.observations.push_back(std::move(obs));
        env::StepResult step = e.step(actions);
        for (int n = 0; n < num_agents; ++n)
            rec.agent_returns[n] += step.rewards[n].extrinsic;
        slots.push_back(step.metrics);
        rec.actions.push_back(std::move(samples));
        rec.rewards.push_back(std::move(step.rewards));
        if (keep_details) {
            rec.details.push_back(std::move(step.details));
            rec.positions.push_back(e.state().uav_xy);
        }
        obs = std::move(step.observations);
    }
    rec.metrics = compute::accumulate_objectives(slots);
    rec.final_offload_counts = e.state().offload_counts;
    return rec;
}

std::vector<EpisodeRecord> evaluate_policy(
    const env::EnvConfig& cfg, Policy& policy, int episodes, std::uint64_t seed,
    const env::Scenario* scenario,
    const std::function<void(const EpisodeRecord&)>& on_episode) {
    env::Environment e(cfg);
    std::vector<EpisodeRecord> records;
    records.reserve(episodes);
    for (int ep = 0; ep < episodes; ++ep) {
        EpisodeRecord rec =
            run_episode(e, policy, derive_seed(seed, "env", ep), derive_seed(seed, "policy", ep),
                        scenario, on_episode != nullptr);
        rec.episode_index = ep;
        if (on_episode) {
            on_episode(rec);
            // Details were only needed by the sink; keep the kept record lean.
            rec.details.clear();
            rec.positions.clear();
        }
        records.push_back(std::move(rec));
    }
    return records;
}

namespace {

void enumerate_compositions(int remaining, int slots_left, std::vector<int>& current,
                            const std::function<void(const std::vector<int>&)>& emit) {
    if (slots_left == 1) {
        current.push_back(remaining);
        emit(current);
        current.pop_back();
        return;
    }
    for (int take = 0; take <= remaining; ++take) {
        current.push_back(take);
        enumerate_compositions(remaining - take, slots_left - 1, current, emit);
        current.pop_back();
    }
}

}  // namespace

OracleResult brute_force_step_oracle(const env::Environment& e, int agent,
                                     const OracleConfig& cfg) {
    if (cfg.theta_points < 2 || cfg.dist_points < 2)
        throw std::invalid_argument("oracle: need at least 2 grid points per axis");
    if (cfg.simplex_denominator < 1)
        throw std::invalid_argument("oracle: simplex denominator must be >= 1");
    if (static_cast<int>(e.subregion_sds(agent).size()) > cfg.max_subregion_sds)
        throw std::runtime_error(
            "oracle: sub-region has more than " + std::to_string(cfg.max_subregion_sds) +
            " SDs; exhaustive enumeration refused");

    const auto& w = e.config().world;
    std::vector<env::Action> actions(w.num_uavs);
    for (int n = 0; n < w.num_uavs; ++n) {
        actions[n].theta = 0.0;
        actions[n].dist_m = 0.0;
        actions[n].alloc.assign(w.max_served_sds, 1.0 / w.max_served_sds);
    }

    std::vector<std::vector<double>> allocations;
    {
        std::vector<int> current;
        enumerate_compositions(cfg.simplex_denominator, w.max_served_sds, current,
                               [&](const std::vector<int>& comp) {
                                   std::vector<double> alloc(comp.size());
                                   for (std::size_t i = 0; i < comp.size(); ++i)
                                       alloc[i] = static_cast<double>(comp[i]) /
                                                  cfg.simplex_denominator;
                                   allocations.push_back(std::move(alloc));
                               });
    }

    OracleResult result;
    bool have_best = false;
    for (int it = 0; it < cfg.theta_points; ++it) {
        const double theta = 2.0 * M_PI * it / cfg.theta_points;
        for (int id = 0; id < cfg.dist_points; ++id) {
            const double dist = w.max_flight_dist_m * id / (cfg.dist_points - 1);
            for (const auto& alloc : allocations) {
                actions[agent].theta = theta;
                actions[agent].dist_m = dist;
                actions[agent].alloc = alloc;
                env::Environment clone = e;
                env::StepResult step = clone.step(actions);
                result.enumerated += 1;
                const double value = step.rewards[agent].extrinsic;
                if (!have_best || value > result.best_reward.extrinsic) {
                    have_best = true;
                    result.best_action = actions[agent];
                    result.best_reward = step.rewards[agent];
                }
            }
        }
    }
    return result;
}

}  // namespace uavmec::baselines
