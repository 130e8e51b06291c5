#pragma once

#include <optional>

#include "uavmec/config.hpp"

namespace uavmec::cli {

struct TrainOptions {
    std::filesystem::path config_path;  // empty = built-in defaults
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::filesystem::path out_dir;
};

struct EvalOptions {
    std::string policy = "checkpoint";  // random | greedy | checkpoint
    std::filesystem::path checkpoint;
    std::filesystem::path config_path;  // used by random/greedy (or to cross-check)
    std::filesystem::path scenario;
    int episodes = 100;
    std::optional<std::uint64_t> seed;
    std::filesystem::path out_dir;
};

struct OracleOptions {
    std::filesystem::path scenario;
    std::filesystem::path config_path;
    std::optional<std::uint64_t> seed;
    int theta_points = 32;
    int dist_points = 16;
    int simplex_denominator = 4;
    std::filesystem::path out_path;  // empty = stdout only
};

/// Reads per-episode evaluation rows and the aggregate summary produced by
/// evaluating a policy on frozen missions.
struct EvalOutcome {
    double mean_return = 0.0;
    std::vector<double> per_episode_returns;
    double mean_offload_total = 0.0;
    double offload_cv_mean = 0.0;  // mean over episodes of per-SD count CV
    int episodes_with_offloads = 0;
};

int run_train(const TrainOptions& opt);
int run_eval(const EvalOptions& opt);
int run_oracle_check(const OracleOptions& opt);
int run_validate_config(const std::filesystem::path& config_path);

/// Library-level evaluation used by the eval subcommand and the acceptance
/// suite: runs `episodes` frozen missions, optionally writing metrics rows
/// and a trace to `out_dir`.
EvalOutcome evaluate(const env::EnvConfig& cfg, baselines::Policy& policy, int episodes,
                     std::uint64_t seed, const env::Scenario* scenario,
                     const std::filesystem::path& out_dir);

}  // namespace uavmec::cli
