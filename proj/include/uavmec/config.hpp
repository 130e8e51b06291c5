#pragma once

#include <filesystem>

#include <json.hpp>

#include "uavmec/env.hpp"
#include "uavmec/trainer.hpp"

namespace uavmec::cli {

/// Resolved experiment configuration: every module section plus run identity.
/// The emitted JSON spells out every default; channel attenuation and noise
/// keep their dB/dBm file representation and are converted to linear/watts on
/// load. `seed` is the one required field of a config file.
struct ExperimentConfig {
    std::uint64_t seed = 1;
    std::string run_tag = "run";
    env::EnvConfig env_cfg;
    trainer::TrainConfig train;

    // File-unit representation retained for round-tripping.
    double noise_power_dbm = -110.0;
    double mu_los_db = 1.0;
    double mu_nlos_db = 20.0;

    static ExperimentConfig defaults();
    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig load(const std::filesystem::path& path);

    nlohmann::json to_json() const;
    void save(const std::filesystem::path& path) const;
    void validate() const;
};

}  // namespace uavmec::cli
