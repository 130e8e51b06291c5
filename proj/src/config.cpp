#include "uavmec/config.hpp"

#include <fstream>
#include <set>

namespace uavmec::cli {

namespace {

/// Strict section reader: every key must be known, every read is typed.
class Section {
public:
    Section(const nlohmann::json& j, std::string path) : j_(&j), path_(std::move(path)) {
        if (!j.is_object()) throw ConfigError("config: '" + path_ + "' must be an object");
    }

    template <typename T>
    void read(const char* key, T& target) {
        seen_.insert(key);
        if (!j_->contains(key)) return;
        try {
            target = j_->at(key).get<T>();
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("config: bad value for '" + path_ + "." + key + "': " + e.what());
        }
    }

    void allow(const char* key) { seen_.insert(key); }

    void finish() const {
        for (const auto& [key, value] : j_->items())
            if (!seen_.count(key))
                throw ConfigError("config: unknown key '" + path_ + "." + key + "'");
    }

private:
    const nlohmann::json* j_;
    std::string path_;
    std::set<std::string> seen_;
};

const char* disc_loss_name(trainer::DiscriminatorLossKind k) {
    return k == trainer::DiscriminatorLossKind::standard_bce ? "standard_bce" : "paper_literal";
}

trainer::DiscriminatorLossKind disc_loss_from_name(const std::string& name) {
    if (name == "standard_bce") return trainer::DiscriminatorLossKind::standard_bce;
    if (name == "paper_literal") return trainer::DiscriminatorLossKind::paper_literal;
    throw ConfigError("config: train.discriminator_loss must be standard_bce or paper_literal");
}

}  // namespace

ExperimentConfig ExperimentConfig::defaults() { return ExperimentConfig{}; }

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    if (!j.contains("seed")) throw ConfigError("config: missing required field 'seed'");

    ExperimentConfig cfg;
    Section top(j, "");
    top.read("seed", cfg.seed);
    top.read("run_tag", cfg.run_tag);
    for (const char* section : {"world", "rotor", "channel", "compute", "env", "train"})
        top.allow(section);
    top.finish();

    if (j.contains("world")) {
        Section s(j.at("world"), "world");
        auto& w = cfg.env_cfg.world;
        s.read("area_side_m", w.area_side_m);
        s.read("altitude_m", w.altitude_m);
        s.read("num_uavs", w.num_uavs);
        s.read("num_sds", w.num_sds);
        s.read("slots_per_episode", w.slots_per_episode);
        s.read("slot_duration_s", w.slot_duration_s);
        s.read("max_flight_dist_m", w.max_flight_dist_m);
        s.read("coverage_radius_m", w.coverage_radius_m);
        s.read("max_served_sds", w.max_served_sds);
        s.read("mec_capacity_hz", w.mec_capacity_hz);
        s.read("grid_rows", w.grid_rows);
        s.read("grid_cols", w.grid_cols);
        s.read("num_peer_uavs_observed", w.num_peer_uavs_observed);
        s.finish();
    }
    if (j.contains("rotor")) {
        Section s(j.at("rotor"), "rotor");
        auto& r = cfg.env_cfg.rotor;
        s.read("blade_profile_power_w", r.blade_profile_power_w);
        s.read("induced_power_w", r.induced_power_w);
        s.read("tip_speed_m_s", r.tip_speed_m_s);
        s.read("mean_induced_velocity_m_s", r.mean_induced_velocity_m_s);
        s.read("fuselage_drag_ratio", r.fuselage_drag_ratio);
        s.read("air_density_kg_m3", r.air_density_kg_m3);
        s.read("rotor_solidity", r.rotor_solidity);
        s.read("rotor_disc_area_m2", r.rotor_disc_area_m2);
        s.finish();
    }
    if (j.contains("channel")) {
        Section s(j.at("channel"), "channel");
        auto& c = cfg.env_cfg.channel;
        s.read("bandwidth_hz", c.bandwidth_hz);
        s.read("tx_power_w", c.tx_power_w);
        s.read("noise_power_dbm", cfg.noise_power_dbm);
        s.read("carrier_freq_hz", c.carrier_freq_hz);
        s.read("light_speed_m_s", c.light_speed_m_s);
        s.read("path_loss_exponent", c.path_loss_exponent);
        s.read("mu_los_db", cfg.mu_los_db);
        s.read("mu_nlos_db", cfg.mu_nlos_db);
        s.read("los_c1", c.los_c1);
        s.read("los_c2", c.los_c2);
        s.finish();
    }
    if (j.contains("compute")) {
        Section s(j.at("compute"), "compute");
        auto& w = cfg.env_cfg.world;
        auto& t = cfg.env_cfg.tasks;
        s.read("cpu_capacitance", w.cpu_capacitance);
        s.read("fairness_lambda", w.fairness_lambda);
        s.read("task_size_bits_min", t.size_bits_min);
        s.read("task_size_bits_max", t.size_bits_max);
        s.read("task_cycles_per_bit_min", t.cycles_per_bit_min);
        s.read("task_cycles_per_bit_max", t.cycles_per_bit_max);
        s.read("task_deadline_s_min", t.deadline_s_min);
        s.read("task_deadline_s_max", t.deadline_s_max);
        s.finish();
    }
    if (j.contains("env")) {
        Section s(j.at("env"), "env");
        s.read("observed_sds", cfg.env_cfg.observed_sds);
        std::vector<double> weights(cfg.env_cfg.weights.w.begin(), cfg.env_cfg.weights.w.end());
        s.read("reward_weights", weights);
        if (weights.size() != 6)
            throw ConfigError("config: env.reward_weights must have exactly 6 entries");
        std::copy(weights.begin(), weights.end(), cfg.env_cfg.weights.w.begin());
        s.finish();
    }
    if (j.contains("train")) {
        Section s(j.at("train"), "train");
        auto& t = cfg.train;
        s.read("episodes", t.episodes);
        s.read("workers", t.workers);
        s.read("episodes_per_update", t.episodes_per_update);
        s.read("epochs_per_update", t.epochs_per_update);
        s.read("minibatch_size", t.minibatch_size);
        s.read("expert_batch_size", t.expert_batch_size);
        s.read("clip_epsilon", t.clip_epsilon);
        s.read("discount_gamma", t.discount_gamma);
        s.read("gae_lambda", t.gae_lambda);
        s.read("intrinsic_scale", t.intrinsic_scale);
        s.read("reward_scale", t.reward_scale);
        s.read("actor_lr", t.actor_lr);
        s.read("critic_lr", t.critic_lr);
        s.read("discriminator_lr", t.discriminator_lr);
        s.read("expert_buffer_episodes", t.expert_buffer_episodes);
        s.read("discriminator_enabled", t.discriminator_enabled);
        std::string loss = disc_loss_name(t.discriminator_loss);
        s.read("discriminator_loss", loss);
        t.discriminator_loss = disc_loss_from_name(loss);
        s.read("max_grad_norm", t.max_grad_norm);
        s.read("hidden_dim", t.hidden_dim);
        s.read("log_std_init", t.log_std_init);
        s.read("log_std_min", t.log_std_min);
        s.read("log_std_max", t.log_std_max);
        s.read("checkpoint_every_updates", t.checkpoint_every_updates);
        s.read("final_eval_episodes", t.final_eval_episodes);
        s.finish();
    }
    cfg.env_cfg.channel.noise_power_w = channel::dbm_to_watts(cfg.noise_power_dbm);
    cfg.env_cfg.channel.mu_los = channel::db_to_linear(cfg.mu_los_db);
    cfg.env_cfg.channel.mu_nlos = channel::db_to_linear(cfg.mu_nlos_db);
    cfg.validate();
    return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config: " + path.string() + ": " + e.what());
    }
    return from_json(j);
}

nlohmann::json ExperimentConfig::to_json() const {
    nlohmann::json j;
    j["seed"] = seed;
    j["run_tag"] = run_tag;
    const auto& w = env_cfg.world;
    j["world"] = {{"area_side_m", w.area_side_m},
                  {"altitude_m", w.altitude_m},
                  {"num_uavs", w.num_uavs},
                  {"num_sds", w.num_sds},
                  {"slots_per_episode", w.slots_per_episode},
                  {"slot_duration_s", w.slot_duration_s},
                  {"max_flight_dist_m", w.max_flight_dist_m},
                  {"coverage_radius_m", w.coverage_radius_m},
                  {"max_served_sds", w.max_served_sds},
                  {"mec_capacity_hz", w.mec_capacity_hz},
                  {"grid_rows", w.grid_rows},
                  {"grid_cols", w.grid_cols},
                  {"num_peer_uavs_observed", w.num_peer_uavs_observed}};
    const auto& r = env_cfg.rotor;
    j["rotor"] = {{"blade_profile_power_w", r.blade_profile_power_w},
                  {"induced_power_w", r.induced_power_w},
                  {"tip_speed_m_s", r.tip_speed_m_s},
                  {"mean_induced_velocity_m_s", r.mean_induced_velocity_m_s},
                  {"fuselage_drag_ratio", r.fuselage_drag_ratio},
                  {"air_density_kg_m3", r.air_density_kg_m3},
                  {"rotor_solidity", r.rotor_solidity},
                  {"rotor_disc_area_m2", r.rotor_disc_area_m2}};
    const auto& c = env_cfg.channel;
    j["channel"] = {{"bandwidth_hz", c.bandwidth_hz},
                    {"tx_power_w", c.tx_power_w},
                    {"noise_power_dbm", noise_power_dbm},
                    {"carrier_freq_hz", c.carrier_freq_hz},
                    {"light_speed_m_s", c.light_speed_m_s},
                    {"path_loss_exponent", c.path_loss_exponent},
                    {"mu_los_db", mu_los_db},
                    {"mu_nlos_db", mu_nlos_db},
                    {"los_c1", c.los_c1},
                    {"los_c2", c.los_c2}};
    const auto& t = env_cfg.tasks;
    j["compute"] = {{"cpu_capacitance", w.cpu_capacitance},
                    {"fairness_lambda", w.fairness_lambda},
                    {"task_size_bits_min", t.size_bits_min},
                    {"task_size_bits_max", t.size_bits_max},
                    {"task_cycles_per_bit_min", t.cycles_per_bit_min},
                    {"task_cycles_per_bit_max", t.cycles_per_bit_max},
                    {"task_deadline_s_min", t.deadline_s_min},
                    {"task_deadline_s_max", t.deadline_s_max}};
    j["env"] = {{"observed_sds", env_cfg.observed_sds},
                {"reward_weights", env_cfg.weights.w}};
    const auto& tr = train;
    j["train"] = {{"episodes", tr.episodes},
                  {"workers", tr.workers},
                  {"episodes_per_update", tr.episodes_per_update},
                  {"epochs_per_update", tr.epochs_per_update},
                  {"minibatch_size", tr.minibatch_size},
                  {"expert_batch_size", tr.expert_batch_size},
                  {"clip_epsilon", tr.clip_epsilon},
                  {"discount_gamma", tr.discount_gamma},
                  {"gae_lambda", tr.gae_lambda},
                  {"intrinsic_scale", tr.intrinsic_scale},
                  {"reward_scale", tr.reward_scale},
                  {"actor_lr", tr.actor_lr},
                  {"critic_lr", tr.critic_lr},
                  {"discriminator_lr", tr.discriminator_lr},
                  {"expert_buffer_episodes", tr.expert_buffer_episodes},
                  {"discriminator_enabled", tr.discriminator_enabled},
                  {"discriminator_loss", disc_loss_name(tr.discriminator_loss)},
                  {"max_grad_norm", tr.max_grad_norm},
                  {"hidden_dim", tr.hidden_dim},
                  {"log_std_init", tr.log_std_init},
                  {"log_std_min", tr.log_std_min},
                  {"log_std_max", tr.log_std_max},
                  {"checkpoint_every_updates", tr.checkpoint_every_updates},
                  {"final_eval_episodes", tr.final_eval_episodes}};
    return j;
}

void ExperimentConfig::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw ConfigError("config: cannot write " + path.string());
    out << to_json().dump(2) << "\n";
}

void ExperimentConfig::validate() const {
    env_cfg.validate();
    train.validate();
}

}  // namespace uavmec::cli
