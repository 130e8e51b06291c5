#include "uavmec/env.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

namespace uavmec::env {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;
// Reward unit conversions; see RewardBreakdown.
constexpr double kHzPerGhz = 1e9;
constexpr double kJoulePerKj = 1e3;
constexpr double kMeterPerKm = 1e3;

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw std::runtime_error(std::string("env: non-finite ") + what);
}

}  // namespace

void EnvConfig::validate() const {
    world.validate();
    rotor.validate();
    channel.validate();
    tasks.validate();
    if (observed_sds < 1) throw ConfigError("env: observed_sds must be >= 1");
    for (double wi : weights.w)
        if (!std::isfinite(wi)) throw ConfigError("env: reward weights must be finite");
}

std::vector<double> policy_features(const Observation& obs, const EnvConfig& cfg) {
    const double L = cfg.world.area_side_m;
    const double T = cfg.world.slots_per_episode;
    const double f_max = cfg.world.mec_capacity_hz;
    std::vector<double> f(obs.values.size());
    f[0] = obs.values[0] / L;
    f[1] = obs.values[1] / L;
    f[2] = obs.values[2] / L;
    for (int s = 0; s < cfg.observed_sds; ++s) {
        const int o = ObservationLayout::sd_offset(s);
        f[o + 0] = obs.values[o + 0] / kTwoPi;
        f[o + 1] = obs.values[o + 1] / L;
        f[o + 2] = obs.values[o + 2] / T;
        f[o + 3] = obs.values[o + 3] / f_max;
        f[o + 4] = obs.values[o + 4];
    }
    for (int s = 0; s < cfg.world.num_peer_uavs_observed; ++s) {
        const int o = ObservationLayout::peer_offset(cfg, s);
        f[o + 0] = obs.values[o + 0] / kTwoPi;
        f[o + 1] = obs.values[o + 1] / L;
    }
    return f;
}

Action decode_action(std::span<const double> raw_flight, std::span<const double> alloc_simplex,
                     const EnvConfig& cfg) {
    if (raw_flight.size() != 2)
        throw std::runtime_error("decode_action: flight head must emit 2 values");
    if (static_cast<int>(alloc_simplex.size()) != cfg.world.max_served_sds)
        throw std::runtime_error("decode_action: allocation head size != max_served_sds");
    require_finite(raw_flight[0], "flight output");
    require_finite(raw_flight[1], "flight output");

    Action a;
    a.theta = 0.5 * (std::tanh(raw_flight[0]) + 1.0) * kTwoPi;
    a.dist_m = 0.5 * (std::tanh(raw_flight[1]) + 1.0) * cfg.world.max_flight_dist_m;

    double sum = 0.0;
    a.alloc.reserve(alloc_simplex.size());
    for (double v : alloc_simplex) {
        require_finite(v, "allocation output");
        if (v < 0.0) throw std::runtime_error("env: negative allocation fraction");
        a.alloc.push_back(v);
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::runtime_error("env: allocation fractions do not lie on the simplex");
    return a;
}

Environment::Environment(EnvConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

void Environment::assign_subregions() {
    subregion_sds_.assign(cfg_.world.num_uavs, {});
    for (int m = 0; m < cfg_.world.num_sds; ++m) {
        for (int n = 0; n < cfg_.world.num_uavs; ++n) {
            if (cfg_.world.subregion(n).contains(state_.sd_xy[m])) {
                subregion_sds_[n].push_back(m);
                break;  // grid cells overlap only on shared edges; first cell wins
            }
        }
    }
}

void Environment::generate_slot_tasks() {
    if (!schedule_.empty()) {
        state_.tasks = schedule_[(state_.slot - 1) % schedule_.size()];
    } else {
        state_.tasks = world::generate_tasks(*task_rng_, cfg_.world.num_sds, cfg_.tasks);
    }
}

std::vector<Observation> Environment::reset(std::uint64_t seed) {
    task_rng_.emplace(seed);
    schedule_.clear();
    state_ = world::WorldState{};
    state_.sd_xy.reserve(cfg_.world.num_sds);
    for (int m = 0; m < cfg_.world.num_sds; ++m)
        state_.sd_xy.push_back(
            {task_rng_->uniform(0.0, cfg_.world.area_side_m),
             task_rng_->uniform(0.0, cfg_.world.area_side_m)});
    state_.uav_xy.reserve(cfg_.world.num_uavs);
    for (int n = 0; n < cfg_.world.num_uavs; ++n)
        state_.uav_xy.push_back(cfg_.world.subregion(n).center());
    state_.offload_counts.assign(cfg_.world.num_sds, 0);
    state_.slot = 1;
    assign_subregions();
    generate_slot_tasks();
    active_ = true;
    std::vector<Observation> obs;
    for (int n = 0; n < cfg_.world.num_uavs; ++n) obs.push_back(observation(n));
    return obs;
}

std::vector<Observation> Environment::reset(const Scenario& scenario, std::uint64_t seed) {
    if (static_cast<int>(scenario.sd_xy.size()) != cfg_.world.num_sds)
        throw ConfigError("scenario: SD count does not match world config");
    for (Vec2 p : scenario.sd_xy)
        if (!Rect{0, 0, cfg_.world.area_side_m, cfg_.world.area_side_m}.contains(p))
            throw ConfigError("scenario: SD position outside the service area");
    if (!scenario.task_schedule.empty()) {
        for (const auto& slot_tasks : scenario.task_schedule)
            if (static_cast<int>(slot_tasks.size()) != cfg_.world.num_sds)
                throw ConfigError("scenario: task schedule row size != num_sds");
    }
    task_rng_.emplace(seed);
    schedule_ = scenario.task_schedule;
    state_ = world::WorldState{};
    state_.sd_xy = scenario.sd_xy;
    state_.uav_xy.clear();
    for (int n = 0; n < cfg_.world.num_uavs; ++n)
        state_.uav_xy.push_back(cfg_.world.subregion(n).center());
    state_.offload_counts.assign(cfg_.world.num_sds, 0);
    state_.slot = 1;
    assign_subregions();
    generate_slot_tasks();
    active_ = true;
    std::vector<Observation> obs;
    for (int n = 0; n < cfg_.world.num_uavs; ++n) obs.push_back(observation(n));
    return obs;
}

Observation Environment::observation(int agent) const {
    const auto& w = cfg_.world;
    Observation obs;
    obs.values.assign(ObservationLayout::dim(cfg_), 0.0);
    const Vec2 self = state_.uav_xy[agent];
    obs.values[0] = self.x;
    obs.values[1] = self.y;
    obs.values[2] = w.altitude_m;

    // K_sd nearest SDs of the own sub-region, ascending distance, ties by index.
    std::vector<std::pair<double, int>> by_dist;
    for (int m : subregion_sds_[agent]) by_dist.emplace_back(distance(self, state_.sd_xy[m]), m);
    std::sort(by_dist.begin(), by_dist.end());
    const int n_sd = std::min<int>(cfg_.observed_sds, by_dist.size());
    for (int s = 0; s < n_sd; ++s) {
        const auto& [d, m] = by_dist[s];
        const world::TaskSpec& task = state_.tasks[m];
        const int o = ObservationLayout::sd_offset(s);
        obs.values[o + 0] = bearing(self, state_.sd_xy[m]);
        obs.values[o + 1] = d;
        obs.values[o + 2] = state_.offload_counts[m];
        obs.values[o + 3] = task.size_bits * task.cycles_per_bit / task.deadline_s;
        obs.values[o + 4] = 1.0;
    }

    // q nearest peer UAVs.
    std::vector<std::pair<double, int>> peers;
    for (int k = 0; k < w.num_uavs; ++k)
        if (k != agent) peers.emplace_back(distance(self, state_.uav_xy[k]), k);
    std::sort(peers.begin(), peers.end());
    for (int s = 0; s < w.num_peer_uavs_observed; ++s) {
        const auto& [d, k] = peers[s];
        const int o = ObservationLayout::peer_offset(cfg_, s);
        obs.values[o + 0] = bearing(self, state_.uav_xy[k]);
        obs.values[o + 1] = d;
    }
    return obs;
}

StepResult Environment::step(std::span<const Action> actions) {
    const auto& w = cfg_.world;
    if (!active_) throw std::logic_error("env: step before reset");
    if (done()) throw std::logic_error("env: episode already finished");
    if (static_cast<int>(actions.size()) != w.num_uavs)
        throw std::runtime_error("env: one action per UAV required");

    StepResult result;
    result.details.resize(w.num_uavs);
    result.rewards.resize(w.num_uavs);

    // (1) Move every UAV; clipping keeps positions inside the own sub-region.
    for (int n = 0; n < w.num_uavs; ++n) {
        const Action& a = actions[n];
        require_finite(a.theta, "theta");
        if (a.theta < 0.0 || a.theta > kTwoPi)
            throw std::invalid_argument("env: theta outside [0, 2*pi]");
        if (static_cast<int>(a.alloc.size()) != w.max_served_sds)
            throw std::runtime_error("env: allocation size != max_served_sds");
        state_.uav_xy[n] =
            world::advance_uav(state_.uav_xy[n], a.theta, a.dist_m, w.max_flight_dist_m,
                               w.subregion(n));
    }

    // (2)-(5) Associate, allocate by served order, resolve tasks, count offloads.
    for (int n = 0; n < w.num_uavs; ++n) {
        AgentStepDetail& det = result.details[n];
        det.served = world::associate(state_.uav_xy[n], subregion_sds_[n], state_.sd_xy,
                                      w.coverage_radius_m, w.max_served_sds);
        det.speed_m_s = actions[n].dist_m / w.slot_duration_s;
        det.propulsion_w = world::propulsion_power(det.speed_m_s, cfg_.rotor);
        for (std::size_t i = 0; i < det.served.size(); ++i) {
            TaskOutcome out;
            out.sd = det.served[i];
            out.alloc_hz = actions[n].alloc[i] * w.mec_capacity_hz;
            const double horiz = distance(state_.uav_xy[n], state_.sd_xy[out.sd]);
            const double gain = channel::channel_gain(horiz, w.altitude_m, cfg_.channel);
            out.rate_bps = channel::transmission_rate(gain, cfg_.channel);
            const world::TaskSpec& task = state_.tasks[out.sd];
            if (auto delay = compute::offload_delay(task, out.rate_bps, out.alloc_hz)) {
                out.attempted = true;
                out.delay_s = *delay;
                out.energy_j = compute::computation_energy(task, out.alloc_hz, w.cpu_capacitance);
                out.completed = *delay <= task.deadline_s;
            }
            if (out.completed) state_.offload_counts[out.sd] += 1;
            det.outcomes.push_back(out);
        }
    }

    // (6) Rewards and slot metrics, with post-increment offload counts.
    for (int n = 0; n < w.num_uavs; ++n) {
        const AgentStepDetail& det = result.details[n];
        RewardBreakdown& r = result.rewards[n];
        for (const TaskOutcome& out : det.outcomes) {
            const double fair = compute::fairness_index(state_.offload_counts[out.sd],
                                                        w.fairness_lambda, w.slots_per_episode);
            const double snr = cfg_.channel.tx_power_w *
                               channel::channel_gain(distance(state_.uav_xy[n], state_.sd_xy[out.sd]),
                                                     w.altitude_m, cfg_.channel) /
                               cfg_.channel.noise_power_w;
            r.offload += fair * std::log2(1.0 + snr);
            result.metrics.fairness_sum += fair;
            if (out.attempted) {
                result.metrics.total_delay_s += out.delay_s;
                result.metrics.total_energy_j += out.energy_j;
                r.comp += out.energy_j / kJoulePerKj;
            }
            if (out.completed) {
                r.res += out.alloc_hz / kHzPerGhz;
                result.metrics.offload_count += 1;
            }
        }
        r.num = static_cast<double>(det.served.size());
        const double move_j = det.propulsion_w * w.slot_duration_s;
        r.move = move_j / kJoulePerKj;
        result.metrics.total_energy_j += move_j;
        for (int k = 0; k < w.num_uavs; ++k)
            if (k != n) r.u2u += distance(state_.uav_xy[k], state_.uav_xy[n]) / kMeterPerKm;
        const auto& ww = cfg_.weights.w;
        r.extrinsic = ww[0] * r.offload + ww[1] * r.num + ww[2] * r.res - ww[3] * r.move -
                      ww[4] * r.comp + ww[5] * r.u2u;
    }

    // (7)-(8) Fresh tasks for every SD, advance the slot counter.
    state_.slot += 1;
    if (!done()) generate_slot_tasks();
    result.done = done();
    for (int n = 0; n < w.num_uavs; ++n) result.observations.push_back(observation(n));
    return result;
}

ConstraintReport Environment::check_constraints(std::span<const Action> actions) const {
    const auto& w = cfg_.world;
    ConstraintReport rep;
    auto note = [&rep](std::string msg) { rep.violations.push_back(std::move(msg)); };

    for (std::size_t n = 0; n < actions.size(); ++n) {
        const Action& a = actions[n];
        if (a.theta < 0.0 || a.theta > kTwoPi) {
            rep.theta_ok = false;
            note("heading out of range for uav " + std::to_string(n));
        }
        if (a.dist_m < 0.0 || a.dist_m > w.max_flight_dist_m) {
            rep.dist_ok = false;
            note("flight distance out of range for uav " + std::to_string(n));
        }
        double sum = 0.0;
        for (double frac : a.alloc) {
            const double f = frac * w.mec_capacity_hz;
            if (f < 0.0 || f > w.mec_capacity_hz) {
                rep.alloc_each_ok = false;
                note("allocation out of range for uav " + std::to_string(n));
            }
            sum += f;
        }
        if (sum > w.mec_capacity_hz * (1.0 + 1e-9)) {
            rep.alloc_sum_ok = false;
            note("allocation sum exceeds capacity for uav " + std::to_string(n));
        }
    }

    if (!done() && !rep.violations.empty()) return rep;
    if (done()) return rep;

    Environment clone = *this;
    StepResult step_result = clone.step(actions);
    for (int n = 0; n < w.num_uavs; ++n) {
        const Vec2 p = clone.state().uav_xy[n];
        const Rect region = w.subregion(n);
        if (p.x < region.x0 || p.x > region.x1 || p.x < 0.0 || p.x > w.area_side_m) {
            rep.position_x_ok = false;
            note("x position outside bounds for uav " + std::to_string(n));
        }
        if (p.y < region.y0 || p.y > region.y1 || p.y < 0.0 || p.y > w.area_side_m) {
            rep.position_y_ok = false;
            note("y position outside bounds for uav " + std::to_string(n));
        }
        for (const TaskOutcome& out : step_result.details[n].outcomes) {
            if (!out.completed) {
                rep.deadlines_ok = false;
                note("task of sd " + std::to_string(out.sd) + " missed its deadline");
            }
        }
    }
    return rep;
}

Scenario Scenario::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("scenario: cannot open " + path.string());
    nlohmann::json j = nlohmann::json::parse(in);
    Scenario s;
    for (const auto& p : j.at("sd_xy"))
        s.sd_xy.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    if (j.contains("task_schedule")) {
        for (const auto& row : j.at("task_schedule")) {
            std::vector<world::TaskSpec> tasks;
            for (const auto& t : row)
                tasks.push_back({t.at(0).get<double>(), t.at(1).get<double>(),
                                 t.at(2).get<double>()});
            s.task_schedule.push_back(std::move(tasks));
        }
    }
    return s;
}

void Scenario::save(const std::filesystem::path& path) const {
    nlohmann::json j;
    j["format_version"] = 1;
    for (Vec2 p : sd_xy) j["sd_xy"].push_back({p.x, p.y});
    if (!task_schedule.empty()) {
        for (const auto& row : task_schedule) {
            nlohmann::json jrow = nlohmann::json::array();
            for (const world::TaskSpec& t : row)
                jrow.push_back({t.size_bits, t.cycles_per_bit, t.deadline_s});
            j["task_schedule"].push_back(std::move(jrow));
        }
    }
    std::ofstream out(path);
    out << j.dump(2) << "\n";
}

}  // namespace uavmec::env
