#include "uavmec/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>

namespace uavmec::cli {

namespace {

/// Population coefficient of variation of per-SD offload counts; NaN when no
/// task was offloaded at all.
double offload_count_cv(const std::vector<int>& counts) {
    if (counts.empty()) return std::nan("");
    double mean = 0.0;
    for (int c : counts) mean += c;
    mean /= counts.size();
    if (!(mean > 0.0)) return std::nan("");
    double var = 0.0;
    for (int c : counts) var += (c - mean) * (c - mean);
    var /= counts.size();
    return std::sqrt(var) / mean;
}

nlohmann::json trace_record(int episode, int slot, int agent,
                            const baselines::EpisodeRecord& rec) {
    const env::AgentStepDetail& det = rec.details[slot][agent];
    const env::RewardBreakdown& r = rec.rewards[slot][agent];
    const baselines::ActionSample& a = rec.actions[slot][agent];
    nlohmann::json jr;
    jr["episode"] = episode;
    jr["slot"] = slot + 1;
    jr["agent"] = agent;
    jr["x"] = rec.positions[slot][agent].x;
    jr["y"] = rec.positions[slot][agent].y;
    jr["theta"] = a.decoded.theta;
    jr["d"] = a.decoded.dist_m;
    jr["alloc"] = a.decoded.alloc;
    jr["served"] = det.served;
    jr["reward"] = {{"offload", r.offload}, {"num", r.num},   {"res", r.res},
                    {"move", r.move},       {"comp", r.comp}, {"u2u", r.u2u},
                    {"extrinsic", r.extrinsic}};
    return jr;
}

}  // namespace

EvalOutcome evaluate(const env::EnvConfig& cfg, baselines::Policy& policy, int episodes,
                     std::uint64_t seed, const env::Scenario* scenario,
                     const std::filesystem::path& out_dir) {
    std::ofstream metrics_out;
    std::ofstream trace_out;
    const bool writing = !out_dir.empty();
    if (writing) {
        std::filesystem::create_directories(out_dir);
        metrics_out.open(out_dir / "eval_metrics.csv");
        trace_out.open(out_dir / "trace.jsonl");
        metrics_out << "# uavmec-eval-v1\n";
        metrics_out << "episode,mean_return,fairness_total,delay_total_s,energy_total_j,"
                       "offload_total,offload_cv\n";
    }

    EvalOutcome outcome;
    double cv_sum = 0.0;
    auto sink = [&](const baselines::EpisodeRecord& rec) {
        double mean_return = 0.0;
        for (double r : rec.agent_returns) mean_return += r / rec.agent_returns.size();
        outcome.per_episode_returns.push_back(mean_return);
        outcome.mean_return += mean_return / episodes;
        outcome.mean_offload_total += static_cast<double>(rec.metrics.offload_total) / episodes;
        const double cv = offload_count_cv(rec.final_offload_counts);
        if (std::isfinite(cv)) {
            cv_sum += cv;
            outcome.episodes_with_offloads += 1;
        }
        if (writing) {
            metrics_out << rec.episode_index << ',' << double_to_string(mean_return) << ','
                        << double_to_string(rec.metrics.fairness_total) << ','
                        << double_to_string(rec.metrics.delay_total_s) << ','
                        << double_to_string(rec.metrics.energy_total_j) << ','
                        << rec.metrics.offload_total << ','
                        << (std::isfinite(cv) ? double_to_string(cv) : "nan") << '\n';
            for (std::size_t t = 0; t < rec.details.size(); ++t)
                for (std::size_t n = 0; n < rec.details[t].size(); ++n)
                    trace_out << trace_record(rec.episode_index, t, n, rec).dump() << '\n';
        }
    };
    baselines::evaluate_policy(cfg, policy, episodes, seed, scenario, sink);
    outcome.offload_cv_mean =
        outcome.episodes_with_offloads > 0 ? cv_sum / outcome.episodes_with_offloads
                                           : std::nan("");
    return outcome;
}

int run_train(const TrainOptions& opt) {
    try {
        ExperimentConfig cfg = opt.config_path.empty() ? ExperimentConfig::defaults()
                                                       : ExperimentConfig::load(opt.config_path);
        if (opt.seed) cfg.seed = *opt.seed;
        if (opt.workers) cfg.train.workers = *opt.workers;
        cfg.validate();

        const std::filesystem::path out =
            opt.out_dir.empty() ? std::filesystem::path("runs") / (cfg.run_tag + "-" +
                                                                   std::to_string(cfg.seed))
                                : opt.out_dir;
        std::filesystem::create_directories(out);
        cfg.save(out / "resolved_config.json");

        trainer::Trainer t(cfg.env_cfg, cfg.train, cfg.seed, cfg.to_json());
        std::vector<trainer::AgentNets> nets = t.run(out);

        if (cfg.train.final_eval_episodes > 0) {
            trainer::NetPolicy policy(nets);
            EvalOutcome eval = evaluate(cfg.env_cfg, policy, cfg.train.final_eval_episodes,
                                        derive_seed(cfg.seed, "final-eval"), nullptr, {});
            nlohmann::json summary;
            summary["format_version"] = 1;
            summary["episodes"] = cfg.train.final_eval_episodes;
            summary["mean_return"] = eval.mean_return;
            summary["mean_offload_total"] = eval.mean_offload_total;
            std::ofstream(out / "eval_summary.json") << summary.dump(2) << "\n";
        }
        std::cout << "train: run complete, outputs in " << out.string() << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "train: error: " << e.what() << "\n";
        return 1;
    }
}

int run_eval(const EvalOptions& opt) {
    try {
        std::optional<ExperimentConfig> cfg;
        std::vector<trainer::AgentNets> nets;
        if (opt.policy == "checkpoint") {
            if (opt.checkpoint.empty())
                throw ConfigError("eval: --checkpoint required for policy=checkpoint");
            auto [loaded, manifest] = trainer::load_agents(opt.checkpoint);
            nets = std::move(loaded);
            if (manifest.is_null())
                throw ConfigError("eval: checkpoint lacks an embedded config manifest");
            cfg = ExperimentConfig::from_json(manifest);
            const int obs_dim = env::ObservationLayout::dim(cfg->env_cfg);
            for (const trainer::AgentNets& a : nets)
                if (a.actor_flight.input_dim != obs_dim)
                    throw ConfigError("eval: checkpoint dimensions do not match the config");
        } else if (opt.policy == "random" || opt.policy == "greedy") {
            cfg = opt.config_path.empty() ? ExperimentConfig::defaults()
                                          : ExperimentConfig::load(opt.config_path);
        } else {
            throw ConfigError("eval: --policy must be random, greedy, or checkpoint");
        }
        if (opt.seed) cfg->seed = *opt.seed;

        std::optional<env::Scenario> scenario;
        if (!opt.scenario.empty()) scenario = env::Scenario::load(opt.scenario);
        if (scenario && static_cast<int>(scenario->sd_xy.size()) != cfg->env_cfg.world.num_sds)
            throw ConfigError("eval: scenario SD count does not match the config");

        const std::filesystem::path out =
            opt.out_dir.empty() ? std::filesystem::path("eval-out") : opt.out_dir;

        std::unique_ptr<baselines::Policy> policy;
        if (opt.policy == "random") policy = std::make_unique<baselines::RandomPolicy>();
        else if (opt.policy == "greedy") policy = std::make_unique<baselines::GreedyPolicy>();
        else policy = std::make_unique<trainer::NetPolicy>(nets);

        EvalOutcome outcome =
            evaluate(cfg->env_cfg, *policy, opt.episodes, derive_seed(cfg->seed, "eval"),
                     scenario ? &*scenario : nullptr, out);

        nlohmann::json summary;
        summary["format_version"] = 1;
        summary["policy"] = opt.policy;
        summary["episodes"] = opt.episodes;
        summary["seed"] = cfg->seed;
        summary["mean_return"] = outcome.mean_return;
        summary["mean_offload_total"] = outcome.mean_offload_total;
        if (std::isfinite(outcome.offload_cv_mean))
            summary["offload_cv_mean"] = outcome.offload_cv_mean;
        else
            summary["offload_cv_mean"] = nullptr;
        std::ofstream(out / "eval_summary.json") << summary.dump(2) << "\n";
        std::cout << "eval: mean extrinsic return " << double_to_string(outcome.mean_return)
                  << " over " << opt.episodes << " episodes; outputs in " << out.string() << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "eval: error: " << e.what() << "\n";
        return 1;
    }
}

int run_oracle_check(const OracleOptions& opt) {
    try {
        ExperimentConfig cfg = opt.config_path.empty() ? ExperimentConfig::defaults()
                                                       : ExperimentConfig::load(opt.config_path);
        if (opt.seed) cfg.seed = *opt.seed;
        env::Scenario scenario = env::Scenario::load(opt.scenario);

        env::Environment e(cfg.env_cfg);
        e.reset(scenario, derive_seed(cfg.seed, "oracle"));

        baselines::OracleConfig ocfg;
        ocfg.theta_points = opt.theta_points;
        ocfg.dist_points = opt.dist_points;
        ocfg.simplex_denominator = opt.simplex_denominator;

        baselines::OracleResult best = baselines::brute_force_step_oracle(e, 0, ocfg);

        // Reward parity: replay the argmax action through a fresh clone.
        std::vector<env::Action> actions(cfg.env_cfg.world.num_uavs);
        for (auto& a : actions) a.alloc.assign(cfg.env_cfg.world.max_served_sds,
                                               1.0 / cfg.env_cfg.world.max_served_sds);
        actions[0] = best.best_action;
        env::Environment clone = e;
        env::StepResult replay = clone.step(actions);
        const bool parity_ok = replay.rewards[0].extrinsic == best.best_reward.extrinsic;

        // Argmax invariance under positive (power-of-two) weight rescaling.
        env::EnvConfig scaled_cfg = cfg.env_cfg;
        for (double& wv : scaled_cfg.weights.w) wv *= 4.0;
        env::Environment scaled_env(scaled_cfg);
        scaled_env.reset(scenario, derive_seed(cfg.seed, "oracle"));
        baselines::OracleResult scaled = baselines::brute_force_step_oracle(scaled_env, 0, ocfg);
        const bool rescale_ok = scaled.best_action.theta == best.best_action.theta &&
                                scaled.best_action.dist_m == best.best_action.dist_m &&
                                scaled.best_action.alloc == best.best_action.alloc;

        nlohmann::json report;
        report["format_version"] = 1;
        report["enumerated"] = best.enumerated;
        report["argmax"] = {{"theta", best.best_action.theta},
                            {"d", best.best_action.dist_m},
                            {"alloc", best.best_action.alloc}};
        report["best_extrinsic"] = best.best_reward.extrinsic;
        report["reward_parity_ok"] = parity_ok;
        report["rescale_invariance_ok"] = rescale_ok;
        const std::string text = report.dump(2);
        std::cout << text << "\n";
        if (!opt.out_path.empty()) std::ofstream(opt.out_path) << text << "\n";
        return (parity_ok && rescale_ok) ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "oracle-check: error: " << e.what() << "\n";
        return 2;
    }
}

int run_validate_config(const std::filesystem::path& config_path) {
    try {
        ExperimentConfig cfg = ExperimentConfig::load(config_path);
        std::cout << cfg.to_json().dump(2) << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "validate-config: error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace uavmec::cli
