#include <CLI11.hpp>

#include "uavmec/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"uavmec: multi-UAV MEC simulator and DPPOIL trainer"};
    app.require_subcommand(1);

    uavmec::cli::TrainOptions train_opt;
    std::uint64_t seed_flag = 0;
    int workers_flag = 0;
    CLI::App* train = app.add_subcommand("train", "train a policy");
    train->add_option("--config", train_opt.config_path, "experiment config file");
    CLI::Option* train_seed = train->add_option("--seed", seed_flag, "override config seed");
    CLI::Option* train_workers =
        train->add_option("--workers", workers_flag, "override rollout worker count");
    train->add_option("--out", train_opt.out_dir, "run output directory");

    uavmec::cli::EvalOptions eval_opt;
    std::uint64_t eval_seed_flag = 0;
    CLI::App* eval = app.add_subcommand("eval", "evaluate a frozen policy");
    eval->add_option("--policy", eval_opt.policy, "random | greedy | checkpoint")
        ->check(CLI::IsMember({"random", "greedy", "checkpoint"}));
    eval->add_option("--checkpoint", eval_opt.checkpoint, "checkpoint file");
    eval->add_option("--config", eval_opt.config_path, "config for baseline policies");
    eval->add_option("--scenario", eval_opt.scenario, "fixed scenario file");
    eval->add_option("--episodes", eval_opt.episodes, "evaluation episodes");
    CLI::Option* eval_seed = eval->add_option("--seed", eval_seed_flag, "evaluation seed");
    eval->add_option("--out", eval_opt.out_dir, "output directory");

    uavmec::cli::OracleOptions oracle_opt;
    std::uint64_t oracle_seed_flag = 0;
    CLI::App* oracle = app.add_subcommand("oracle-check", "brute-force single-step cross-check");
    oracle->add_option("--scenario", oracle_opt.scenario, "small scenario file")->required();
    oracle->add_option("--config", oracle_opt.config_path, "experiment config file");
    CLI::Option* oracle_seed = oracle->add_option("--seed", oracle_seed_flag, "episode seed");
    oracle->add_option("--grid-theta", oracle_opt.theta_points, "heading grid points");
    oracle->add_option("--grid-d", oracle_opt.dist_points, "distance grid points");
    oracle->add_option("--simplex-denominator", oracle_opt.simplex_denominator,
                       "allocation lattice denominator");
    oracle->add_option("--out", oracle_opt.out_path, "report file");

    std::filesystem::path validate_path;
    CLI::App* validate = app.add_subcommand("validate-config", "check and resolve a config");
    validate->add_option("--config", validate_path, "config file")->required();

    CLI11_PARSE(app, argc, argv);

    if (*train) {
        if (*train_seed) train_opt.seed = seed_flag;
        if (*train_workers) train_opt.workers = workers_flag;
        return uavmec::cli::run_train(train_opt);
    }
    if (*eval) {
        if (*eval_seed) eval_opt.seed = eval_seed_flag;
        return uavmec::cli::run_eval(eval_opt);
    }
    if (*oracle) {
        if (*oracle_seed) oracle_opt.seed = oracle_seed_flag;
        return uavmec::cli::run_oracle_check(oracle_opt);
    }
    if (*validate) return uavmec::cli::run_validate_config(validate_path);
    return 1;
}
