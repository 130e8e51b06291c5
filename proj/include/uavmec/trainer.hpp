#pragma once

#include <filesystem>
#include <span>

#include "uavmec/baselines.hpp"
#include "uavmec/nn.hpp"

namespace uavmec::trainer {

enum class DiscriminatorLossKind { standard_bce, paper_literal };

struct TrainConfig {
    int episodes = 3000;
    int workers = 4;
    int episodes_per_update = 40;
    int epochs_per_update = 10;
    int minibatch_size = 256;
    int expert_batch_size = 256;
    double clip_epsilon = 0.2;
    double discount_gamma = 0.99;
    double gae_lambda = 0.95;
    double intrinsic_scale = 0.1;
    /// Extrinsic rewards are multiplied by this inside the learner only, so
    /// that value targets stay adaptive-step friendly; metrics and evaluation
    /// always report physical returns.
    double reward_scale = 1e-4;
    double actor_lr = 5e-4;
    double critic_lr = 5e-4;
    double discriminator_lr = 5e-4;
    int expert_buffer_episodes = 16;
    bool discriminator_enabled = true;
    DiscriminatorLossKind discriminator_loss = DiscriminatorLossKind::standard_bce;
    double max_grad_norm = 10.0;
    int hidden_dim = 64;
    double log_std_init = -0.6931471805599453;  // ln 0.5
    double log_std_min = -5.0;
    double log_std_max = 2.0;
    int checkpoint_every_updates = 25;
    int final_eval_episodes = 20;

    void validate() const;
};

/// One agent's networks: dual-head actor, critic, discriminator.
struct AgentNets {
    nn::MlpParams actor_flight;
    nn::MlpParams actor_alloc;
    nn::MlpParams critic;
    nn::MlpParams discriminator;
};

AgentNets init_agent_nets(const env::EnvConfig& env_cfg, const TrainConfig& cfg,
                          std::uint64_t seed);

/// Acts by sampling both heads of per-agent actor networks.
class NetPolicy : public baselines::Policy {
public:
    explicit NetPolicy(const std::vector<AgentNets>& nets) : nets_(&nets) {}
    baselines::ActionSample act(const env::Observation& obs, const env::Environment& e,
                                int agent, Rng& rng) override;

private:
    const std::vector<AgentNets>* nets_;
};

struct GaeResult {
    std::vector<double> advantages;
    std::vector<double> returns;
};

/// Generalized advantage estimation over one aligned sequence. Raw values;
/// callers normalize advantages over the full update batch separately.
GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      std::span<const std::uint8_t> dones, double gamma, double lambda);

void normalize_advantages(std::span<double> advantages);

double mixed_reward(double extrinsic, double intrinsic, double alpha);

/// log D(o, a1, a2), computed from the pre-sigmoid logit for stability.
double intrinsic_reward(const nn::MlpParams& disc, std::span<const double> disc_input);

struct DiscriminatorBatch {
    std::vector<const std::vector<double>*> agent_inputs;
    std::vector<const std::vector<double>*> expert_inputs;
};

double discriminator_loss_value(const nn::MlpParams& disc, const DiscriminatorBatch& batch,
                                DiscriminatorLossKind kind);

/// Loss and its exact gradients (descent direction) without stepping.
double discriminator_gradients(const nn::MlpParams& disc, const DiscriminatorBatch& batch,
                               DiscriminatorLossKind kind, nn::MlpGrads& out);

/// One gradient step; returns the pre-step loss value.
double discriminator_update(nn::MlpParams& disc, nn::AdamState& opt,
                            const DiscriminatorBatch& batch, DiscriminatorLossKind kind,
                            const nn::AdamConfig& adam, double max_grad_norm);

/// Per-sample input of an actor minibatch.
struct ActorSample {
    const std::vector<double>* features = nullptr;
    const std::array<double, 2>* flight_raw = nullptr;
    const std::vector<double>* alloc = nullptr;
    double logp_old_flight = 0.0;
    double logp_old_alloc = 0.0;
    double advantage = 0.0;
};

/// Clipped-surrogate objective for one head: mean_b min(r*A, clip(r)*A).
double clipped_surrogate(double ratio, double advantage, double epsilon);

struct ActorUpdateStats {
    double flight_objective = 0.0;
    double alloc_objective = 0.0;
    int skipped_nonfinite = 0;
};

/// Mean clipped-surrogate objective of one head and its ascent-direction
/// gradients. `head` selects whether the Gaussian flight head or the
/// Dirichlet allocation head of the samples is evaluated.
double actor_head_gradients(const nn::MlpParams& params, std::span<const ActorSample> batch,
                            double clip_epsilon, bool flight_head, nn::MlpGrads& out,
                            int* skipped_nonfinite = nullptr);

/// Ascends the clipped surrogate of both heads independently (one Adam step
/// each). Non-finite ratios are skipped and counted.
ActorUpdateStats actor_update(nn::MlpParams& flight, nn::AdamState& flight_opt,
                              nn::MlpParams& alloc, nn::AdamState& alloc_opt,
                              std::span<const ActorSample> batch, const TrainConfig& cfg);

/// Loss L = (1/2B) sum (V(o) - R)^2 and its gradients without stepping.
double critic_gradients(const nn::MlpParams& critic,
                        std::span<const std::vector<double>*> features,
                        std::span<const double> returns, nn::MlpGrads& out);

/// One step on the critic MSE; returns the pre-step loss.
double critic_update(nn::MlpParams& critic, nn::AdamState& opt,
                     std::span<const std::vector<double>*> features,
                     std::span<const double> returns, const nn::AdamConfig& adam,
                     double max_grad_norm);

/// Whole-episode store of expert (o, a1, a2) tuples with median admission.
class ExpertBuffer {
public:
    explicit ExpertBuffer(int capacity_episodes) : capacity_(capacity_episodes) {}

    /// Admits when the buffer is not full or the return beats the median of
    /// stored episode returns; eviction removes the lowest-return episode.
    bool admit(double episode_return, std::vector<std::vector<double>> tuples);

    bool empty() const { return episodes_.empty(); }
    int size_episodes() const { return static_cast<int>(episodes_.size()); }
    std::size_t size_tuples() const;
    double median_return() const;
    double min_return() const;
    const std::vector<double>& sample(Rng& rng) const;

private:
    struct Episode {
        double episode_return;
        std::vector<std::vector<double>> tuples;
    };
    std::vector<Episode> episodes_;
    int capacity_;
};

/// Rollouts of one update round, ordered by global episode index regardless
/// of worker count.
struct RolloutRound {
    std::vector<baselines::EpisodeRecord> episodes;
};

RolloutRound collect_rollouts(const env::EnvConfig& env_cfg,
                              const std::vector<AgentNets>& snapshot, int episodes, int workers,
                              std::uint64_t run_seed, int first_episode_index);

struct UpdateLog {
    double actor_flight_objective = 0.0;
    double actor_alloc_objective = 0.0;
    double critic_loss = 0.0;
    double discriminator_loss = 0.0;
    int skipped_nonfinite = 0;
};

class Trainer {
public:
    Trainer(env::EnvConfig env_cfg, TrainConfig cfg, std::uint64_t seed,
            nlohmann::json checkpoint_manifest = {});

    /// Full training loop. Writes metrics.csv and checkpoints into `out_dir`
    /// and returns the final networks.
    std::vector<AgentNets> run(const std::filesystem::path& out_dir);

    const std::vector<AgentNets>& nets() const { return nets_; }

    /// Performs the per-agent update for one collected round (exposed for the
    /// flag-identity and determinism tests).
    UpdateLog update_round(const RolloutRound& round, int round_index);

private:
    UpdateLog update_agent(const RolloutRound& round, int round_index, int agent);
    void save_checkpoint(const std::filesystem::path& path) const;

    env::EnvConfig env_cfg_;
    TrainConfig cfg_;
    std::uint64_t seed_;
    nlohmann::json manifest_;
    std::vector<AgentNets> nets_;
    struct AgentOptims {
        nn::AdamState actor_flight;
        nn::AdamState actor_alloc;
        nn::AdamState critic;
        nn::AdamState discriminator;
    };
    std::vector<AgentOptims> optims_;
    std::vector<ExpertBuffer> expert_;
};

/// Checkpoint file round-tripping all agent networks plus an arbitrary
/// manifest (the resolved experiment config in practice).
void save_agents(const std::filesystem::path& path, const std::vector<AgentNets>& nets,
                 const nlohmann::json& manifest);
std::pair<std::vector<AgentNets>, nlohmann::json> load_agents(
    const std::filesystem::path& path);

}  // namespace uavmec::trainer
