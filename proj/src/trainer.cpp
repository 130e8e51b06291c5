#include "uavmec/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <thread>

namespace uavmec::trainer {

namespace {

void require_finite_loss(double v, const char* what) {
    if (!std::isfinite(v))
        throw std::runtime_error(std::string("trainer: non-finite ") + what);
}

void fisher_yates(std::vector<std::size_t>& idx, Rng& rng) {
    for (std::size_t i = idx.size(); i > 1; --i) {
        const std::size_t j = rng.index(i);
        std::swap(idx[i - 1], idx[j]);
    }
}

}  // namespace

void TrainConfig::validate() const {
    if (episodes < 1) throw ConfigError("train: episodes must be >= 1");
    if (workers < 1) throw ConfigError("train: workers must be >= 1");
    if (episodes_per_update < 1) throw ConfigError("train: episodes_per_update must be >= 1");
    if (epochs_per_update < 1) throw ConfigError("train: epochs_per_update must be >= 1");
    if (minibatch_size < 1) throw ConfigError("train: minibatch_size must be >= 1");
    if (expert_batch_size < 1) throw ConfigError("train: expert_batch_size must be >= 1");
    if (!(clip_epsilon > 0.0) || !(clip_epsilon < 1.0))
        throw ConfigError("train: clip_epsilon must be in (0, 1)");
    if (!(discount_gamma > 0.0) || discount_gamma > 1.0)
        throw ConfigError("train: discount_gamma must be in (0, 1]");
    if (gae_lambda < 0.0 || gae_lambda > 1.0)
        throw ConfigError("train: gae_lambda must be in [0, 1]");
    if (intrinsic_scale < 0.0) throw ConfigError("train: intrinsic_scale must be >= 0");
    if (!(reward_scale > 0.0)) throw ConfigError("train: reward_scale must be > 0");
    if (!(actor_lr > 0.0) || !(critic_lr > 0.0) || !(discriminator_lr > 0.0))
        throw ConfigError("train: learning rates must be > 0");
    if (expert_buffer_episodes < 1) throw ConfigError("train: expert_buffer_episodes must be >= 1");
    if (!(max_grad_norm > 0.0)) throw ConfigError("train: max_grad_norm must be > 0");
    if (hidden_dim < 1) throw ConfigError("train: hidden_dim must be >= 1");
    if (!(log_std_min < log_std_max)) throw ConfigError("train: log_std bounds inverted");
    if (checkpoint_every_updates < 1)
        throw ConfigError("train: checkpoint_every_updates must be >= 1");
    if (final_eval_episodes < 0) throw ConfigError("train: final_eval_episodes must be >= 0");
}

AgentNets init_agent_nets(const env::EnvConfig& env_cfg, const TrainConfig& cfg,
                          std::uint64_t seed) {
    const int obs_dim = env::ObservationLayout::dim(env_cfg);
    const int alloc_dim = env_cfg.world.max_served_sds;
    AgentNets nets;
    {
        Rng rng(derive_seed(seed, "init-flight"));
        nets.actor_flight = nn::MlpParams::init(nn::HeadKind::gaussian, obs_dim, 2,
                                                cfg.hidden_dim, rng, cfg.log_std_init);
    }
    {
        Rng rng(derive_seed(seed, "init-alloc"));
        nets.actor_alloc =
            nn::MlpParams::init(nn::HeadKind::dirichlet, obs_dim, alloc_dim, cfg.hidden_dim, rng);
    }
    {
        Rng rng(derive_seed(seed, "init-critic"));
        nets.critic = nn::MlpParams::init(nn::HeadKind::value, obs_dim, 1, cfg.hidden_dim, rng);
    }
    {
        Rng rng(derive_seed(seed, "init-disc"));
        nets.discriminator = nn::MlpParams::init(nn::HeadKind::discriminator,
                                                 obs_dim + 2 + alloc_dim, 1, cfg.hidden_dim, rng);
    }
    return nets;
}

baselines::ActionSample NetPolicy::act(const env::Observation& obs, const env::Environment& e,
                                       int agent, Rng& rng) {
    const AgentNets& nets = (*nets_)[agent];
    const std::vector<double> features = env::policy_features(obs, e.config());

    baselines::ActionSample s;
    const std::vector<double> mean = nn::mlp_forward(nets.actor_flight, features);
    const std::vector<double> raw =
        nn::gaussian_sample(mean, nets.actor_flight.log_std, rng);
    s.flight_raw = {raw[0], raw[1]};
    s.logp_flight = nn::gaussian_log_prob(mean, nets.actor_flight.log_std, raw);

    const std::vector<double> alphas = nn::mlp_forward(nets.actor_alloc, features);
    s.alloc = nn::dirichlet_sample(alphas, rng);
    s.logp_alloc = nn::dirichlet_log_prob(alphas, s.alloc);

    s.decoded = env::decode_action(raw, s.alloc, e.config());
    s.has_raw = true;
    return s;
}

GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      std::span<const std::uint8_t> dones, double gamma, double lambda) {
    if (rewards.size() != values.size() || rewards.size() != dones.size())
        throw std::invalid_argument("compute_gae: misaligned sequences");
    const std::size_t n = rewards.size();
    GaeResult out;
    out.advantages.assign(n, 0.0);
    out.returns.assign(n, 0.0);
    double last_gae = 0.0;
    for (std::size_t i = n; i-- > 0;) {
        const double not_done = dones[i] ? 0.0 : 1.0;
        const double next_value = (i + 1 < n) ? values[i + 1] : 0.0;
        const double delta = rewards[i] + gamma * next_value * not_done - values[i];
        last_gae = delta + gamma * lambda * not_done * last_gae;
        out.advantages[i] = last_gae;
        out.returns[i] = out.advantages[i] + values[i];
    }
    return out;
}

void normalize_advantages(std::span<double> advantages) {
    if (advantages.empty()) return;
    double mean = 0.0;
    for (double a : advantages) mean += a;
    mean /= advantages.size();
    double var = 0.0;
    for (double a : advantages) var += (a - mean) * (a - mean);
    var /= advantages.size();
    const double denom = std::sqrt(var) + 1e-8;
    for (double& a : advantages) a = (a - mean) / denom;
}

double mixed_reward(double extrinsic, double intrinsic, double alpha) {
    return extrinsic + alpha * intrinsic;
}

double intrinsic_reward(const nn::MlpParams& disc, std::span<const double> disc_input) {
    nn::ForwardCache cache;
    nn::mlp_forward(disc, disc_input, &cache);
    return -softplus(-cache.head_in[0]);  // log sigmoid(z)
}

double discriminator_loss_value(const nn::MlpParams& disc, const DiscriminatorBatch& batch,
                                DiscriminatorLossKind kind) {
    double agent_term = 0.0;
    for (const auto* in : batch.agent_inputs) {
        nn::ForwardCache cache;
        nn::mlp_forward(disc, *in, &cache);
        const double z = cache.head_in[0];
        agent_term += (kind == DiscriminatorLossKind::standard_bce)
                          ? softplus(z)     // -log(1 - D)
                          : softplus(-z);   // -log D
    }
    agent_term /= batch.agent_inputs.size();
    double expert_term = 0.0;
    for (const auto* in : batch.expert_inputs) {
        nn::ForwardCache cache;
        nn::mlp_forward(disc, *in, &cache);
        const double z = cache.head_in[0];
        expert_term += (kind == DiscriminatorLossKind::standard_bce)
                           ? softplus(-z)             // -log D
                           : -softplus(-z) - 1.0;     // -(1 - log D) = log D - 1
    }
    expert_term /= batch.expert_inputs.size();
    return agent_term + expert_term;
}

double discriminator_gradients(const nn::MlpParams& disc, const DiscriminatorBatch& batch,
                               DiscriminatorLossKind kind, nn::MlpGrads& out) {
    if (batch.agent_inputs.empty() || batch.expert_inputs.empty())
        throw std::invalid_argument("discriminator update: both batches must be nonempty");
    const double inv_b = 1.0 / batch.agent_inputs.size();
    const double inv_bt = 1.0 / batch.expert_inputs.size();
    for (const auto* in : batch.agent_inputs) {
        nn::ForwardCache cache;
        const double d = nn::mlp_forward(disc, *in, &cache)[0];
        const double dz = (kind == DiscriminatorLossKind::standard_bce)
                              ? d * inv_b           // d/dz -log(1-D)
                              : (d - 1.0) * inv_b;  // d/dz -log D
        nn::mlp_backward(disc, cache, std::array{dz}, out);
    }
    for (const auto* in : batch.expert_inputs) {
        nn::ForwardCache cache;
        const double d = nn::mlp_forward(disc, *in, &cache)[0];
        const double dz = (kind == DiscriminatorLossKind::standard_bce)
                              ? (d - 1.0) * inv_bt  // d/dz -log D
                              : (1.0 - d) * inv_bt; // d/dz (log D - 1)
        nn::mlp_backward(disc, cache, std::array{dz}, out);
    }
    return discriminator_loss_value(disc, batch, kind);
}

double discriminator_update(nn::MlpParams& disc, nn::AdamState& opt,
                            const DiscriminatorBatch& batch, DiscriminatorLossKind kind,
                            const nn::AdamConfig& adam, double max_grad_norm) {
    nn::MlpGrads grads = nn::MlpGrads::zeros_like(disc);
    const double loss = discriminator_gradients(disc, batch, kind, grads);
    require_finite_loss(loss, "discriminator loss");
    nn::clip_grad_norm(grads, max_grad_norm);
    nn::adam_update(disc, grads, opt, adam);
    return loss;
}

double clipped_surrogate(double ratio, double advantage, double epsilon) {
    const double unclipped = ratio * advantage;
    const double clipped = std::clamp(ratio, 1.0 - epsilon, 1.0 + epsilon) * advantage;
    return std::min(unclipped, clipped);
}

double actor_head_gradients(const nn::MlpParams& params, std::span<const ActorSample> batch,
                            double clip_epsilon, bool flight_head, nn::MlpGrads& out,
                            int* skipped_nonfinite) {
    double obj_sum = 0.0;
    int used = 0;
    for (const ActorSample& s : batch) {
        nn::ForwardCache cache;
        const std::vector<double> head_out = nn::mlp_forward(params, *s.features, &cache);
        double logp, logp_old;
        if (flight_head) {
            logp = nn::gaussian_log_prob(head_out, params.log_std, *s.flight_raw);
            logp_old = s.logp_old_flight;
        } else {
            logp = nn::dirichlet_log_prob(head_out, *s.alloc);
            logp_old = s.logp_old_alloc;
        }
        const double ratio = std::exp(logp - logp_old);
        if (!std::isfinite(ratio)) {
            if (skipped_nonfinite) *skipped_nonfinite += 1;
            continue;
        }
        obj_sum += clipped_surrogate(ratio, s.advantage, clip_epsilon);
        used += 1;
        const double unclipped = ratio * s.advantage;
        const double clipped =
            std::clamp(ratio, 1.0 - clip_epsilon, 1.0 + clip_epsilon) * s.advantage;
        // Gradient flows only through the branch the min selects; ties fall
        // inside the clip interval where both branches coincide.
        if (unclipped <= clipped) {
            const double coeff = ratio * s.advantage;
            if (flight_head) {
                std::vector<double> d_mean(head_out.size(), 0.0);
                nn::gaussian_log_prob_backward(head_out, params.log_std, *s.flight_raw, coeff,
                                               d_mean, out.log_std);
                nn::mlp_backward(params, cache, d_mean, out);
            } else {
                std::vector<double> d_alpha(head_out.size(), 0.0);
                nn::dirichlet_log_prob_backward(head_out, *s.alloc, coeff, d_alpha);
                std::vector<double> d_head(head_out.size(), 0.0);
                nn::dirichlet_alpha_backward(cache.head_in, d_alpha, d_head);
                nn::mlp_backward(params, cache, d_head, out);
            }
        }
    }
    if (used > 0) {
        out.scale(1.0 / used);
        return obj_sum / used;
    }
    return 0.0;
}

ActorUpdateStats actor_update(nn::MlpParams& flight, nn::AdamState& flight_opt,
                              nn::MlpParams& alloc, nn::AdamState& alloc_opt,
                              std::span<const ActorSample> batch, const TrainConfig& cfg) {
    ActorUpdateStats stats;
    const nn::AdamConfig adam{cfg.actor_lr};
    {
        nn::MlpGrads grads = nn::MlpGrads::zeros_like(flight);
        stats.flight_objective = actor_head_gradients(flight, batch, cfg.clip_epsilon, true,
                                                      grads, &stats.skipped_nonfinite);
        grads.scale(-1.0);  // ascend the surrogate
        nn::clip_grad_norm(grads, cfg.max_grad_norm);
        nn::adam_update(flight, grads, flight_opt, adam);
        nn::clamp_log_std(flight, cfg.log_std_min, cfg.log_std_max);
    }
    {
        nn::MlpGrads grads = nn::MlpGrads::zeros_like(alloc);
        stats.alloc_objective = actor_head_gradients(alloc, batch, cfg.clip_epsilon, false,
                                                     grads, &stats.skipped_nonfinite);
        grads.scale(-1.0);
        nn::clip_grad_norm(grads, cfg.max_grad_norm);
        nn::adam_update(alloc, grads, alloc_opt, adam);
    }
    return stats;
}

double critic_gradients(const nn::MlpParams& critic,
                        std::span<const std::vector<double>*> features,
                        std::span<const double> returns, nn::MlpGrads& out) {
    double loss = 0.0;
    const double inv_b = 1.0 / features.size();
    for (std::size_t i = 0; i < features.size(); ++i) {
        nn::ForwardCache cache;
        const double v = nn::mlp_forward(critic, *features[i], &cache)[0];
        const double err = v - returns[i];
        loss += 0.5 * err * err * inv_b;
        nn::mlp_backward(critic, cache, std::array{err * inv_b}, out);
    }
    return loss;
}

double critic_update(nn::MlpParams& critic, nn::AdamState& opt,
                     std::span<const std::vector<double>*> features,
                     std::span<const double> returns, const nn::AdamConfig& adam,
                     double max_grad_norm) {
    if (features.empty()) return 0.0;
    nn::MlpGrads grads = nn::MlpGrads::zeros_like(critic);
    const double loss = critic_gradients(critic, features, returns, grads);
    require_finite_loss(loss, "critic loss");
    nn::clip_grad_norm(grads, max_grad_norm);
    nn::adam_update(critic, grads, opt, adam);
    return loss;
}

bool ExpertBuffer::admit(double episode_return, std::vector<std::vector<double>> tuples) {
    if (static_cast<int>(episodes_.size()) < capacity_) {
        episodes_.push_back({episode_return, std::move(tuples)});
        return true;
    }
    if (!(episode_return > median_return())) return false;
    std::size_t lowest = 0;
    for (std::size_t i = 1; i < episodes_.size(); ++i)
        if (episodes_[i].episode_return < episodes_[lowest].episode_return) lowest = i;
    episodes_[lowest] = {episode_return, std::move(tuples)};
    return true;
}

std::size_t ExpertBuffer::size_tuples() const {
    std::size_t n = 0;
    for (const Episode& e : episodes_) n += e.tuples.size();
    return n;
}

double ExpertBuffer::median_return() const {
    if (episodes_.empty()) throw std::logic_error("expert buffer: median of empty buffer");
    std::vector<double> returns;
    returns.reserve(episodes_.size());
    for (const Episode& e : episodes_) returns.push_back(e.episode_return);
    std::sort(returns.begin(), returns.end());
    const std::size_t n = returns.size();
    return (n % 2 == 1) ? returns[n / 2] : 0.5 * (returns[n / 2 - 1] + returns[n / 2]);
}

double ExpertBuffer::min_return() const {
    double lo = episodes_.front().episode_return;
    for (const Episode& e : episodes_) lo = std::min(lo, e.episode_return);
    return lo;
}

const std::vector<double>& ExpertBuffer::sample(Rng& rng) const {
    const std::size_t total = size_tuples();
    if (total == 0) throw std::logic_error("expert buffer: sample from empty buffer");
    std::size_t k = rng.index(total);
    for (const Episode& e : episodes_) {
        if (k < e.tuples.size()) return e.tuples[k];
        k -= e.tuples.size();
    }
    return episodes_.back().tuples.back();
}

RolloutRound collect_rollouts(const env::EnvConfig& env_cfg,
                              const std::vector<AgentNets>& snapshot, int episodes, int workers,
                              std::uint64_t run_seed, int first_episode_index) {
    RolloutRound round;
    round.episodes.resize(episodes);
    workers = std::min(workers, episodes);

    // Block partition by global episode index: merged order (and all seeds)
    // are invariant to the worker count.
    const int base = episodes / workers;
    const int rem = episodes % workers;
    std::vector<std::exception_ptr> failures(workers);

    auto work = [&](int w, int begin, int end) {
        try {
            NetPolicy policy(snapshot);
            env::Environment e(env_cfg);
            for (int ep = begin; ep < end; ++ep) {
                const std::uint64_t ep_abs = static_cast<std::uint64_t>(first_episode_index + ep);
                baselines::EpisodeRecord rec =
                    run_episode(e, policy, derive_seed(run_seed, "env", ep_abs),
                                derive_seed(run_seed, "policy", ep_abs));
                rec.episode_index = first_episode_index + ep;
                round.episodes[ep] = std::move(rec);
            }
        } catch (...) {
            failures[w] = std::current_exception();
        }
    };

    if (workers <= 1) {
        work(0, 0, episodes);
    } else {
        std::vector<std::thread> threads;
        int begin = 0;
        for (int w = 0; w < workers; ++w) {
            const int count = base + (w < rem ? 1 : 0);
            threads.emplace_back(work, w, begin, begin + count);
            begin += count;
        }
        for (auto& t : threads) t.join();
    }
    for (int w = 0; w < workers; ++w) {
        if (failures[w]) {
            try {
                std::rethrow_exception(failures[w]);
            } catch (const std::exception& ex) {
                throw std::runtime_error("collect_rollouts: worker " + std::to_string(w) +
                                         " failed: " + ex.what());
            }
        }
    }
    return round;
}

Trainer::Trainer(env::EnvConfig env_cfg, TrainConfig cfg, std::uint64_t seed,
                 nlohmann::json checkpoint_manifest)
    : env_cfg_(std::move(env_cfg)),
      cfg_(cfg),
      seed_(seed),
      manifest_(std::move(checkpoint_manifest)) {
    env_cfg_.validate();
    cfg_.validate();
    for (int n = 0; n < env_cfg_.world.num_uavs; ++n) {
        nets_.push_back(init_agent_nets(env_cfg_, cfg_, derive_seed(seed_, "agent", n)));
        AgentOptims opt;
        opt.actor_flight = nn::AdamState::zeros_like(nets_.back().actor_flight);
        opt.actor_alloc = nn::AdamState::zeros_like(nets_.back().actor_alloc);
        opt.critic = nn::AdamState::zeros_like(nets_.back().critic);
        opt.discriminator = nn::AdamState::zeros_like(nets_.back().discriminator);
        optims_.push_back(std::move(opt));
        expert_.emplace_back(cfg_.expert_buffer_episodes);
    }
}

UpdateLog Trainer::update_agent(const RolloutRound& round, int round_index, int agent) {
    const int slots = env_cfg_.world.slots_per_episode;
    const std::size_t n_eps = round.episodes.size();
    const std::size_t n = n_eps * slots;
    const int alloc_dim = env_cfg_.world.max_served_sds;

    std::vector<std::vector<double>> features(n);
    std::vector<std::vector<double>> disc_inputs(n);
    std::vector<double> rewards_raw(n), values(n), logp1(n), logp2(n);
    std::vector<const std::array<double, 2>*> flight_raw(n);
    std::vector<const std::vector<double>*> alloc(n);
    std::vector<std::uint8_t> dones(n, 0);

    for (std::size_t e = 0; e < n_eps; ++e) {
        const baselines::EpisodeRecord& rec = round.episodes[e];
        for (int t = 0; t < slots; ++t) {
            const std::size_t i = e * slots + t;
            const baselines::ActionSample& a = rec.actions[t][agent];
            features[i] = env::policy_features(rec.observations[t][agent], env_cfg_);
            disc_inputs[i].reserve(features[i].size() + 2 + alloc_dim);
            disc_inputs[i] = features[i];
            disc_inputs[i].push_back(a.flight_raw[0]);
            disc_inputs[i].push_back(a.flight_raw[1]);
            disc_inputs[i].insert(disc_inputs[i].end(), a.alloc.begin(), a.alloc.end());
            rewards_raw[i] = rec.rewards[t][agent].extrinsic;
            logp1[i] = a.logp_flight;
            logp2[i] = a.logp_alloc;
            flight_raw[i] = &a.flight_raw;
            alloc[i] = &a.alloc;
            values[i] = nn::mlp_forward(nets_[agent].critic, features[i])[0];
        }
        dones[e * slots + slots - 1] = 1;
    }

    UpdateLog log;
    std::vector<double> mixed(n);
    const bool disc_active = cfg_.discriminator_enabled && cfg_.intrinsic_scale != 0.0 &&
                             !expert_[agent].empty();
    if (disc_active) {
        // Flow order: the discriminator trains first, then produces the
        // intrinsic rewards the actor/critic consume.
        Rng disc_rng(derive_seed(seed_, "disc", round_index, agent));
        DiscriminatorBatch batch;
        for (int b = 0; b < cfg_.minibatch_size; ++b)
            batch.agent_inputs.push_back(&disc_inputs[disc_rng.index(n)]);
        for (int b = 0; b < cfg_.expert_batch_size; ++b)
            batch.expert_inputs.push_back(&expert_[agent].sample(disc_rng));
        log.discriminator_loss =
            discriminator_update(nets_[agent].discriminator, optims_[agent].discriminator, batch,
                                 cfg_.discriminator_loss, nn::AdamConfig{cfg_.discriminator_lr},
                                 cfg_.max_grad_norm);
        for (std::size_t i = 0; i < n; ++i) {
            const double r_i = intrinsic_reward(nets_[agent].discriminator, disc_inputs[i]);
            mixed[i] = mixed_reward(cfg_.reward_scale * rewards_raw[i], r_i,
                                    cfg_.intrinsic_scale);
        }
    } else {
        for (std::size_t i = 0; i < n; ++i)
            mixed[i] = mixed_reward(cfg_.reward_scale * rewards_raw[i], 0.0,
                                    cfg_.intrinsic_scale);
    }

    std::vector<double> advantages(n), returns(n);
    for (std::size_t e = 0; e < n_eps; ++e) {
        const std::size_t off = e * slots;
        GaeResult gae = compute_gae({mixed.data() + off, static_cast<std::size_t>(slots)},
                                    {values.data() + off, static_cast<std::size_t>(slots)},
                                    {dones.data() + off, static_cast<std::size_t>(slots)},
                                    cfg_.discount_gamma, cfg_.gae_lambda);
        std::copy(gae.advantages.begin(), gae.advantages.end(), advantages.begin() + off);
        std::copy(gae.returns.begin(), gae.returns.end(), returns.begin() + off);
    }
    normalize_advantages(advantages);

    Rng shuffle_rng(derive_seed(seed_, "shuffle", round_index, agent));
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;

    double flight_obj_sum = 0.0, alloc_obj_sum = 0.0, critic_loss_sum = 0.0;
    int steps = 0;
    for (int epoch = 0; epoch < cfg_.epochs_per_update; ++epoch) {
        fisher_yates(idx, shuffle_rng);
        for (std::size_t start = 0; start < n; start += cfg_.minibatch_size) {
            const std::size_t stop = std::min(n, start + cfg_.minibatch_size);
            std::vector<ActorSample> batch;
            std::vector<const std::vector<double>*> mb_features;
            std::vector<double> mb_returns;
            batch.reserve(stop - start);
            for (std::size_t k = start; k < stop; ++k) {
                const std::size_t i = idx[k];
                batch.push_back({&features[i], flight_raw[i], alloc[i], logp1[i], logp2[i],
                                 advantages[i]});
                mb_features.push_back(&features[i]);
                mb_returns.push_back(returns[i]);
            }
            ActorUpdateStats stats =
                actor_update(nets_[agent].actor_flight, optims_[agent].actor_flight,
                             nets_[agent].actor_alloc, optims_[agent].actor_alloc, batch, cfg_);
            const double closs =
                critic_update(nets_[agent].critic, optims_[agent].critic, mb_features,
                              mb_returns, nn::AdamConfig{cfg_.critic_lr}, cfg_.max_grad_norm);
            require_finite_loss(stats.flight_objective, "flight objective");
            require_finite_loss(stats.alloc_objective, "allocation objective");
            flight_obj_sum += stats.flight_objective;
            alloc_obj_sum += stats.alloc_objective;
            critic_loss_sum += closs;
            log.skipped_nonfinite += stats.skipped_nonfinite;
            steps += 1;
        }
    }
    if (steps > 0) {
        log.actor_flight_objective = flight_obj_sum / steps;
        log.actor_alloc_objective = alloc_obj_sum / steps;
        log.critic_loss = critic_loss_sum / steps;
    }

    // Expert-buffer maintenance runs last, after this round's updates.
    for (std::size_t e = 0; e < n_eps; ++e) {
        const std::size_t off = e * slots;
        std::vector<std::vector<double>> tuples(disc_inputs.begin() + off,
                                                disc_inputs.begin() + off + slots);
        expert_[agent].admit(round.episodes[e].agent_returns[agent], std::move(tuples));
    }
    return log;
}

UpdateLog Trainer::update_round(const RolloutRound& round, int round_index) {
    const int agents = env_cfg_.world.num_uavs;
    std::vector<UpdateLog> logs(agents);
    std::vector<std::exception_ptr> failures(agents);
    std::vector<std::thread> threads;
    for (int a = 0; a < agents; ++a) {
        threads.emplace_back([&, a] {
            try {
                logs[a] = update_agent(round, round_index, a);
            } catch (...) {
                failures[a] = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    for (int a = 0; a < agents; ++a)
        if (failures[a]) std::rethrow_exception(failures[a]);

    UpdateLog mean;
    for (const UpdateLog& l : logs) {
        mean.actor_flight_objective += l.actor_flight_objective / agents;
        mean.actor_alloc_objective += l.actor_alloc_objective / agents;
        mean.critic_loss += l.critic_loss / agents;
        mean.discriminator_loss += l.discriminator_loss / agents;
        mean.skipped_nonfinite += l.skipped_nonfinite;
    }
    return mean;
}

std::vector<AgentNets> Trainer::run(const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    std::ofstream metrics(out_dir / "metrics.csv");
    if (!metrics) throw std::runtime_error("trainer: cannot write metrics log");
    metrics << "# uavmec-metrics-v1\n";
    metrics << "episode,mean_return";
    for (int a = 0; a < env_cfg_.world.num_uavs; ++a) metrics << ",return_a" << a;
    metrics << ",fairness_total,delay_total_s,energy_total_j,offload_total"
               ",actor_flight_obj,actor_alloc_obj,critic_loss,disc_loss\n";

    int done_episodes = 0;
    int round_index = 0;
    while (done_episodes < cfg_.episodes) {
        const int count = std::min(cfg_.episodes_per_update, cfg_.episodes - done_episodes);
        RolloutRound round =
            collect_rollouts(env_cfg_, nets_, count, cfg_.workers, seed_, done_episodes);
        UpdateLog log = update_round(round, round_index);

        for (const baselines::EpisodeRecord& rec : round.episodes) {
            double mean_return = 0.0;
            for (double r : rec.agent_returns) mean_return += r / rec.agent_returns.size();
            metrics << rec.episode_index << ',' << double_to_string(mean_return);
            for (double r : rec.agent_returns) metrics << ',' << double_to_string(r);
            metrics << ',' << double_to_string(rec.metrics.fairness_total) << ','
                    << double_to_string(rec.metrics.delay_total_s) << ','
                    << double_to_string(rec.metrics.energy_total_j) << ','
                    << rec.metrics.offload_total << ','
                    << double_to_string(log.actor_flight_objective) << ','
                    << double_to_string(log.actor_alloc_objective) << ','
                    << double_to_string(log.critic_loss) << ','
                    << double_to_string(log.discriminator_loss) << '\n';
        }
        metrics.flush();

        done_episodes += count;
        round_index += 1;
        if (round_index % cfg_.checkpoint_every_updates == 0)
            save_checkpoint(out_dir / ("checkpoint_round" + std::to_string(round_index) + ".json"));
    }
    save_checkpoint(out_dir / "checkpoint_final.json");
    return nets_;
}

void Trainer::save_checkpoint(const std::filesystem::path& path) const {
    save_agents(path, nets_, manifest_);
}

void save_agents(const std::filesystem::path& path, const std::vector<AgentNets>& nets,
                 const nlohmann::json& manifest) {
    nlohmann::json j;
    j["format_version"] = 1;
    if (!manifest.is_null()) j["manifest"] = manifest;
    j["agents"] = nlohmann::json::array();
    for (const AgentNets& a : nets) {
        nlohmann::json ja;
        ja["actor_flight"] = nn::to_json(a.actor_flight);
        ja["actor_alloc"] = nn::to_json(a.actor_alloc);
        ja["critic"] = nn::to_json(a.critic);
        ja["discriminator"] = nn::to_json(a.discriminator);
        j["agents"].push_back(std::move(ja));
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("trainer: cannot write checkpoint " + path.string());
    out << j.dump() << "\n";
}

std::pair<std::vector<AgentNets>, nlohmann::json> load_agents(
    const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("trainer: cannot open checkpoint " + path.string());
    nlohmann::json j = nlohmann::json::parse(in);
    if (j.at("format_version").get<int>() != 1)
        throw std::runtime_error("trainer: unsupported checkpoint format version");
    std::vector<AgentNets> nets;
    for (const auto& ja : j.at("agents")) {
        AgentNets a;
        a.actor_flight = nn::mlp_params_from_json(ja.at("actor_flight"));
        a.actor_alloc = nn::mlp_params_from_json(ja.at("actor_alloc"));
        a.critic = nn::mlp_params_from_json(ja.at("critic"));
        a.discriminator = nn::mlp_params_from_json(ja.at("discriminator"));
        nets.push_back(std::move(a));
    }
    nlohmann::json manifest;
    if (j.contains("manifest")) manifest = j.at("manifest");
    return {std::move(nets), std::move(manifest)};
}

}  // namespace uavmec::trainer
