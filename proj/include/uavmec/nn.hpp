#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "uavmec/common.hpp"

namespace uavmec::nn {

enum class HeadKind { gaussian, dirichlet, value, discriminator };

const char* head_name(HeadKind k);
HeadKind head_from_name(const std::string& name);

struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;  // row-major

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}
    double& operator()(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
    double operator()(int r, int c) const { return a[static_cast<std::size_t>(r) * cols + c]; }
};

struct LayerParams {
    Matrix w;
    std::vector<double> b;
};

/// Two tanh hidden layers plus a linear output layer feeding a pluggable head.
/// The gaussian head additionally owns a state-independent log-std vector.
struct MlpParams {
    HeadKind head = HeadKind::value;
    int input_dim = 0;
    int hidden_dim = 0;
    int output_dim = 0;
    std::array<LayerParams, 3> layers;
    std::vector<double> log_std;

    static MlpParams init(HeadKind head, int input_dim, int output_dim, int hidden_dim,
                          Rng& rng, double log_std_init = -0.6931471805599453);
};

struct ForwardCache {
    std::vector<double> input;
    std::vector<double> h1;       // tanh outputs, first hidden layer
    std::vector<double> h2;       // tanh outputs, second hidden layer
    std::vector<double> head_in;  // linear output pre-head
};

/// Deterministic forward pass. Returns the head output:
/// gaussian -> mean vector; dirichlet -> concentrations (1 + softplus);
/// value -> {v}; discriminator -> {sigmoid in (0,1)}.
/// Throws on an input-dimension mismatch.
std::vector<double> mlp_forward(const MlpParams& p, std::span<const double> input,
                                ForwardCache* cache = nullptr);

/// Gradient accumulator with the same shape as MlpParams.
struct MlpGrads {
    std::array<LayerParams, 3> layers;
    std::vector<double> log_std;

    static MlpGrads zeros_like(const MlpParams& p);
    void scale(double s);
    double squared_norm() const;
};

/// Accumulates gradients of a scalar loss into `out`, given dL/d(head_in).
void mlp_backward(const MlpParams& p, const ForwardCache& cache,
                  std::span<const double> d_head_in, MlpGrads& out);

/// Chains dL/d(alpha) through the 1 + softplus concentration map.
void dirichlet_alpha_backward(std::span<const double> head_in, std::span<const double> d_alpha,
                              std::span<double> d_head_in);

// Diagonal Gaussian head.
double gaussian_log_prob(std::span<const double> mean, std::span<const double> log_std,
                         std::span<const double> x);
std::vector<double> gaussian_sample(std::span<const double> mean,
                                    std::span<const double> log_std, Rng& rng);
/// Accumulates coeff * d(log p)/d(mean, log_std).
void gaussian_log_prob_backward(std::span<const double> mean, std::span<const double> log_std,
                                std::span<const double> x, double coeff,
                                std::span<double> d_mean, std::span<double> d_log_std);

// Dirichlet head. x must lie on the simplex within 1e-9.
double dirichlet_log_prob(std::span<const double> alpha, std::span<const double> x);
std::vector<double> dirichlet_sample(std::span<const double> alpha, Rng& rng);
/// Accumulates coeff * d(log p)/d(alpha).
void dirichlet_log_prob_backward(std::span<const double> alpha, std::span<const double> x,
                                 double coeff, std::span<double> d_alpha);

struct AdamConfig {
    double lr = 5e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    MlpGrads m;
    MlpGrads v;
    std::int64_t step = 0;

    static AdamState zeros_like(const MlpParams& p);
};

/// One bias-corrected first/second-moment adaptive step.
void adam_update(MlpParams& p, const MlpGrads& g, AdamState& state, const AdamConfig& cfg);

double grad_norm(const MlpGrads& g);
void clip_grad_norm(MlpGrads& g, double max_norm);

void clamp_log_std(MlpParams& p, double lo, double hi);

/// Checkpoint serialization; round-trips bit-exactly for finite parameters.
nlohmann::json to_json(const MlpParams& p);
MlpParams mlp_params_from_json(const nlohmann::json& j);

}  // namespace uavmec::nn
