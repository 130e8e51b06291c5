#include "uavmec/nn.hpp"

#include <cmath>

namespace uavmec::nn {

namespace {

constexpr double kHalfLog2Pi = 0.9189385332046727417803297;  // 0.5 * ln(2*pi)
constexpr double kDirichletClamp = 30.0;  // pre-softplus clamp keeping alphas in (1, ~31]

void matvec(const LayerParams& layer, std::span<const double> x, std::vector<double>& out) {
    out.assign(layer.b.begin(), layer.b.end());
    for (int r = 0; r < layer.w.rows; ++r) {
        double acc = 0.0;
        const double* row = layer.w.a.data() + static_cast<std::size_t>(r) * layer.w.cols;
        for (int c = 0; c < layer.w.cols; ++c) acc += row[c] * x[c];
        out[r] += acc;
    }
}

void init_layer(LayerParams& layer, int rows, int cols, double scale, Rng& rng) {
    layer.w = Matrix(rows, cols);
    layer.b.assign(rows, 0.0);
    const double bound = scale / std::sqrt(static_cast<double>(cols));
    for (double& v : layer.w.a) v = rng.uniform(-bound, bound);
}

}  // namespace

const char* head_name(HeadKind k) {
    switch (k) {
        case HeadKind::gaussian: return "gaussian";
        case HeadKind::dirichlet: return "dirichlet";
        case HeadKind::value: return "value";
        case HeadKind::discriminator: return "discriminator";
    }
    return "?";
}

HeadKind head_from_name(const std::string& name) {
    if (name == "gaussian") return HeadKind::gaussian;
    if (name == "dirichlet") return HeadKind::dirichlet;
    if (name == "value") return HeadKind::value;
    if (name == "discriminator") return HeadKind::discriminator;
    throw std::invalid_argument("nn: unknown head kind '" + name + "'");
}

MlpParams MlpParams::init(HeadKind head, int input_dim, int output_dim, int hidden_dim,
                          Rng& rng, double log_std_init) {
    if (input_dim < 1 || output_dim < 1 || hidden_dim < 1)
        throw std::invalid_argument("nn: dimensions must be >= 1");
    MlpParams p;
    p.head = head;
    p.input_dim = input_dim;
    p.hidden_dim = hidden_dim;
    p.output_dim = output_dim;
    init_layer(p.layers[0], hidden_dim, input_dim, 1.0, rng);
    init_layer(p.layers[1], hidden_dim, hidden_dim, 1.0, rng);
    init_layer(p.layers[2], output_dim, hidden_dim, 0.01, rng);
    if (head == HeadKind::gaussian) p.log_std.assign(output_dim, log_std_init);
    return p;
}

std::vector<double> mlp_forward(const MlpParams& p, std::span<const double> input,
                                ForwardCache* cache) {
    if (static_cast<int>(input.size()) != p.input_dim)
        throw std::invalid_argument("nn: input dimension mismatch");
    std::vector<double> h1, h2, y;
    matvec(p.layers[0], input, h1);
    for (double& v : h1) v = std::tanh(v);
    matvec(p.layers[1], h1, h2);
    for (double& v : h2) v = std::tanh(v);
    matvec(p.layers[2], h2, y);
    if (cache) {
        cache->input.assign(input.begin(), input.end());
        cache->h1 = h1;
        cache->h2 = h2;
        cache->head_in = y;
    }
    switch (p.head) {
        case HeadKind::gaussian:
            return y;
        case HeadKind::dirichlet: {
            std::vector<double> alpha(y.size());
            for (std::size_t i = 0; i < y.size(); ++i)
                alpha[i] = 1.0 + softplus(std::clamp(y[i], -kDirichletClamp, kDirichletClamp));
            return alpha;
        }
        case HeadKind::value:
            return {y[0]};
        case HeadKind::discriminator:
            return {sigmoid(y[0])};
    }
    return y;
}

MlpGrads MlpGrads::zeros_like(const MlpParams& p) {
    MlpGrads g;
    for (int i = 0; i < 3; ++i) {
        g.layers[i].w = Matrix(p.layers[i].w.rows, p.layers[i].w.cols);
        g.layers[i].b.assign(p.layers[i].b.size(), 0.0);
    }
    g.log_std.assign(p.log_std.size(), 0.0);
    return g;
}

void MlpGrads::scale(double s) {
    for (auto& layer : layers) {
        for (double& v : layer.w.a) v *= s;
        for (double& v : layer.b) v *= s;
    }
    for (double& v : log_std) v *= s;
}

double MlpGrads::squared_norm() const {
    double acc = 0.0;
    for (const auto& layer : layers) {
        for (double v : layer.w.a) acc += v * v;
        for (double v : layer.b) acc += v * v;
    }
    for (double v : log_std) acc += v * v;
    return acc;
}

void mlp_backward(const MlpParams& p, const ForwardCache& cache,
                  std::span<const double> d_head_in, MlpGrads& out) {
    const int hidden = p.hidden_dim;
    // Output layer.
    std::vector<double> dh2(hidden, 0.0);
    for (int r = 0; r < p.layers[2].w.rows; ++r) {
        const double d = d_head_in[r];
        out.layers[2].b[r] += d;
        const double* wrow = p.layers[2].w.a.data() + static_cast<std::size_t>(r) * hidden;
        double* grow = out.layers[2].w.a.data() + static_cast<std::size_t>(r) * hidden;
        for (int c = 0; c < hidden; ++c) {
            grow[c] += d * cache.h2[c];
            dh2[c] += d * wrow[c];
        }
    }
    // Second hidden layer (tanh).
    std::vector<double> dh1(hidden, 0.0);
    for (int r = 0; r < hidden; ++r) {
        const double d = dh2[r] * (1.0 - cache.h2[r] * cache.h2[r]);
        out.layers[1].b[r] += d;
        const double* wrow = p.layers[1].w.a.data() + static_cast<std::size_t>(r) * hidden;
        double* grow = out.layers[1].w.a.data() + static_cast<std::size_t>(r) * hidden;
        for (int c = 0; c < hidden; ++c) {
            grow[c] += d * cache.h1[c];
            dh1[c] += d * wrow[c];
        }
    }
    // First hidden layer (tanh).
    for (int r = 0; r < hidden; ++r) {
        const double d = dh1[r] * (1.0 - cache.h1[r] * cache.h1[r]);
        out.layers[0].b[r] += d;
        double* grow = out.layers[0].w.a.data() + static_cast<std::size_t>(r) * p.input_dim;
        for (int c = 0; c < p.input_dim; ++c) grow[c] += d * cache.input[c];
    }
}

void dirichlet_alpha_backward(std::span<const double> head_in, std::span<const double> d_alpha,
                              std::span<double> d_head_in) {
    for (std::size_t i = 0; i < head_in.size(); ++i) {
        const double y = head_in[i];
        const double slope =
            (y <= -kDirichletClamp || y >= kDirichletClamp) ? 0.0 : sigmoid(y);
        d_head_in[i] = d_alpha[i] * slope;
    }
}

double gaussian_log_prob(std::span<const double> mean, std::span<const double> log_std,
                         std::span<const double> x) {
    double lp = 0.0;
    for (std::size_t i = 0; i < mean.size(); ++i) {
        const double s = std::exp(log_std[i]);
        const double z = (x[i] - mean[i]) / s;
        lp += -log_std[i] - kHalfLog2Pi - 0.5 * z * z;
    }
    return lp;
}

std::vector<double> gaussian_sample(std::span<const double> mean,
                                    std::span<const double> log_std, Rng& rng) {
    std::vector<double> x(mean.size());
    for (std::size_t i = 0; i < mean.size(); ++i)
        x[i] = mean[i] + std::exp(log_std[i]) * rng.normal();
    return x;
}

void gaussian_log_prob_backward(std::span<const double> mean, std::span<const double> log_std,
                                std::span<const double> x, double coeff,
                                std::span<double> d_mean, std::span<double> d_log_std) {
    for (std::size_t i = 0; i < mean.size(); ++i) {
        const double s = std::exp(log_std[i]);
        const double z = (x[i] - mean[i]) / s;
        d_mean[i] += coeff * z / s;
        d_log_std[i] += coeff * (z * z - 1.0);
    }
}

double dirichlet_log_prob(std::span<const double> alpha, std::span<const double> x) {
    double sum_x = 0.0;
    for (double xi : x) {
        if (!(xi > 0.0)) throw std::domain_error("dirichlet: x components must be positive");
        sum_x += xi;
    }
    if (std::abs(sum_x - 1.0) > 1e-9) throw std::domain_error("dirichlet: x is off the simplex");
    double alpha0 = 0.0;
    double lp = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        alpha0 += alpha[i];
        lp += (alpha[i] - 1.0) * std::log(x[i]) - std::lgamma(alpha[i]);
    }
    lp += std::lgamma(alpha0);
    return lp;
}

std::vector<double> dirichlet_sample(std::span<const double> alpha, Rng& rng) {
    std::vector<double> x(alpha.size());
    double total = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        x[i] = rng.gamma(alpha[i]);
        total += x[i];
    }
    for (double& v : x) v /= total;
    return x;
}

void dirichlet_log_prob_backward(std::span<const double> alpha, std::span<const double> x,
                                 double coeff, std::span<double> d_alpha) {
    double alpha0 = 0.0;
    for (double a : alpha) alpha0 += a;
    const double psi0 = digamma(alpha0);
    for (std::size_t i = 0; i < alpha.size(); ++i)
        d_alpha[i] += coeff * (psi0 - digamma(alpha[i]) + std::log(x[i]));
}

AdamState AdamState::zeros_like(const MlpParams& p) {
    AdamState s;
    s.m = MlpGrads::zeros_like(p);
    s.v = MlpGrads::zeros_like(p);
    return s;
}

namespace {

void adam_apply(double& param, double grad, double& m, double& v, const AdamConfig& cfg,
                double bc1, double bc2) {
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad * grad;
    const double m_hat = m / bc1;
    const double v_hat = v / bc2;
    param -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
}

}  // namespace

void adam_update(MlpParams& p, const MlpGrads& g, AdamState& state, const AdamConfig& cfg) {
    state.step += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    for (int l = 0; l < 3; ++l) {
        auto& pw = p.layers[l].w.a;
        const auto& gw = g.layers[l].w.a;
        auto& mw = state.m.layers[l].w.a;
        auto& vw = state.v.layers[l].w.a;
        for (std::size_t i = 0; i < pw.size(); ++i)
            adam_apply(pw[i], gw[i], mw[i], vw[i], cfg, bc1, bc2);
        auto& pb = p.layers[l].b;
        const auto& gb = g.layers[l].b;
        for (std::size_t i = 0; i < pb.size(); ++i)
            adam_apply(pb[i], gb[i], state.m.layers[l].b[i], state.v.layers[l].b[i], cfg, bc1, bc2);
    }
    for (std::size_t i = 0; i < p.log_std.size(); ++i)
        adam_apply(p.log_std[i], g.log_std[i], state.m.log_std[i], state.v.log_std[i], cfg, bc1, bc2);
}

double grad_norm(const MlpGrads& g) { return std::sqrt(g.squared_norm()); }

void clip_grad_norm(MlpGrads& g, double max_norm) {
    const double norm = grad_norm(g);
    if (norm > max_norm && norm > 0.0) g.scale(max_norm / norm);
}

void clamp_log_std(MlpParams& p, double lo, double hi) {
    for (double& v : p.log_std) v = std::clamp(v, lo, hi);
}

namespace {

nlohmann::json layer_to_json(const LayerParams& layer) {
    nlohmann::json j;
    j["rows"] = layer.w.rows;
    j["cols"] = layer.w.cols;
    j["w"] = layer.w.a;
    j["b"] = layer.b;
    return j;
}

LayerParams layer_from_json(const nlohmann::json& j) {
    LayerParams layer;
    layer.w.rows = j.at("rows").get<int>();
    layer.w.cols = j.at("cols").get<int>();
    layer.w.a = j.at("w").get<std::vector<double>>();
    layer.b = j.at("b").get<std::vector<double>>();
    if (static_cast<int>(layer.w.a.size()) != layer.w.rows * layer.w.cols ||
        static_cast<int>(layer.b.size()) != layer.w.rows)
        throw std::runtime_error("nn: corrupt layer in checkpoint");
    return layer;
}

}  // namespace

nlohmann::json to_json(const MlpParams& p) {
    nlohmann::json j;
    j["format_version"] = 1;
    j["head"] = head_name(p.head);
    j["input_dim"] = p.input_dim;
    j["hidden_dim"] = p.hidden_dim;
    j["output_dim"] = p.output_dim;
    j["layers"] = nlohmann::json::array();
    for (const auto& layer : p.layers) j["layers"].push_back(layer_to_json(layer));
    if (!p.log_std.empty()) j["log_std"] = p.log_std;
    return j;
}

MlpParams mlp_params_from_json(const nlohmann::json& j) {
    if (j.at("format_version").get<int>() != 1)
        throw std::runtime_error("nn: unsupported checkpoint format version");
    MlpParams p;
    p.head = head_from_name(j.at("head").get<std::string>());
    p.input_dim = j.at("input_dim").get<int>();
    p.hidden_dim = j.at("hidden_dim").get<int>();
    p.output_dim = j.at("output_dim").get<int>();
    for (int i = 0; i < 3; ++i) p.layers[i] = layer_from_json(j.at("layers").at(i));
    if (j.contains("log_std")) p.log_std = j.at("log_std").get<std::vector<double>>();
    return p;
}

}  // namespace uavmec::nn
