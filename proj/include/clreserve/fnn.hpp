#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "clreserve/errors.hpp"
#include "clreserve/random.hpp"

namespace clreserve {

// Feed-forward regression network: tanh hidden layers, single exponential
// output unit, so predictions are strictly positive. Parameters are stored
// flat, per layer as the row-major weight matrix followed by the bias.
class FnnModel {
public:
    FnnModel() = default;

    explicit FnnModel(std::vector<int> layer_sizes) : sizes_(std::move(layer_sizes)) {
        if (sizes_.size() < 2)
            throw validation_error("network needs at least input and output layers");
        for (int s : sizes_)
            if (s < 1)
                throw validation_error("network layer sizes must be positive");
        if (sizes_.back() != 1)
            throw validation_error("network output layer must have a single unit");
        offsets_.push_back(0);
        for (size_t l = 1; l < sizes_.size(); ++l) {
            size_t in = static_cast<size_t>(sizes_[l - 1]);
            size_t out = static_cast<size_t>(sizes_[l]);
            offsets_.push_back(offsets_.back() + out * in + out);
        }
        params_.assign(offsets_.back(), 0.0);
    }

    // Symmetric uniform initialization in [-1/sqrt(fan_in), 1/sqrt(fan_in)]
    // for weights and biases, fully determined by the seed.
    static FnnModel seeded(std::vector<int> layer_sizes, uint64_t seed) {
        FnnModel m(std::move(layer_sizes));
        std::mt19937_64 rng = make_rng(seed);
        for (size_t l = 1; l < m.sizes_.size(); ++l) {
            double bound = 1.0 / std::sqrt(static_cast<double>(m.sizes_[l - 1]));
            std::uniform_real_distribution<double> u(-bound, bound);
            for (size_t k = m.offsets_[l - 1]; k < m.offsets_[l]; ++k)
                m.params_[k] = u(rng);
        }
        return m;
    }

    int input_dim() const { return sizes_.front(); }
    const std::vector<int>& layer_sizes() const { return sizes_; }
    int num_layers() const { return static_cast<int>(sizes_.size()) - 1; }
    size_t num_params() const { return params_.size(); }

    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }

    const double* layer_weights(int layer) const {
        return params_.data() + offsets_[static_cast<size_t>(layer - 1)];
    }
    const double* layer_bias(int layer) const {
        size_t in = static_cast<size_t>(sizes_[static_cast<size_t>(layer - 1)]);
        size_t out = static_cast<size_t>(sizes_[static_cast<size_t>(layer)]);
        return params_.data() + offsets_[static_cast<size_t>(layer - 1)] + out * in;
    }

    double forward(std::span<const double> x) const {
        if (static_cast<int>(x.size()) != input_dim())
            throw validation_error("input dimension " + std::to_string(x.size()) +
                                   " does not match network input width " +
                                   std::to_string(input_dim()));
        std::vector<double> cur(x.begin(), x.end());
        std::vector<double> next;
        for (int l = 1; l <= num_layers(); ++l) {
            affine(l, cur.data(), next);
            if (l < num_layers())
                for (double& v : next)
                    v = std::tanh(v);
            cur.swap(next);
        }
        return std::exp(cur[0]);
    }

    nlohmann::json to_json() const {
        nlohmann::json layers = nlohmann::json::array();
        for (int l = 1; l <= num_layers(); ++l) {
            size_t in = static_cast<size_t>(sizes_[static_cast<size_t>(l - 1)]);
            size_t out = static_cast<size_t>(sizes_[static_cast<size_t>(l)]);
            const double* w = layer_weights(l);
            const double* b = layer_bias(l);
            layers.push_back({{"weights", std::vector<double>(w, w + out * in)},
                              {"bias", std::vector<double>(b, b + out)}});
        }
        return {{"layer_sizes", sizes_}, {"layers", layers}};
    }

    static FnnModel from_json(const nlohmann::json& j) {
        FnnModel m(j.at("layer_sizes").get<std::vector<int>>());
        const auto& layers = j.at("layers");
        if (static_cast<int>(layers.size()) != m.num_layers())
            throw validation_error("model JSON layer count mismatch");
        size_t k = 0;
        for (int l = 1; l <= m.num_layers(); ++l) {
            auto w = layers[static_cast<size_t>(l - 1)].at("weights").get<std::vector<double>>();
            auto b = layers[static_cast<size_t>(l - 1)].at("bias").get<std::vector<double>>();
            size_t in = static_cast<size_t>(m.sizes_[static_cast<size_t>(l - 1)]);
            size_t out = static_cast<size_t>(m.sizes_[static_cast<size_t>(l)]);
            if (w.size() != out * in || b.size() != out)
                throw validation_error("model JSON layer shape mismatch");
            for (double v : w)
                m.params_[k++] = v;
            for (double v : b)
                m.params_[k++] = v;
        }
        return m;
    }

private:
    void affine(int layer, const double* input, std::vector<double>& out) const {
        size_t in = static_cast<size_t>(sizes_[static_cast<size_t>(layer - 1)]);
        size_t n_out = static_cast<size_t>(sizes_[static_cast<size_t>(layer)]);
        const double* w = layer_weights(layer);
        const double* b = layer_bias(layer);
        out.assign(n_out, 0.0);
        for (size_t o = 0; o < n_out; ++o) {
            double z = b[o];
            const double* row = w + o * in;
            for (size_t i = 0; i < in; ++i)
                z += row[i] * input[i];
            out[o] = z;
        }
    }

    friend struct FnnGradient;

    std::vector<int> sizes_;
    std::vector<size_t> offsets_; // per-layer starting index into params_
    std::vector<double> params_;
};

// Reusable buffers plus analytic backpropagation for the MSE loss of the
// exponential-output network.
struct FnnGradient {
    explicit FnnGradient(const FnnModel& model) {
        const auto& sizes = model.layer_sizes();
        act.resize(sizes.size());
        delta.resize(sizes.size());
        for (size_t l = 0; l < sizes.size(); ++l) {
            act[l].assign(static_cast<size_t>(sizes[l]), 0.0);
            delta[l].assign(static_cast<size_t>(sizes[l]), 0.0);
        }
    }

    // Mean squared error over the rows indexed by `rows` (row-major inputs,
    // one target per row). When grad is non-null it receives d(loss)/d(params),
    // accumulated over the same rows.
    double loss(const FnnModel& m, const double* x, const double* y, std::span<const size_t> rows,
                std::vector<double>* grad) {
        const int L = m.num_layers();
        const size_t dim = static_cast<size_t>(m.input_dim());
        if (grad) {
            grad->assign(m.num_params(), 0.0);
        }
        double total = 0.0;
        const double inv_n = 1.0 / static_cast<double>(rows.size());
        for (size_t r : rows) {
            const double* input = x + r * dim;
            for (size_t i = 0; i < dim; ++i)
                act[0][i] = input[i];
            for (int l = 1; l <= L; ++l) {
                size_t in = static_cast<size_t>(m.sizes_[static_cast<size_t>(l - 1)]);
                size_t out = static_cast<size_t>(m.sizes_[static_cast<size_t>(l)]);
                const double* w = m.layer_weights(l);
                const double* b = m.layer_bias(l);
                for (size_t o = 0; o < out; ++o) {
                    double z = b[o];
                    const double* row = w + o * in;
                    for (size_t i = 0; i < in; ++i)
                        z += row[i] * act[static_cast<size_t>(l - 1)][i];
                    act[static_cast<size_t>(l)][o] = l < L ? std::tanh(z) : z;
                }
            }
            double pred = std::exp(act[static_cast<size_t>(L)][0]);
            double diff = pred - y[r];
            total += diff * diff * inv_n;
            if (!grad)
                continue;

            delta[static_cast<size_t>(L)][0] = 2.0 * inv_n * diff * pred;
            for (int l = L; l >= 1; --l) {
                size_t in = static_cast<size_t>(m.sizes_[static_cast<size_t>(l - 1)]);
                size_t out = static_cast<size_t>(m.sizes_[static_cast<size_t>(l)]);
                double* gw = grad->data() + m.offsets_[static_cast<size_t>(l - 1)];
                double* gb = gw + out * in;
                const double* prev = act[static_cast<size_t>(l - 1)].data();
                const double* d = delta[static_cast<size_t>(l)].data();
                for (size_t o = 0; o < out; ++o) {
                    double dv = d[o];
                    double* grow = gw + o * in;
                    for (size_t i = 0; i < in; ++i)
                        grow[i] += dv * prev[i];
                    gb[o] += dv;
                }
                if (l > 1) {
                    const double* w = m.layer_weights(l);
                    auto& dp = delta[static_cast<size_t>(l - 1)];
                    dp.assign(in, 0.0);
                    for (size_t o = 0; o < out; ++o) {
                        double dv = d[o];
                        const double* row = w + o * in;
                        for (size_t i = 0; i < in; ++i)
                            dp[i] += row[i] * dv;
                    }
                    for (size_t i = 0; i < in; ++i) {
                        double a = act[static_cast<size_t>(l - 1)][i];
                        dp[i] *= 1.0 - a * a;
                    }
                }
            }
        }
        return total;
    }

    std::vector<std::vector<double>> act;
    std::vector<std::vector<double>> delta;
};

} // namespace clreserve
