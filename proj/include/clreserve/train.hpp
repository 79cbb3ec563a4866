#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "clreserve/errors.hpp"
#include "clreserve/fnn.hpp"
#include "clreserve/random.hpp"

namespace clreserve {

// Row-major feature matrix with one target per row. `group` carries the
// claim identity of each row so the learning/validation split can be done
// at the claim level.
struct Dataset {
    int dim = 0;
    std::vector<double> x;
    std::vector<double> y;
    std::vector<uint32_t> group;

    size_t rows() const { return y.size(); }

    void push_row(const double* features, double target, uint32_t group_id) {
        x.insert(x.end(), features, features + dim);
        y.push_back(target);
        group.push_back(group_id);
    }
};

struct TrainConfig {
    double learning_rate = 1e-3;       // Adam
    int batch_size = 4096;
    int max_epochs = 1000;
    double validation_fraction = 0.1;  // 9:1 learning/validation split
    double plateau_factor = 0.9;       // reduce learning rate on plateau
    int plateau_patience = 5;
    double plateau_rel_improvement = 1e-6;
    double min_learning_rate = 1e-6;   // stop once the schedule falls below
    int early_stop_patience = 50;      // stop after this many epochs without
                                       // a new best validation MSE
    uint64_t seed = 1;

    void validate() const {
        if (learning_rate <= 0.0 || batch_size < 1 || max_epochs < 1)
            throw validation_error("training config: learning rate, batch size and epochs must be positive");
        if (validation_fraction <= 0.0 || validation_fraction >= 1.0)
            throw validation_error("training config: validation fraction must be in (0,1)");
        if (plateau_factor <= 0.0 || plateau_factor >= 1.0 || plateau_patience < 1)
            throw validation_error("training config: bad plateau schedule");
        if (min_learning_rate <= 0.0 || early_stop_patience < 1)
            throw validation_error("training config: bad stopping rule");
    }

    nlohmann::json to_json() const {
        return {{"loss", "mse"},
                {"optimizer", "adam"},
                {"learning_rate", learning_rate},
                {"batch_size", batch_size},
                {"max_epochs", max_epochs},
                {"validation_fraction", validation_fraction},
                {"plateau_factor", plateau_factor},
                {"plateau_patience", plateau_patience},
                {"plateau_rel_improvement", plateau_rel_improvement},
                {"min_learning_rate", min_learning_rate},
                {"early_stop_patience", early_stop_patience},
                {"seed", seed}};
    }

    static TrainConfig from_json(const nlohmann::json& j) {
        TrainConfig c;
        c.learning_rate = j.value("learning_rate", c.learning_rate);
        c.batch_size = j.value("batch_size", c.batch_size);
        c.max_epochs = j.value("max_epochs", c.max_epochs);
        c.validation_fraction = j.value("validation_fraction", c.validation_fraction);
        c.plateau_factor = j.value("plateau_factor", c.plateau_factor);
        c.plateau_patience = j.value("plateau_patience", c.plateau_patience);
        c.plateau_rel_improvement = j.value("plateau_rel_improvement", c.plateau_rel_improvement);
        c.min_learning_rate = j.value("min_learning_rate", c.min_learning_rate);
        c.early_stop_patience = j.value("early_stop_patience", c.early_stop_patience);
        c.seed = j.value("seed", c.seed);
        c.validate();
        return c;
    }
};

struct TrainStats {
    int epochs_run = 0;
    double best_validation_mse = 0.0;
    double final_learning_rate = 0.0;
};

namespace detail {

struct Adam {
    explicit Adam(size_t n) : m(n, 0.0), v(n, 0.0) {}

    void step(std::vector<double>& params, const std::vector<double>& grad, double lr) {
        ++t;
        const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
        double c1 = 1.0 - std::pow(b1, t);
        double c2 = 1.0 - std::pow(b2, t);
        for (size_t k = 0; k < params.size(); ++k) {
            m[k] = b1 * m[k] + (1.0 - b1) * grad[k];
            v[k] = b2 * v[k] + (1.0 - b2) * grad[k] * grad[k];
            params[k] -= lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + eps);
        }
    }

    std::vector<double> m, v;
    double t = 0.0;
};

// Seeded 9:1 split over distinct group ids (claims), never over rows.
inline void split_rows(const Dataset& data, std::mt19937_64& rng, double validation_fraction,
                       std::vector<size_t>& learn, std::vector<size_t>& val) {
    // A sorted base order makes the split independent of row order.
    std::vector<uint32_t> ids = data.group;
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    std::shuffle(ids.begin(), ids.end(), rng);
    size_t n_val = ids.size() >= 2
                       ? std::max<size_t>(1, static_cast<size_t>(std::llround(
                                                 validation_fraction * static_cast<double>(ids.size()))))
                       : 0;
    std::vector<char> is_val_id;
    uint32_t max_id = 0;
    for (uint32_t g : ids)
        max_id = std::max(max_id, g);
    is_val_id.assign(static_cast<size_t>(max_id) + 1, 0);
    for (size_t k = 0; k < n_val; ++k)
        is_val_id[ids[k]] = 1;
    for (size_t r = 0; r < data.rows(); ++r)
        (is_val_id[data.group[r]] ? val : learn).push_back(r);
    if (learn.empty()) {
        // Degenerate single-group data: validate on the learning rows.
        learn = val;
    }
}

} // namespace detail

// Mini-batch Adam with reduce-on-plateau learning-rate schedule and early
// stopping on the validation MSE; returns the parameter snapshot with the
// best validation MSE seen. Fully deterministic given the seed.
inline FnnModel train(const Dataset& data, const TrainConfig& config,
                      const std::vector<int>& hidden = {20, 15, 10},
                      TrainStats* stats_out = nullptr) {
    config.validate();
    if (data.rows() == 0)
        throw validation_error("cannot train on an empty learning set");
    if (data.x.size() != data.rows() * static_cast<size_t>(data.dim) ||
        data.group.size() != data.rows())
        throw validation_error("learning set arrays are inconsistent");

    std::vector<int> sizes;
    sizes.push_back(data.dim);
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(1);

    uint64_t init_seed = derive_seed(config.seed, 0xA11CE5EEDULL);
    uint64_t split_seed = derive_seed(config.seed, 0x5B1177EDULL);
    uint64_t shuffle_seed = derive_seed(config.seed, 0xBA7C4E5ULL);

    FnnModel model = FnnModel::seeded(sizes, init_seed);
    FnnGradient workspace(model);
    detail::Adam adam(model.num_params());

    std::vector<size_t> learn_rows, val_rows;
    {
        std::mt19937_64 split_rng = make_rng(split_seed);
        detail::split_rows(data, split_rng, config.validation_fraction, learn_rows, val_rows);
    }
    if (val_rows.empty())
        val_rows = learn_rows;

    std::mt19937_64 shuffle_rng = make_rng(shuffle_seed);
    std::vector<double> grad;
    std::vector<double> best_params = model.params();
    double best_val = workspace.loss(model, data.x.data(), data.y.data(), val_rows, nullptr);
    double plateau_best = best_val;
    double lr = config.learning_rate;
    int plateau_bad = 0;
    int no_improve = 0;
    int epoch = 0;

    for (epoch = 1; epoch <= config.max_epochs; ++epoch) {
        std::shuffle(learn_rows.begin(), learn_rows.end(), shuffle_rng);
        size_t batch = static_cast<size_t>(config.batch_size);
        for (size_t start = 0; start < learn_rows.size(); start += batch) {
            size_t count = std::min(batch, learn_rows.size() - start);
            std::span<const size_t> rows(learn_rows.data() + start, count);
            double loss = workspace.loss(model, data.x.data(), data.y.data(), rows, &grad);
            if (!std::isfinite(loss))
                throw numeric_error("training loss diverged at epoch " + std::to_string(epoch));
            adam.step(model.params(), grad, lr);
        }

        double val = workspace.loss(model, data.x.data(), data.y.data(), val_rows, nullptr);
        if (!std::isfinite(val))
            throw numeric_error("validation loss diverged at epoch " + std::to_string(epoch));

        if (val < best_val) {
            best_val = val;
            best_params = model.params();
            no_improve = 0;
        } else {
            ++no_improve;
        }

        if (val < plateau_best * (1.0 - config.plateau_rel_improvement)) {
            plateau_best = val;
            plateau_bad = 0;
        } else if (++plateau_bad >= config.plateau_patience) {
            lr *= config.plateau_factor;
            plateau_bad = 0;
        }

        if (lr < config.min_learning_rate || no_improve >= config.early_stop_patience)
            break;
    }

    model.params() = best_params;
    if (stats_out) {
        stats_out->epochs_run = std::min(epoch, config.max_epochs);
        stats_out->best_validation_mse = best_val;
        stats_out->final_learning_rate = lr;
    }
    return model;
}

// Model file layout: layer shapes plus row-major weight arrays, with the
// training config and seed echoed so the fit can be replayed.
inline nlohmann::json model_to_json(const FnnModel& model, const TrainConfig& config) {
    nlohmann::json j = model.to_json();
    j["config"] = config.to_json();
    j["seed"] = config.seed;
    return j;
}

} // namespace clreserve
