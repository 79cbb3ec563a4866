#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "clreserve/claims.hpp"
#include "clreserve/csv.hpp"
#include "clreserve/errors.hpp"
#include "clreserve/features.hpp"
#include "clreserve/fnn.hpp"
#include "clreserve/parallel.hpp"
#include "clreserve/random.hpp"
#include "clreserve/rbns.hpp"
#include "clreserve/train.hpp"

namespace clreserve {

struct PipelineConfig {
    FeatureConfig features;
    TrainConfig train; // per-member seeds are derived from master_seed
    std::vector<int> hidden = {20, 15, 10};
    int n_seeds = 10; // ensemble members per recursion step
    uint64_t master_seed = 1;
    bool parallel_fits = true;

    void validate() const {
        train.validate();
        if (n_seeds < 1)
            throw validation_error("pipeline config: need at least one ensemble member");
        if (hidden.empty())
            throw validation_error("pipeline config: need at least one hidden layer");
        for (int h : hidden)
            if (h < 1)
                throw validation_error("pipeline config: hidden layer sizes must be positive");
    }

    nlohmann::json to_json() const {
        return {{"use_incurred", features.use_incurred},
                {"train", train.to_json()},
                {"hidden", hidden},
                {"n_seeds", n_seeds},
                {"master_seed", master_seed},
                {"parallel_fits", parallel_fits}};
    }

    static PipelineConfig from_json(const nlohmann::json& j) {
        PipelineConfig c;
        c.features.use_incurred = j.value("use_incurred", false);
        if (j.contains("train"))
            c.train = TrainConfig::from_json(j.at("train"));
        c.hidden = j.value("hidden", c.hidden);
        c.n_seeds = j.value("n_seeds", c.n_seeds);
        c.master_seed = j.value("master_seed", c.master_seed);
        c.parallel_fits = j.value("parallel_fits", c.parallel_fits);
        c.validate();
        return c;
    }
};

// One learning example: the claim (whose record carries its whole observed
// history up to the lag) and the ultimate used as regression target. The
// Markov feature reduction happens at fit time, so a richer feature map can
// replace it without changing this schema.
struct LearningEntry {
    size_t claim_index = 0;
    double target = 0.0;
    bool appended = false; // target is an earlier prediction, not an observed ultimate
};

struct LearningSet {
    int lag = 0;
    std::vector<LearningEntry> entries;
};

// Learning data for recursion step `lag`: fully developed claims with their
// observed ultimates plus already-predicted claims of later accident
// periods, all restricted to the cohort reported by `lag`.
inline LearningSet build_learning_set(const Portfolio& p, int lag,
                                      const std::vector<double>& appended) {
    const int I = p.num_accident_periods;
    const int J = p.num_dev_periods;
    if (lag < 0 || lag > J - 1)
        throw validation_error("learning set lag outside 0..J-1");
    if (appended.size() != p.claims.size())
        throw validation_error("appended prediction vector does not match the portfolio");
    LearningSet ls;
    ls.lag = lag;
    for (size_t k = 0; k < p.claims.size(); ++k) {
        const auto& c = p.claims[k];
        if (c.reporting_delay_periods > lag)
            continue;
        if (c.accident_period <= I - J) {
            ls.entries.push_back({k, c.payment(J), false});
        } else if (c.accident_period <= I - lag - 1) {
            double pred = appended[k];
            if (std::isnan(pred))
                throw numeric_error("recursion-order violation: claim " + c.claim_id +
                                    " of accident period " + std::to_string(c.accident_period) +
                                    " has no appended prediction at lag " + std::to_string(lag));
            ls.entries.push_back({k, pred, true});
        }
    }
    return ls;
}

// Balance-corrected ensemble: every member is scaled so its in-sample sum
// matches the target sum, then members are averaged.
struct Ensemble {
    std::vector<FnnModel> members;
    std::vector<double> scales;

    double predict(std::span<const double> x) const {
        double acc = 0.0;
        for (size_t m = 0; m < members.size(); ++m)
            acc += scales[m] * members[m].forward(x);
        return acc / static_cast<double>(members.size());
    }
};

// Attachment point for expert adjustments of a fitted step (e.g. pulling
// members toward an aggregate benchmark) before predictions are made.
using EnsembleHook = std::function<void(int lag, Ensemble&)>;

struct BalanceRecord {
    int lag = 0;
    size_t entries = 0;
    double sum_targets = 0.0;
    double sum_ensemble_predictions = 0.0; // in-sample, after correction
    std::vector<double> member_scales;
    bool degenerate_targets = false; // all targets zero: predictor collapses to 0

    double rel_gap() const {
        if (sum_targets == 0.0)
            return std::abs(sum_ensemble_predictions);
        return std::abs(sum_ensemble_predictions - sum_targets) / std::abs(sum_targets);
    }
};

// Trains n_seeds networks on the learning set (Markov-reduced features),
// attaches the multiplicative balance correction to each member and
// averages. Fits are independent and may run concurrently; the result is
// identical either way.
inline Ensemble fit_step(const Portfolio& p, const LearningSet& ls, const NormStats& stats,
                         const PipelineConfig& cfg, BalanceRecord* record = nullptr,
                         const EnsembleHook& hook = {}) {
    cfg.validate();
    if (ls.entries.empty())
        throw validation_error("learning set at lag " + std::to_string(ls.lag) + " is empty");

    Dataset data;
    data.dim = cfg.features.dim();
    data.x.reserve(ls.entries.size() * static_cast<size_t>(data.dim));
    std::vector<double> row(static_cast<size_t>(data.dim));
    double sum_targets = 0.0;
    for (const auto& e : ls.entries) {
        featurize(p.claims[e.claim_index], ls.lag, stats, cfg.features, row.data());
        data.push_row(row.data(), e.target, static_cast<uint32_t>(e.claim_index));
        sum_targets += e.target;
    }

    Ensemble ens;
    ens.members.resize(static_cast<size_t>(cfg.n_seeds));
    ens.scales.assign(static_cast<size_t>(cfg.n_seeds), 0.0);

    auto fit_member = [&](size_t m) {
        TrainConfig tc = cfg.train;
        tc.seed = derive_seed(cfg.master_seed, static_cast<uint64_t>(ls.lag) + 1, m + 1);
        FnnModel model = train(data, tc, cfg.hidden);
        double raw_sum = 0.0;
        for (size_t r = 0; r < data.rows(); ++r)
            raw_sum += model.forward(
                std::span<const double>(data.x.data() + r * static_cast<size_t>(data.dim),
                                        static_cast<size_t>(data.dim)));
        ens.members[m] = std::move(model);
        ens.scales[m] = sum_targets / raw_sum; // raw_sum > 0: outputs are positive
    };
    parallel_for_index(static_cast<size_t>(cfg.n_seeds), fit_member,
                       cfg.parallel_fits ? 0 : 1);

    if (hook)
        hook(ls.lag, ens);

    if (record) {
        record->lag = ls.lag;
        record->entries = ls.entries.size();
        record->sum_targets = sum_targets;
        record->member_scales = ens.scales;
        record->degenerate_targets = sum_targets == 0.0;
        double insample = 0.0;
        for (size_t r = 0; r < data.rows(); ++r)
            insample += ens.predict(
                std::span<const double>(data.x.data() + r * static_cast<size_t>(data.dim),
                                        static_cast<size_t>(data.dim)));
        record->sum_ensemble_predictions = insample;
    }
    return ens;
}

struct PipelineResult {
    // Predicted ultimate per claim; observed ultimates for claims of fully
    // developed accident periods.
    std::vector<double> claim_ultimates;
    std::vector<double> reserve_by_period; // index i-1
    double total_reserve = 0.0;
    std::vector<BalanceRecord> steps; // one per lag, J-1 down to 0
    RbnsResult cl_benchmark;          // reported-claims PtU reference
    uint64_t master_seed = 0;
    bool oracle_targets = false;
};

namespace detail {

inline PipelineResult run_pipeline_impl(const Portfolio& p, const PipelineConfig& cfg,
                                        bool oracle_targets, const EnsembleHook& hook) {
    p.validate();
    cfg.validate();
    if (oracle_targets && !p.evaluation_square)
        throw validation_error("oracle-target pipeline unavailable: portfolio has no full square");
    const int I = p.num_accident_periods;
    const int J = p.num_dev_periods;
    const double nan = std::numeric_limits<double>::quiet_NaN();

    NormStats stats = fit_norm_stats(p, cfg.features);

    PipelineResult res;
    res.master_seed = cfg.master_seed;
    res.oracle_targets = oracle_targets;
    res.cl_benchmark = rbns_ptu(p);

    std::vector<double> appended(p.claims.size(), nan);

    for (int lag = J - 1; lag >= 0; --lag) {
        LearningSet ls;
        if (oracle_targets) {
            // Same cohorts and index ranges, but appended-estimate entries
            // carry the true ultimates (non-recursive targets).
            std::vector<double> truth(p.claims.size(), nan);
            for (size_t k = 0; k < p.claims.size(); ++k)
                truth[k] = p.claims[k].payment(J);
            ls = build_learning_set(p, lag, truth);
        } else {
            ls = build_learning_set(p, lag, appended);
        }

        BalanceRecord record;
        Ensemble ens;
        try {
            ens = fit_step(p, ls, stats, cfg, &record, hook);
        } catch (const validation_error& e) {
            throw validation_error("pipeline step at lag " + std::to_string(lag) + ": " + e.what());
        } catch (const numeric_error& e) {
            throw numeric_error("pipeline step at lag " + std::to_string(lag) +
                                " (accident period " + std::to_string(I - lag) + "): " + e.what());
        }
        res.steps.push_back(record);

        int target_period = I - lag;
        std::vector<double> x(static_cast<size_t>(cfg.features.dim()));
        for (size_t k = 0; k < p.claims.size(); ++k) {
            const auto& c = p.claims[k];
            if (c.accident_period != target_period || c.reporting_delay_periods > lag)
                continue;
            featurize(c, lag, stats, cfg.features, x.data());
            appended[k] = ens.predict(x);
        }
    }

    res.claim_ultimates.assign(p.claims.size(), 0.0);
    res.reserve_by_period.assign(static_cast<size_t>(I), 0.0);
    for (size_t k = 0; k < p.claims.size(); ++k) {
        const auto& c = p.claims[k];
        double ultimate =
            c.accident_period <= I - J ? c.payment(J) : appended[k];
        if (std::isnan(ultimate))
            throw numeric_error("claim " + c.claim_id + " received no pipeline prediction");
        res.claim_ultimates[k] = ultimate;
        double reserve = ultimate - c.payment(p.valuation_horizon(c));
        res.reserve_by_period[static_cast<size_t>(c.accident_period - 1)] += reserve;
        res.total_reserve += reserve;
    }
    return res;
}

} // namespace detail

// Recursive one-shot individual reserving: one balance-corrected ensemble
// per lag, fitted backwards from the upper-right corner, each step's
// predictions appended as targets for the next.
inline PipelineResult run_pipeline(const Portfolio& p, const PipelineConfig& cfg,
                                   const EnsembleHook& hook = {}) {
    return detail::run_pipeline_impl(p, cfg, false, hook);
}

// Backtesting variant: training targets for not-yet-developed accident
// periods are the true ultimates instead of recursive estimates. Isolates
// the bias introduced by the recursion; needs the full square.
inline PipelineResult run_pipeline_oracle_targets(const Portfolio& p, const PipelineConfig& cfg,
                                                  const EnsembleHook& hook = {}) {
    return detail::run_pipeline_impl(p, cfg, true, hook);
}

struct EvaluationRow {
    int accident_period = 0; // 0 marks the totals row
    double true_oll = 0.0;
    double cl_reserve = 0.0;
    double fnn_reserve = 0.0;
    double cl_error = 0.0;
    double fnn_error = 0.0;
    double cl_ind_rmse = 0.0;
    double fnn_ind_rmse = 0.0;
};

struct EvaluationReport {
    std::vector<EvaluationRow> rows;
    EvaluationRow total; // pooled per-claim RMSE over all predicted periods
};

// Scores pipeline and CL benchmark against the known square: reserves,
// reserve errors and per-claim RMSE of the predicted ultimates.
inline EvaluationReport evaluate(const PipelineResult& result, const Portfolio& p) {
    if (!p.evaluation_square)
        throw validation_error("evaluation unavailable: portfolio has no full square");
    if (result.claim_ultimates.size() != p.claims.size())
        throw validation_error("pipeline result does not match the portfolio");
    const int I = p.num_accident_periods;
    const int J = p.num_dev_periods;

    OutstandingLiabilities oll = true_oll(p);
    const RbnsResult& cl = result.cl_benchmark;

    EvaluationReport rep;
    std::vector<double> cl_sq(static_cast<size_t>(I), 0.0), fnn_sq(static_cast<size_t>(I), 0.0);
    std::vector<size_t> counts(static_cast<size_t>(I), 0);
    for (size_t k = 0; k < p.claims.size(); ++k) {
        const auto& c = p.claims[k];
        if (c.accident_period <= I - J)
            continue;
        double truth = c.payment(J);
        double cl_err = cl.claim_ultimates[k] - truth;
        double fnn_err = result.claim_ultimates[k] - truth;
        size_t idx = static_cast<size_t>(c.accident_period - 1);
        cl_sq[idx] += cl_err * cl_err;
        fnn_sq[idx] += fnn_err * fnn_err;
        ++counts[idx];
    }

    double cl_sq_all = 0.0, fnn_sq_all = 0.0;
    size_t count_all = 0;
    for (int i = 1; i <= I; ++i) {
        size_t idx = static_cast<size_t>(i - 1);
        EvaluationRow row;
        row.accident_period = i;
        row.true_oll = oll.by_period[idx];
        row.cl_reserve = cl.reserve_by_period[idx];
        row.fnn_reserve = result.reserve_by_period[idx];
        row.cl_error = row.cl_reserve - row.true_oll;
        row.fnn_error = row.fnn_reserve - row.true_oll;
        if (counts[idx] > 0) {
            row.cl_ind_rmse = std::sqrt(cl_sq[idx] / static_cast<double>(counts[idx]));
            row.fnn_ind_rmse = std::sqrt(fnn_sq[idx] / static_cast<double>(counts[idx]));
        }
        rep.rows.push_back(row);
        rep.total.true_oll += row.true_oll;
        rep.total.cl_reserve += row.cl_reserve;
        rep.total.fnn_reserve += row.fnn_reserve;
        cl_sq_all += cl_sq[idx];
        fnn_sq_all += fnn_sq[idx];
        count_all += counts[idx];
    }
    rep.total.accident_period = 0;
    rep.total.cl_error = rep.total.cl_reserve - rep.total.true_oll;
    rep.total.fnn_error = rep.total.fnn_reserve - rep.total.true_oll;
    if (count_all > 0) {
        rep.total.cl_ind_rmse = std::sqrt(cl_sq_all / static_cast<double>(count_all));
        rep.total.fnn_ind_rmse = std::sqrt(fnn_sq_all / static_cast<double>(count_all));
    }
    return rep;
}

// ---- CSV writers -----------------------------------------------------------

inline std::string predictions_to_csv(const Portfolio& p, const PipelineResult& result) {
    std::string out = "claim_id,accident_period,prediction,paid_to_date,reserve\n";
    for (size_t k = 0; k < p.claims.size(); ++k) {
        const auto& c = p.claims[k];
        double paid = c.payment(p.valuation_horizon(c));
        double pred = result.claim_ultimates[k];
        out += c.claim_id + ',' + std::to_string(c.accident_period) + ',' +
               csv::format_double(pred) + ',' + csv::format_double(paid) + ',' +
               csv::format_double(pred - paid) + '\n';
    }
    return out;
}

inline std::string reserves_to_csv(const PipelineResult& result) {
    std::string out = "accident_period,rbns_cl_reserve,fnn_reserve\n";
    for (size_t i = 0; i < result.reserve_by_period.size(); ++i)
        out += std::to_string(i + 1) + ',' +
               csv::format_double(result.cl_benchmark.reserve_by_period[i]) + ',' +
               csv::format_double(result.reserve_by_period[i]) + '\n';
    out += "total," + csv::format_double(result.cl_benchmark.total_reserve) + ',' +
           csv::format_double(result.total_reserve) + '\n';
    return out;
}

inline std::string balance_to_csv(const PipelineResult& result) {
    std::string out = "lag,entries,sum_targets,sum_ensemble_predictions,rel_gap\n";
    for (const auto& s : result.steps)
        out += std::to_string(s.lag) + ',' + std::to_string(s.entries) + ',' +
               csv::format_double(s.sum_targets) + ',' +
               csv::format_double(s.sum_ensemble_predictions) + ',' +
               csv::format_double(s.rel_gap()) + '\n';
    return out;
}

inline std::string evaluation_to_csv(const EvaluationReport& rep) {
    std::string out =
        "accident_period,true_oll,rbns_cl_reserve,fnn_reserve,cl_error,fnn_error,"
        "cl_ind_rmse,fnn_ind_rmse\n";
    auto line = [](const std::string& label, const EvaluationRow& r) {
        return label + ',' + csv::format_double(r.true_oll) + ',' +
               csv::format_double(r.cl_reserve) + ',' + csv::format_double(r.fnn_reserve) + ',' +
               csv::format_double(r.cl_error) + ',' + csv::format_double(r.fnn_error) + ',' +
               csv::format_double(r.cl_ind_rmse) + ',' + csv::format_double(r.fnn_ind_rmse) + '\n';
    };
    for (const auto& r : rep.rows)
        out += line(std::to_string(r.accident_period), r);
    out += line("total", rep.total);
    return out;
}

inline nlohmann::json evaluation_to_json(const EvaluationReport& rep) {
    auto row = [](const EvaluationRow& r) {
        return nlohmann::json{{"accident_period", r.accident_period},
                              {"true_oll", r.true_oll},
                              {"rbns_cl_reserve", r.cl_reserve},
                              {"fnn_reserve", r.fnn_reserve},
                              {"cl_error", r.cl_error},
                              {"fnn_error", r.fnn_error},
                              {"cl_ind_rmse", r.cl_ind_rmse},
                              {"fnn_ind_rmse", r.fnn_ind_rmse}};
    };
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : rep.rows)
        rows.push_back(row(r));
    return {{"rows", rows}, {"total", row(rep.total)}};
}

} // namespace clreserve
