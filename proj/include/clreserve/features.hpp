#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "clreserve/claims.hpp"
#include "clreserve/errors.hpp"

namespace clreserve {

struct FeatureConfig {
    bool use_incurred = false;

    int dim() const { return use_incurred ? 7 : 5; }
};

// Standardization statistics fitted once per run over all cells observed
// at valuation time, across all accident periods, claims and lags.
// Payments and incurred are standardized on the log scale, case reserves
// on the raw scale. Population standard deviation (divide by n).
struct NormStats {
    double pay_mean = 0.0, pay_sd = 1.0;
    bool has_incurred = false;
    double inc_mean = 0.0, inc_sd = 1.0;
    double res_mean = 0.0, res_sd = 1.0;
};

namespace detail {

inline double log1_clamped(double v) { return std::log(std::max(1.0, v)); }

struct MeanSd {
    double mean = 0.0, sd = 0.0;
};

inline MeanSd mean_sd(const std::vector<double>& xs, const char* what) {
    if (xs.size() < 2)
        throw validation_error(std::string("need at least 2 observations to standardize ") + what);
    double mean = 0.0;
    for (double v : xs)
        mean += v;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double v : xs)
        var += (v - mean) * (v - mean);
    var /= static_cast<double>(xs.size());
    if (var <= 0.0)
        throw validation_error(std::string("degenerate feature: zero variance in ") + what);
    return {mean, std::sqrt(var)};
}

} // namespace detail

inline NormStats fit_norm_stats(const Portfolio& p, const FeatureConfig& cfg) {
    if (cfg.use_incurred && !p.has_incurred())
        throw validation_error("feature configuration expects incurred but the portfolio has none");
    std::vector<double> pays, incs, reserves;
    for (const auto& c : p.claims) {
        int horizon = p.valuation_horizon(c);
        for (int j = c.reporting_delay_periods; j <= horizon; ++j) {
            pays.push_back(detail::log1_clamped(c.payment(j)));
            if (cfg.use_incurred) {
                incs.push_back(detail::log1_clamped(c.incurred_at(j)));
                reserves.push_back(c.case_reserve(j));
            }
        }
    }
    NormStats s;
    auto pay = detail::mean_sd(pays, "log payments");
    s.pay_mean = pay.mean;
    s.pay_sd = pay.sd;
    if (cfg.use_incurred) {
        s.has_incurred = true;
        auto inc = detail::mean_sd(incs, "log incurred");
        s.inc_mean = inc.mean;
        s.inc_sd = inc.sd;
        auto res = detail::mean_sd(reserves, "case reserves");
        s.res_mean = res.mean;
        s.res_sd = res.sd;
    }
    return s;
}

// Reporting delay in days, censored at 365, log-transformed and scaled so
// that 0 days -> 0 and the censor point -> 1.
inline double delay_feature(int delay_days) {
    double censored = static_cast<double>(std::min(delay_days, 365));
    return std::log1p(censored) / std::log(366.0);
}

inline double month_feature(int accident_month) {
    return (static_cast<double>(accident_month) - 1.0) / 11.0;
}

// Markov-reduced feature vector for one claim at lag j:
// [payments, status, line flag, month, delay] plus optionally
// [incurred, case reserve].
inline void featurize(const ClaimRecord& c, int lag, const NormStats& stats,
                      const FeatureConfig& cfg, double* out) {
    out[0] = (detail::log1_clamped(c.payment(lag)) - stats.pay_mean) / stats.pay_sd;
    out[1] = c.is_open(lag) ? 1.0 : 0.0;
    out[2] = static_cast<double>(c.line_flag);
    out[3] = month_feature(c.accident_month);
    out[4] = delay_feature(c.reporting_delay_days);
    if (cfg.use_incurred) {
        if (!c.has_incurred())
            throw validation_error("claim " + c.claim_id +
                                   " has no incurred sequence but the feature set requires it");
        out[5] = (detail::log1_clamped(c.incurred_at(lag)) - stats.inc_mean) / stats.inc_sd;
        out[6] = (c.case_reserve(lag) - stats.res_mean) / stats.res_sd;
    }
}

inline std::vector<double> featurize(const ClaimRecord& c, int lag, const NormStats& stats,
                                     const FeatureConfig& cfg) {
    std::vector<double> out(static_cast<size_t>(cfg.dim()));
    featurize(c, lag, stats, cfg, out.data());
    return out;
}

} // namespace clreserve
