#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "clreserve/claims.hpp"
#include "clreserve/errors.hpp"
#include "clreserve/random.hpp"

namespace clreserve {

// Synthetic individual-claims generator. Emits fully observed squares so
// predictions can be scored against known outcomes; a censored valuation
// view is derived with censor_to_valuation(). All randomness is derived
// from the seed, claim by claim.
struct SimConfig {
    int num_accident_periods = 6; // I
    int num_dev_periods = 3;      // J
    double expected_claims_per_period = 1000.0;
    // Probability of reporting delay 0..J in period units; shorter vectors
    // are padded with zeros.
    std::vector<double> reporting_delay_probs = {1.0};
    double severity_scale = 100.0; // lognormal scale of the initial payment
    double severity_sigma = 1.0;
    // Expected one-period development factor per lag (length J). With the
    // status effect on, this profile applies to open claims and closed
    // claims stay flat.
    std::vector<double> dev_factor_profile;
    double dev_noise_sigma = 0.0; // claim-level mean-one lognormal factor noise

    bool status_effect = false;
    bool line_effect = false; // line 1 develops 50% harder
    bool month_seasonality = false;
    bool with_incurred = false;
    bool incurred_noise = true; // off = adjuster knows the ultimate exactly
    double incurred_noise_sigma = 0.3;

    double open_at_report_prob = 0.8;
    double close_prob_base = 0.35;  // closing probability grows with the lag
    double close_prob_slope = 0.15;
    double reopen_prob = 0.02;

    uint64_t seed = 1;

    double close_prob(int lag) const {
        return std::clamp(close_prob_base + close_prob_slope * lag, 0.0, 0.99);
    }

    void validate() const {
        if (num_dev_periods < 1 || num_accident_periods <= num_dev_periods)
            throw validation_error("simulation config: need I > J >= 1");
        if (expected_claims_per_period <= 0.0)
            throw validation_error("simulation config: expected claims per period must be positive");
        if (reporting_delay_probs.empty() ||
            reporting_delay_probs.size() > static_cast<size_t>(num_dev_periods) + 1)
            throw validation_error("simulation config: delay distribution must cover 0..J");
        double sum = 0.0;
        for (double p : reporting_delay_probs) {
            if (p < 0.0)
                throw validation_error("simulation config: negative delay probability");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw validation_error("simulation config: delay probabilities must sum to 1");
        if (dev_factor_profile.size() != static_cast<size_t>(num_dev_periods))
            throw validation_error("simulation config: development profile must have J entries");
        for (double f : dev_factor_profile)
            if (!(f > 0.0))
                throw validation_error("simulation config: development factors must be positive");
        if (severity_scale <= 0.0 || severity_sigma < 0.0 || dev_noise_sigma < 0.0 ||
            incurred_noise_sigma < 0.0)
            throw validation_error("simulation config: negative scale or dispersion");
        for (double p : {open_at_report_prob, reopen_prob})
            if (p < 0.0 || p > 1.0)
                throw validation_error("simulation config: probabilities must be in [0,1]");
    }

    nlohmann::json to_json() const {
        return {{"num_accident_periods", num_accident_periods},
                {"num_dev_periods", num_dev_periods},
                {"expected_claims_per_period", expected_claims_per_period},
                {"reporting_delay_probs", reporting_delay_probs},
                {"severity_scale", severity_scale},
                {"severity_sigma", severity_sigma},
                {"dev_factor_profile", dev_factor_profile},
                {"dev_noise_sigma", dev_noise_sigma},
                {"status_effect", status_effect},
                {"line_effect", line_effect},
                {"month_seasonality", month_seasonality},
                {"with_incurred", with_incurred},
                {"incurred_noise", incurred_noise},
                {"incurred_noise_sigma", incurred_noise_sigma},
                {"open_at_report_prob", open_at_report_prob},
                {"close_prob_base", close_prob_base},
                {"close_prob_slope", close_prob_slope},
                {"reopen_prob", reopen_prob},
                {"seed", seed}};
    }

    static SimConfig from_json(const nlohmann::json& j) {
        SimConfig c;
        c.num_accident_periods = j.value("num_accident_periods", c.num_accident_periods);
        c.num_dev_periods = j.value("num_dev_periods", c.num_dev_periods);
        c.expected_claims_per_period =
            j.value("expected_claims_per_period", c.expected_claims_per_period);
        c.reporting_delay_probs = j.value("reporting_delay_probs", c.reporting_delay_probs);
        c.severity_scale = j.value("severity_scale", c.severity_scale);
        c.severity_sigma = j.value("severity_sigma", c.severity_sigma);
        c.dev_factor_profile = j.value("dev_factor_profile", c.dev_factor_profile);
        c.dev_noise_sigma = j.value("dev_noise_sigma", c.dev_noise_sigma);
        c.status_effect = j.value("status_effect", c.status_effect);
        c.line_effect = j.value("line_effect", c.line_effect);
        c.month_seasonality = j.value("month_seasonality", c.month_seasonality);
        c.with_incurred = j.value("with_incurred", c.with_incurred);
        c.incurred_noise = j.value("incurred_noise", c.incurred_noise);
        c.incurred_noise_sigma = j.value("incurred_noise_sigma", c.incurred_noise_sigma);
        c.open_at_report_prob = j.value("open_at_report_prob", c.open_at_report_prob);
        c.close_prob_base = j.value("close_prob_base", c.close_prob_base);
        c.close_prob_slope = j.value("close_prob_slope", c.close_prob_slope);
        c.reopen_prob = j.value("reopen_prob", c.reopen_prob);
        c.seed = j.value("seed", c.seed);
        c.validate();
        return c;
    }
};

namespace detail {

// Expected one-period factor applied between lag and lag+1 given the
// claim's state. Development noise has mean exactly one, so these products
// are the true conditional means.
inline double expected_factor(const SimConfig& cfg, int lag, bool open, int line_flag) {
    double f = cfg.dev_factor_profile[static_cast<size_t>(lag)];
    if (cfg.line_effect && line_flag == 1)
        f = 1.0 + (f - 1.0) * 1.5;
    if (cfg.status_effect)
        return open ? f : 1.0;
    return f;
}

} // namespace detail

// Closed-form conditional mean development from the generator's own
// parameters: E[C_J / C_lag | state at lag] for a claim that is open/closed
// at the given lag. Follows the status Markov chain.
inline double conditional_mean_ultimate_factor(const SimConfig& cfg, int lag, bool open,
                                               int line_flag = 0) {
    const int J = cfg.num_dev_periods;
    if (lag < 0 || lag > J)
        throw validation_error("conditional mean requested outside 0..J");
    // g[l][o]: expected remaining development from lag l in status o.
    std::vector<std::array<double, 2>> g(static_cast<size_t>(J) + 1, {1.0, 1.0});
    for (int l = J - 1; l >= 0; --l) {
        double p_close = cfg.close_prob(l + 1);
        const auto& next = g[static_cast<size_t>(l + 1)];
        double open_factor = detail::expected_factor(cfg, l, true, line_flag);
        double closed_factor = detail::expected_factor(cfg, l, false, line_flag);
        g[static_cast<size_t>(l)][1] =
            open_factor * ((1.0 - p_close) * next[1] + p_close * next[0]);
        g[static_cast<size_t>(l)][0] =
            closed_factor * (cfg.reopen_prob * next[1] + (1.0 - cfg.reopen_prob) * next[0]);
    }
    return g[static_cast<size_t>(lag)][open ? 1 : 0];
}

inline Portfolio simulate(const SimConfig& cfg) {
    cfg.validate();
    const int I = cfg.num_accident_periods;
    const int J = cfg.num_dev_periods;

    Portfolio p;
    p.num_accident_periods = I;
    p.num_dev_periods = J;
    p.evaluation_square = true;

    std::vector<double> delay_probs = cfg.reporting_delay_probs;
    delay_probs.resize(static_cast<size_t>(J) + 1, 0.0);

    for (int i = 1; i <= I; ++i) {
        std::mt19937_64 count_rng = make_rng(derive_seed(cfg.seed, 0xC0117ULL, static_cast<uint64_t>(i)));
        std::poisson_distribution<int> n_claims(cfg.expected_claims_per_period);
        int n = n_claims(count_rng);
        for (int k = 0; k < n; ++k) {
            std::mt19937_64 rng = make_rng(
                derive_seed(cfg.seed, static_cast<uint64_t>(i), static_cast<uint64_t>(k)));
            std::uniform_real_distribution<double> unit(0.0, 1.0);

            ClaimRecord c;
            c.claim_id = "c" + std::to_string(i) + "-" + std::to_string(k + 1);
            c.accident_period = i;
            c.accident_month = 1 + static_cast<int>(rng() % 12);
            c.line_flag = static_cast<int>(rng() % 2);

            double u = unit(rng);
            int delay = J;
            double acc = 0.0;
            for (int d = 0; d <= J; ++d) {
                acc += delay_probs[static_cast<size_t>(d)];
                if (u <= acc) {
                    delay = d;
                    break;
                }
            }
            c.reporting_delay_periods = delay;
            c.reporting_delay_days = delay * 365 + static_cast<int>(rng() % 365);

            // Later-reported claims are IBNR at valuation time and stay out.
            if (i + delay > I)
                continue;

            double scale = cfg.severity_scale;
            if (cfg.month_seasonality)
                scale *= 1.0 + 0.25 * std::sin(2.0 * M_PI * (c.accident_month - 1) / 12.0);
            std::normal_distribution<double> normal(0.0, 1.0);
            double initial = scale * std::exp(cfg.severity_sigma * normal(rng));

            size_t len = static_cast<size_t>(J) + 1;
            c.payments.assign(len, std::numeric_limits<double>::quiet_NaN());
            c.status_open.assign(len, 0);

            c.payments[static_cast<size_t>(delay)] = initial;
            bool open = unit(rng) < cfg.open_at_report_prob;
            c.status_open[static_cast<size_t>(delay)] = open ? 1 : 0;

            for (int l = delay; l < J; ++l) {
                bool open_now = c.status_open[static_cast<size_t>(l)] != 0;
                double factor = detail::expected_factor(cfg, l, open_now, c.line_flag);
                double cur = c.payments[static_cast<size_t>(l)];
                double next;
                if (cfg.status_effect && !open_now) {
                    next = cur; // closed claims pay nothing until re-opened
                } else {
                    double noise = 1.0;
                    if (cfg.dev_noise_sigma > 0.0)
                        noise = std::exp(cfg.dev_noise_sigma * normal(rng) -
                                         0.5 * cfg.dev_noise_sigma * cfg.dev_noise_sigma);
                    next = cur * factor * noise;
                }
                c.payments[static_cast<size_t>(l + 1)] = next;
                bool open_next = open_now ? unit(rng) >= cfg.close_prob(l + 1)
                                          : unit(rng) < cfg.reopen_prob;
                c.status_open[static_cast<size_t>(l + 1)] = open_next ? 1 : 0;
            }

            if (cfg.with_incurred) {
                c.incurred.assign(len, std::numeric_limits<double>::quiet_NaN());
                double ultimate = c.payments[static_cast<size_t>(J)];
                for (int l = delay; l <= J; ++l) {
                    double noise = 1.0;
                    if (cfg.incurred_noise && l < J) {
                        double sd = cfg.incurred_noise_sigma * (J - l) / static_cast<double>(J);
                        noise = std::exp(sd * normal(rng));
                    }
                    c.incurred[static_cast<size_t>(l)] = ultimate * noise;
                }
            }

            p.claims.push_back(std::move(c));
        }
    }
    p.validate();
    return p;
}

// Scenario with payoff-relevant covariates: the status bit carries signal
// because closed claims stay flat while open claims keep developing.
inline Portfolio informative_scenario(const SimConfig& cfg) {
    cfg.validate();
    if (!cfg.status_effect)
        throw validation_error("informative scenario requires the status effect to be on");
    bool any_growth = false;
    for (double f : cfg.dev_factor_profile)
        any_growth |= f > 1.0;
    if (!any_growth)
        throw validation_error("informative scenario needs development factors above 1 for open claims");
    return simulate(cfg);
}

} // namespace clreserve
