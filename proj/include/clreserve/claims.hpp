#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "clreserve/errors.hpp"
#include "clreserve/triangle.hpp"

namespace clreserve {

// One individual claim. Sequences are indexed by development period
// j = 0..J, but entries before the reporting lag T are masked (NaN for
// amounts); use the accessors, which enforce the mask.
struct ClaimRecord {
    std::string claim_id;
    int accident_period = 0;           // 1-based
    int reporting_delay_periods = 0;   // T, drives cohort membership
    int reporting_delay_days = 0;      // covariate only
    int accident_month = 1;            // 1..12
    int line_flag = 0;                 // binary static covariate
    std::vector<double> payments;      // cumulative, index = dev period
    std::vector<uint8_t> status_open;  // 1 = open
    std::vector<double> incurred;      // empty when the portfolio has none

    bool has_incurred() const { return !incurred.empty(); }

    // Highest stored development period.
    int stored_dev() const { return static_cast<int>(payments.size()) - 1; }

    double payment(int dev_period) const {
        check(dev_period);
        return payments[static_cast<size_t>(dev_period)];
    }
    bool is_open(int dev_period) const {
        check(dev_period);
        return status_open[static_cast<size_t>(dev_period)] != 0;
    }
    double incurred_at(int dev_period) const {
        check(dev_period);
        if (!has_incurred())
            throw validation_error("claim " + claim_id + " has no incurred sequence");
        return incurred[static_cast<size_t>(dev_period)];
    }
    // Case reserve: incurred minus paid, derived on demand.
    double case_reserve(int dev_period) const {
        return incurred_at(dev_period) - payment(dev_period);
    }

private:
    void check(int dev_period) const {
        if (dev_period < reporting_delay_periods || dev_period > stored_dev())
            throw validation_error("claim " + claim_id + ": dev period " +
                                   std::to_string(dev_period) + " outside observed range [" +
                                   std::to_string(reporting_delay_periods) + "," +
                                   std::to_string(stored_dev()) + "]");
    }
};

struct Portfolio {
    int num_accident_periods = 0; // I
    int num_dev_periods = 0;      // J
    // True: records carry the full development to J (simulated or backtest
    // data); predictions may then be scored against known outcomes.
    bool evaluation_square = false;
    std::vector<ClaimRecord> claims;

    // Last development period of a claim observable at valuation time I.
    int valuation_horizon(const ClaimRecord& c) const {
        return std::min(num_dev_periods, num_accident_periods - c.accident_period);
    }

    void validate() const {
        const int I = num_accident_periods;
        const int J = num_dev_periods;
        if (J < 1 || I <= J)
            throw validation_error("portfolio needs I > J >= 1, got I=" + std::to_string(I) +
                                   ", J=" + std::to_string(J));
        for (const auto& c : claims) {
            if (c.accident_period < 1 || c.accident_period > I)
                throw validation_error("claim " + c.claim_id + ": accident period " +
                                       std::to_string(c.accident_period) + " outside 1.." +
                                       std::to_string(I));
            if (c.reporting_delay_periods < 0 || c.reporting_delay_periods > J)
                throw validation_error("claim " + c.claim_id + ": reporting delay " +
                                       std::to_string(c.reporting_delay_periods) +
                                       " outside 0.." + std::to_string(J));
            if (c.accident_period + c.reporting_delay_periods > I)
                throw validation_error("claim " + c.claim_id +
                                       " is IBNR at valuation (i + T > I) and cannot be included");
            if (c.accident_month < 1 || c.accident_month > 12)
                throw validation_error("claim " + c.claim_id + ": accident month out of range");
            if (c.reporting_delay_days < 0)
                throw validation_error("claim " + c.claim_id + ": negative reporting delay days");
            int expect = (evaluation_square ? J : valuation_horizon(c)) + 1;
            if (c.payments.size() != static_cast<size_t>(expect) ||
                c.status_open.size() != static_cast<size_t>(expect))
                throw validation_error("claim " + c.claim_id + ": sequence length " +
                                       std::to_string(c.payments.size()) + ", expected " +
                                       std::to_string(expect));
            if (c.has_incurred() && c.incurred.size() != static_cast<size_t>(expect))
                throw validation_error("claim " + c.claim_id + ": incurred length mismatch");
            for (int j = c.reporting_delay_periods; j < expect; ++j) {
                double v = c.payments[static_cast<size_t>(j)];
                if (!std::isfinite(v) || v < 0.0)
                    throw validation_error("claim " + c.claim_id + ": payment at dev " +
                                           std::to_string(j) + " must be finite and >= 0");
                if (c.has_incurred()) {
                    double inc = c.incurred[static_cast<size_t>(j)];
                    if (!std::isfinite(inc) || inc < 0.0)
                        throw validation_error("claim " + c.claim_id + ": incurred at dev " +
                                               std::to_string(j) + " must be finite and >= 0");
                }
            }
        }
        // Feature dimension must be homogeneous per run.
        bool any_inc = false, all_inc = true;
        for (const auto& c : claims) {
            any_inc |= c.has_incurred();
            all_inc &= c.has_incurred();
        }
        if (any_inc && !all_inc)
            throw validation_error("portfolio mixes claims with and without incurred sequences");
    }

    bool has_incurred() const { return !claims.empty() && claims.front().has_incurred(); }
};

// Restricts every claim to what is observable at valuation time I. Claims
// in the portfolio are reported ones, so none disappear.
inline Portfolio censor_to_valuation(const Portfolio& p) {
    Portfolio out;
    out.num_accident_periods = p.num_accident_periods;
    out.num_dev_periods = p.num_dev_periods;
    out.evaluation_square = false;
    out.claims.reserve(p.claims.size());
    for (const auto& c : p.claims) {
        ClaimRecord r = c;
        size_t n = static_cast<size_t>(p.valuation_horizon(c)) + 1;
        r.payments.resize(n);
        r.status_open.resize(n);
        if (r.has_incurred())
            r.incurred.resize(n);
        out.claims.push_back(std::move(r));
    }
    return out;
}

// Aggregates reported individual payments into the run-off triangle:
// C_{i,j} = sum over claims of period i with T <= j.
inline Triangle aggregate(const Portfolio& p) {
    const int I = p.num_accident_periods;
    const int J = p.num_dev_periods;
    std::vector<std::vector<double>> rows(static_cast<size_t>(I));
    for (int i = 1; i <= I; ++i)
        rows[static_cast<size_t>(i - 1)].assign(static_cast<size_t>(std::min(J, I - i)) + 1, 0.0);
    for (const auto& c : p.claims) {
        int horizon = p.valuation_horizon(c);
        for (int j = c.reporting_delay_periods; j <= horizon; ++j)
            rows[static_cast<size_t>(c.accident_period - 1)][static_cast<size_t>(j)] +=
                c.payment(j);
    }
    for (int i = 1; i <= I; ++i)
        for (size_t j = 0; j < rows[static_cast<size_t>(i - 1)].size(); ++j)
            if (rows[static_cast<size_t>(i - 1)][j] <= 0.0)
                throw validation_error("aggregate cell (" + std::to_string(i) + "," +
                                       std::to_string(j) + ") is not strictly positive");
    return Triangle(I, J, std::move(rows), false);
}

// Claims of accident periods <= i_max reported by lag j (T <= j).
inline std::vector<size_t> cohort(const Portfolio& p, int i_max, int j) {
    if (j < 0 || j > p.num_dev_periods - 1)
        throw validation_error("cohort lag " + std::to_string(j) + " outside 0.." +
                               std::to_string(p.num_dev_periods - 1));
    std::vector<size_t> out;
    for (size_t k = 0; k < p.claims.size(); ++k) {
        const auto& c = p.claims[k];
        if (c.accident_period <= i_max && c.reporting_delay_periods <= j)
            out.push_back(k);
    }
    return out;
}

struct OutstandingLiabilities {
    std::vector<double> by_period; // index i-1
    double total = 0.0;
};

// True outstanding loss liabilities: ultimate minus paid-to-date, per
// reported claim. Needs the full square.
inline OutstandingLiabilities true_oll(const Portfolio& p) {
    if (!p.evaluation_square)
        throw validation_error("true outstanding liabilities unavailable: portfolio has no full square");
    OutstandingLiabilities oll;
    oll.by_period.assign(static_cast<size_t>(p.num_accident_periods), 0.0);
    for (const auto& c : p.claims) {
        double v = c.payment(p.num_dev_periods) - c.payment(p.valuation_horizon(c));
        oll.by_period[static_cast<size_t>(c.accident_period - 1)] += v;
        oll.total += v;
    }
    return oll;
}

} // namespace clreserve
