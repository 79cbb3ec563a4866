#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "clreserve/claims.hpp"
#include "clreserve/errors.hpp"

namespace clreserve {

struct RbnsResult {
    std::vector<double> factors;          // reported-claims PtU factors, j = 0..J-1
    std::vector<double> claim_ultimates;  // aligned with portfolio.claims
    std::vector<double> reserve_by_period; // index i-1
    double total_reserve = 0.0;
};

// Reported-claims version of the backward PtU recursion. Each factor is
// estimated on a fixed cohort (T <= j) that appears identically in the
// numerator and denominator; per-claim ultimates are appended after each
// step and feed the numerators of later steps.
inline RbnsResult rbns_ptu(const Portfolio& p) {
    p.validate();
    const int I = p.num_accident_periods;
    const int J = p.num_dev_periods;
    const size_t n = p.claims.size();

    RbnsResult res;
    res.factors.assign(static_cast<size_t>(J), 0.0);
    res.claim_ultimates.assign(n, 0.0);
    std::vector<char> has_ultimate(n, 0);

    for (size_t k = 0; k < n; ++k) {
        const auto& c = p.claims[k];
        if (c.accident_period <= I - J) {
            res.claim_ultimates[k] = c.payment(J);
            has_ultimate[k] = 1;
        }
    }

    for (int j = J - 1; j >= 0; --j) {
        double num = 0.0, den = 0.0;
        size_t cohort_size = 0;
        // Deterministic order: claims are scanned in storage order, which
        // the loaders keep sorted by accident period.
        for (size_t k = 0; k < n; ++k) {
            const auto& c = p.claims[k];
            if (c.accident_period > I - j - 1 || c.reporting_delay_periods > j)
                continue;
            num += res.claim_ultimates[k];
            den += c.payment(j);
            ++cohort_size;
        }
        if (cohort_size == 0)
            throw validation_error("cohort exhausted estimating RBNS factor at lag " +
                                   std::to_string(j) + " (accident periods 1.." +
                                   std::to_string(I - j - 1) + ")");
        if (den <= 0.0)
            throw validation_error("RBNS factor denominator not positive at lag " +
                                   std::to_string(j) + " (cohort pays zero)");
        double factor = num / den;
        res.factors[static_cast<size_t>(j)] = factor;

        int target_period = I - j;
        for (size_t k = 0; k < n; ++k) {
            const auto& c = p.claims[k];
            if (c.accident_period != target_period || c.reporting_delay_periods > j)
                continue;
            res.claim_ultimates[k] = c.payment(j) * factor;
            has_ultimate[k] = 1;
        }
    }

    for (size_t k = 0; k < n; ++k)
        if (!has_ultimate[k])
            throw numeric_error("claim " + p.claims[k].claim_id + " received no RBNS prediction");

    res.reserve_by_period.assign(static_cast<size_t>(I), 0.0);
    for (size_t k = 0; k < n; ++k) {
        const auto& c = p.claims[k];
        double paid = c.payment(p.valuation_horizon(c));
        double r = res.claim_ultimates[k] - paid;
        res.reserve_by_period[static_cast<size_t>(c.accident_period - 1)] += r;
        res.total_reserve += r;
    }
    return res;
}

} // namespace clreserve
