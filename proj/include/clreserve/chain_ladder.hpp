#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "clreserve/errors.hpp"
#include "clreserve/triangle.hpp"

namespace clreserve {

// One-period development factors f_j, j = 0..J-1.
struct DevFactors {
    std::vector<double> values;

    double at(int j) const { return values[static_cast<size_t>(j)]; }
    int count() const { return static_cast<int>(values.size()); }
};

// Projection-to-ultimate factors F_j, j = 0..J-1. F_j maps a lag-j
// observation directly to its ultimate.
struct PtuFactors {
    std::vector<double> values;

    double at(int j) const { return values[static_cast<size_t>(j)]; }
    int count() const { return static_cast<int>(values.size()); }
};

// f_j = sum_i C_{i,j+1} / sum_i C_{i,j} over the I-j-1 rows that have both
// columns observed. Row order is i ascending, so sums are reproducible.
inline DevFactors estimate_cl_factors(const Triangle& tri) {
    const int I = tri.num_accident_periods();
    const int J = tri.num_dev_periods();
    DevFactors f;
    f.values.resize(static_cast<size_t>(J));
    for (int j = 0; j < J; ++j) {
        double num = 0.0, den = 0.0;
        for (int i = 1; i <= I - j - 1; ++i) {
            num += tri.at(i, j + 1);
            den += tri.at(i, j);
        }
        f.values[static_cast<size_t>(j)] = num / den;
    }
    return f;
}

// Classic forward roll: C_{i,I-i} * prod_{l=I-i}^{J-1} f_l. Fully developed
// rows return their observed ultimate unchanged.
inline std::vector<double> cl_forecast(const Triangle& tri, const DevFactors& factors) {
    const int I = tri.num_accident_periods();
    const int J = tri.num_dev_periods();
    if (factors.count() != J)
        throw validation_error("development factor count " + std::to_string(factors.count()) +
                               " does not match J=" + std::to_string(J));
    std::vector<double> ultimates(static_cast<size_t>(I));
    for (int i = 1; i <= I; ++i) {
        if (tri.fully_developed(i)) {
            ultimates[static_cast<size_t>(i - 1)] = tri.at(i, J);
        } else {
            double c = tri.latest(i);
            for (int l = I - i; l < J; ++l)
                c *= factors.at(l);
            ultimates[static_cast<size_t>(i - 1)] = c;
        }
    }
    return ultimates;
}

struct PtuResult {
    PtuFactors factors;
    // Predicted ultimates per accident period (observed ones for rows that
    // are fully developed), index i-1.
    std::vector<double> ultimates;
};

// Backward (grossing-up) recursion: start at the upper-right corner with
// F_{J-1}, append the predicted ultimate of the next accident period, and
// extrapolate down the diagonal to j = 0. Produces the same ultimates as
// the forward roll.
inline PtuResult estimate_ptu(const Triangle& tri) {
    const int I = tri.num_accident_periods();
    const int J = tri.num_dev_periods();
    PtuResult res;
    res.factors.values.assign(static_cast<size_t>(J), 0.0);
    res.ultimates.assign(static_cast<size_t>(I), 0.0);

    for (int i = 1; i <= I - J; ++i)
        res.ultimates[static_cast<size_t>(i - 1)] = tri.at(i, J);

    for (int j = J - 1; j >= 0; --j) {
        double num = 0.0, den = 0.0;
        for (int i = 1; i <= I - j - 1; ++i) {
            num += res.ultimates[static_cast<size_t>(i - 1)];
            den += tri.at(i, j);
        }
        double ptu = num / den;
        res.factors.values[static_cast<size_t>(j)] = ptu;
        res.ultimates[static_cast<size_t>(I - j - 1)] = tri.at(I - j, j) * ptu;
    }
    return res;
}

struct GrossingUpCheck {
    double max_ultimate_rel_diff = 0.0;
    double max_factor_rel_diff = 0.0;

    double max_discrepancy() const { return std::max(max_ultimate_rel_diff, max_factor_rel_diff); }
};

// Numerical check of the equivalence between the forward and the backward
// estimation: PtU ultimates against forward-CL ultimates, and PtU factors
// against products of one-period factors.
inline GrossingUpCheck verify_grossing_up(const Triangle& tri) {
    const int J = tri.num_dev_periods();
    DevFactors f = estimate_cl_factors(tri);
    std::vector<double> forward = cl_forecast(tri, f);
    PtuResult ptu = estimate_ptu(tri);

    GrossingUpCheck check;
    for (size_t k = 0; k < forward.size(); ++k) {
        double rel = std::abs(ptu.ultimates[k] - forward[k]) / forward[k];
        check.max_ultimate_rel_diff = std::max(check.max_ultimate_rel_diff, rel);
    }
    for (int j = 0; j < J; ++j) {
        double prod = 1.0;
        for (int l = j; l < J; ++l)
            prod *= f.at(l);
        double rel = std::abs(ptu.factors.at(j) - prod) / prod;
        check.max_factor_rel_diff = std::max(check.max_factor_rel_diff, rel);
    }
    return check;
}

struct ReserveSummary {
    std::vector<double> by_period; // index i-1
    double total = 0.0;
};

// reserve_i = predicted ultimate - latest observed diagonal value.
inline ReserveSummary cl_reserves(const Triangle& tri, const std::vector<double>& ultimates) {
    const int I = tri.num_accident_periods();
    if (ultimates.size() != static_cast<size_t>(I))
        throw validation_error("ultimate count does not match accident period count");
    ReserveSummary r;
    r.by_period.resize(static_cast<size_t>(I));
    for (int i = 1; i <= I; ++i) {
        double reserve = tri.fully_developed(i)
                             ? 0.0
                             : ultimates[static_cast<size_t>(i - 1)] - tri.latest(i);
        r.by_period[static_cast<size_t>(i - 1)] = reserve;
        r.total += reserve;
    }
    return r;
}

} // namespace clreserve
