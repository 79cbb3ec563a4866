#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "clreserve/claims.hpp"
#include "clreserve/random.hpp"
#include "clreserve/triangle.hpp"

namespace testutil {

// Worked 3x3 fixture used throughout: f0 = 310/210, f1 = 1.2,
// ultimates (180, 192, 7440/35), reserves (0, 32, 3240/35).
inline clreserve::Triangle small_triangle() {
    return clreserve::make_triangle(3, 2,
                                    {{{1, 0}, 100.0},
                                     {{1, 1}, 150.0},
                                     {{1, 2}, 180.0},
                                     {{2, 0}, 110.0},
                                     {{2, 1}, 160.0},
                                     {{3, 0}, 120.0}});
}

// Random trapezoid with iid lognormal-positive cells.
inline clreserve::Triangle random_triangle(std::mt19937_64& rng, int max_periods = 12) {
    std::uniform_int_distribution<int> pick_i(3, max_periods);
    int I = pick_i(rng);
    std::uniform_int_distribution<int> pick_j(2, I - 1);
    int J = pick_j(rng);
    std::lognormal_distribution<double> cell(4.0, 0.8);
    std::vector<std::vector<double>> rows(static_cast<size_t>(I));
    for (int i = 1; i <= I; ++i) {
        int d = std::min(J, I - i);
        rows[static_cast<size_t>(i - 1)].resize(static_cast<size_t>(d) + 1);
        for (int j = 0; j <= d; ++j)
            rows[static_cast<size_t>(i - 1)][static_cast<size_t>(j)] = cell(rng);
    }
    return clreserve::Triangle(I, J, std::move(rows));
}

inline double rel_diff(double a, double b) {
    double denom = std::max(std::abs(a), std::abs(b));
    if (denom == 0.0)
        return 0.0;
    return std::abs(a - b) / denom;
}

// Claim whose payments run from its reporting lag to the end of `values`;
// entries before the lag stay masked. Status defaults to open everywhere.
inline clreserve::ClaimRecord make_claim(const std::string& id, int accident_period,
                                         int delay_periods, std::vector<double> values,
                                         std::vector<uint8_t> open = {}) {
    clreserve::ClaimRecord c;
    c.claim_id = id;
    c.accident_period = accident_period;
    c.reporting_delay_periods = delay_periods;
    c.reporting_delay_days = delay_periods * 365;
    c.accident_month = 6;
    c.line_flag = 0;
    size_t len = static_cast<size_t>(delay_periods) + values.size();
    c.payments.assign(len, std::numeric_limits<double>::quiet_NaN());
    c.status_open.assign(len, 0);
    for (size_t k = 0; k < values.size(); ++k) {
        c.payments[static_cast<size_t>(delay_periods) + k] = values[k];
        c.status_open[static_cast<size_t>(delay_periods) + k] =
            open.empty() ? 1 : open[k];
    }
    return c;
}

inline clreserve::Portfolio make_portfolio(int num_accident, int num_dev,
                                           std::vector<clreserve::ClaimRecord> claims,
                                           bool square = false) {
    clreserve::Portfolio p;
    p.num_accident_periods = num_accident;
    p.num_dev_periods = num_dev;
    p.evaluation_square = square;
    p.claims = std::move(claims);
    p.validate();
    return p;
}

} // namespace testutil
