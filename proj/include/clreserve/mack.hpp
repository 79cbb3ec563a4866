#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "clreserve/chain_ladder.hpp"
#include "clreserve/errors.hpp"
#include "clreserve/triangle.hpp"

namespace clreserve {

struct MackEstimates {
    std::vector<double> sigma2;          // variance parameters, j = 0..J-1
    std::vector<double> msep_by_period;  // index i-1; zero for fully developed rows
    double msep_total = 0.0;

    double rmsep_total() const { return std::sqrt(msep_total); }
    double rmsep(int accident_period) const {
        return std::sqrt(msep_by_period[static_cast<size_t>(accident_period - 1)]);
    }
};

// Mack's distribution-free prediction uncertainty for the CL reserves:
// sigma^2_j from weighted squared factor residuals, then the standard
// decomposition of the mean squared error of prediction into process and
// estimation error, per accident period and in total.
inline MackEstimates mack_uncertainty(const Triangle& tri) {
    const int I = tri.num_accident_periods();
    const int J = tri.num_dev_periods();
    if (I < 3)
        throw validation_error("insufficient data for uncertainty estimation: need I >= 3, got I=" +
                               std::to_string(I));

    DevFactors f = estimate_cl_factors(tri);
    MackEstimates m;
    m.sigma2.assign(static_cast<size_t>(J), 0.0);

    for (int j = 0; j < J; ++j) {
        int dof = I - j - 2;
        if (dof >= 1) {
            double sum = 0.0;
            for (int i = 1; i <= I - j - 1; ++i) {
                double ratio = tri.at(i, j + 1) / tri.at(i, j);
                double dev = ratio - f.at(j);
                sum += tri.at(i, j) * dev * dev;
            }
            m.sigma2[static_cast<size_t>(j)] = sum / dof;
        } else {
            // Only reachable for j = J-1 on a pure triangle (I = J+1):
            // extrapolate from the preceding columns.
            if (J >= 3) {
                double s1 = m.sigma2[static_cast<size_t>(J - 3)];
                double s2 = m.sigma2[static_cast<size_t>(J - 2)];
                double extrapolated = s1 > 0.0 ? (s2 * s2) / s1
                                               : std::numeric_limits<double>::infinity();
                m.sigma2[static_cast<size_t>(j)] = std::min({extrapolated, s1, s2});
            } else {
                m.sigma2[static_cast<size_t>(j)] = m.sigma2[static_cast<size_t>(J - 2)];
            }
        }
    }

    // Column sums S_j over the rows entering f_j, and forecast cumulatives.
    std::vector<double> col_sum(static_cast<size_t>(J), 0.0);
    for (int j = 0; j < J; ++j)
        for (int i = 1; i <= I - j - 1; ++i)
            col_sum[static_cast<size_t>(j)] += tri.at(i, j);

    std::vector<double> ultimates = cl_forecast(tri, f);
    m.msep_by_period.assign(static_cast<size_t>(I), 0.0);

    auto forecast_path = [&](int i) {
        // Cumulative forecasts C_{i,j} for j = I-i..J on the rolled-forward path.
        std::vector<double> path(static_cast<size_t>(J + 1), 0.0);
        path[static_cast<size_t>(I - i)] = tri.latest(i);
        for (int j = I - i; j < J; ++j)
            path[static_cast<size_t>(j + 1)] = path[static_cast<size_t>(j)] * f.at(j);
        return path;
    };

    for (int i = I - J + 1; i <= I; ++i) {
        std::vector<double> path = forecast_path(i);
        double acc = 0.0;
        for (int j = I - i; j < J; ++j) {
            double term = m.sigma2[static_cast<size_t>(j)] / (f.at(j) * f.at(j));
            acc += term * (1.0 / path[static_cast<size_t>(j)] + 1.0 / col_sum[static_cast<size_t>(j)]);
        }
        double ult = ultimates[static_cast<size_t>(i - 1)];
        m.msep_by_period[static_cast<size_t>(i - 1)] = ult * ult * acc;
    }

    // Total MSEP adds the estimation-error covariance across accident periods.
    m.msep_total = 0.0;
    for (int i = I - J + 1; i <= I; ++i) {
        m.msep_total += m.msep_by_period[static_cast<size_t>(i - 1)];
        double later_ultimates = 0.0;
        for (int k = i + 1; k <= I; ++k)
            later_ultimates += ultimates[static_cast<size_t>(k - 1)];
        if (later_ultimates > 0.0) {
            double acc = 0.0;
            for (int j = I - i; j < J; ++j)
                acc += 2.0 * m.sigma2[static_cast<size_t>(j)] /
                       (f.at(j) * f.at(j) * col_sum[static_cast<size_t>(j)]);
            m.msep_total += ultimates[static_cast<size_t>(i - 1)] * later_ultimates * acc;
        }
    }

    for (double s : m.sigma2)
        if (!std::isfinite(s) || s < 0.0)
            throw numeric_error("non-finite or negative sigma^2 estimate");
    if (!std::isfinite(m.msep_total) || m.msep_total < 0.0)
        throw numeric_error("non-finite or negative total MSEP");
    return m;
}

} // namespace clreserve
