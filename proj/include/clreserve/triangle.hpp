#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "clreserve/csv.hpp"
#include "clreserve/errors.hpp"

namespace clreserve {

// Aggregate cumulative-payment trapezoid. Accident periods i are 1-based,
// development periods j are 0-based. Observed cells are those with
// i + j <= I; rows may additionally carry the full square up to J for
// evaluation against known outcomes.
class Triangle {
public:
    Triangle() = default;

    // rows[i-1][j] holds the cumulative payment of accident period i at
    // development period j. Row i must cover j = 0..min(J, I-i), or 0..J
    // for every row when full_square is set.
    Triangle(int num_accident_periods, int num_dev_periods,
             std::vector<std::vector<double>> rows, bool full_square = false)
        : num_accident_periods_(num_accident_periods),
          num_dev_periods_(num_dev_periods),
          rows_(std::move(rows)),
          full_square_(full_square) {
        validate();
    }

    int num_accident_periods() const { return num_accident_periods_; }
    int num_dev_periods() const { return num_dev_periods_; }
    bool full_square() const { return full_square_; }

    // Last development period observed at valuation time I for row i.
    int diagonal_dev(int accident_period) const {
        return std::min(num_dev_periods_, num_accident_periods_ - accident_period);
    }

    bool fully_developed(int accident_period) const {
        return accident_period <= num_accident_periods_ - num_dev_periods_;
    }

    double at(int accident_period, int dev_period) const {
        check_index(accident_period, dev_period);
        return rows_[static_cast<size_t>(accident_period - 1)][static_cast<size_t>(dev_period)];
    }

    // Latest cumulative payment on the observed diagonal.
    double latest(int accident_period) const {
        return at(accident_period, diagonal_dev(accident_period));
    }

private:
    void check_index(int i, int j) const {
        int max_dev = full_square_ ? num_dev_periods_ : diagonal_dev(i);
        if (i < 1 || i > num_accident_periods_ || j < 0 || j > max_dev)
            throw validation_error("triangle cell (" + std::to_string(i) + "," +
                                   std::to_string(j) + ") out of range");
    }

    void validate() const {
        const int I = num_accident_periods_;
        const int J = num_dev_periods_;
        if (J < 1)
            throw validation_error("triangle needs at least one development period (J >= 1)");
        if (I <= J)
            throw validation_error("triangle needs at least one fully developed accident period (I > J), got I=" +
                                   std::to_string(I) + ", J=" + std::to_string(J));
        if (rows_.size() != static_cast<size_t>(I))
            throw validation_error("triangle has " + std::to_string(rows_.size()) +
                                   " rows, expected " + std::to_string(I));
        for (int i = 1; i <= I; ++i) {
            const auto& row = rows_[static_cast<size_t>(i - 1)];
            int expect = (full_square_ ? J : diagonal_dev(i)) + 1;
            if (row.size() != static_cast<size_t>(expect))
                throw validation_error("accident period " + std::to_string(i) + " has " +
                                       std::to_string(row.size()) + " cells, expected " +
                                       std::to_string(expect) + " (incomplete trapezoid)");
            for (int j = 0; j < expect; ++j) {
                double v = row[static_cast<size_t>(j)];
                if (!std::isfinite(v) || v <= 0.0)
                    throw validation_error("cell (" + std::to_string(i) + "," + std::to_string(j) +
                                           ") must be strictly positive and finite, got " +
                                           csv::format_double(v));
            }
        }
    }

    int num_accident_periods_ = 0;
    int num_dev_periods_ = 0;
    std::vector<std::vector<double>> rows_;
    bool full_square_ = false;
};

// Builds a triangle from sparse (i, j) -> value cells; missing cells fail
// trapezoid validation inside the constructor.
inline Triangle make_triangle(int num_accident_periods, int num_dev_periods,
                              const std::map<std::pair<int, int>, double>& cells,
                              bool full_square = false) {
    std::vector<std::vector<double>> rows(static_cast<size_t>(std::max(num_accident_periods, 0)));
    for (int i = 1; i <= num_accident_periods; ++i) {
        int max_dev = full_square ? num_dev_periods
                                  : std::min(num_dev_periods, num_accident_periods - i);
        auto& row = rows[static_cast<size_t>(i - 1)];
        row.assign(static_cast<size_t>(std::max(max_dev, -1) + 1), -1.0);
        for (int j = 0; j <= max_dev; ++j) {
            auto it = cells.find({i, j});
            if (it == cells.end())
                throw validation_error("missing cell (" + std::to_string(i) + "," +
                                       std::to_string(j) + ") in triangle input");
            row[static_cast<size_t>(j)] = it->second;
        }
    }
    return Triangle(num_accident_periods, num_dev_periods, std::move(rows), full_square);
}

// CSV schema: accident_period,dev_period,cumulative_payment.
inline Triangle load_triangle_csv(const std::string& path) {
    csv::Table t = csv::read_file(path);
    csv::require_columns(t, {"accident_period", "dev_period", "cumulative_payment"}, path);
    std::map<std::pair<int, int>, double> cells;
    int max_i = 0, max_j = 0;
    for (size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        if (row.size() != 3)
            throw validation_error("bad row " + std::to_string(r + 2) + " in " + path);
        std::string ctx = path + " row " + std::to_string(r + 2);
        int i = static_cast<int>(csv::parse_long(row[0], ctx));
        int j = static_cast<int>(csv::parse_long(row[1], ctx));
        double v = csv::parse_double(row[2], ctx);
        if (!cells.emplace(std::make_pair(i, j), v).second)
            throw validation_error("duplicate cell (" + std::to_string(i) + "," +
                                   std::to_string(j) + ") in " + path);
        max_i = std::max(max_i, i);
        max_j = std::max(max_j, j);
    }
    if (max_i == 0)
        throw validation_error("triangle CSV has no data rows: " + path);
    // Full square iff any cell lies beyond the valuation diagonal.
    bool square = false;
    for (const auto& [key, v] : cells)
        if (key.first + key.second > max_i)
            square = true;
    return make_triangle(max_i, max_j, cells, square);
}

inline std::string triangle_to_csv(const Triangle& tri) {
    std::string out = "accident_period,dev_period,cumulative_payment\n";
    for (int i = 1; i <= tri.num_accident_periods(); ++i) {
        int max_dev = tri.full_square() ? tri.num_dev_periods() : tri.diagonal_dev(i);
        for (int j = 0; j <= max_dev; ++j)
            out += std::to_string(i) + "," + std::to_string(j) + "," +
                   csv::format_double(tri.at(i, j)) + "\n";
    }
    return out;
}

} // namespace clreserve
