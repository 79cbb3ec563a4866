#pragma once

#include <map>
#include <string>
#include <vector>

#include "clreserve/claims.hpp"
#include "clreserve/csv.hpp"
#include "clreserve/errors.hpp"

namespace clreserve {

// Long-format claims CSV: one row per (claim, dev period), rows existing
// only from the reporting lag onwards. Optional trailing incurred column;
// its presence must be uniform across rows.
inline constexpr const char* kClaimsCsvHeader =
    "claim_id,accident_period,reporting_delay_days,reporting_delay_periods,"
    "accident_month,line_flag,dev_period,cumulative_payment,status_open";

inline std::string portfolio_to_csv(const Portfolio& p,
                                    const std::vector<std::string>& comments = {}) {
    std::string out;
    for (const auto& c : comments)
        out += "# " + c + "\n";
    bool with_incurred = p.has_incurred();
    out += kClaimsCsvHeader;
    if (with_incurred)
        out += ",incurred";
    out += "\n";
    for (const auto& c : p.claims) {
        int horizon = p.evaluation_square ? p.num_dev_periods : p.valuation_horizon(c);
        for (int j = c.reporting_delay_periods; j <= horizon; ++j) {
            out += c.claim_id;
            out += ',' + std::to_string(c.accident_period);
            out += ',' + std::to_string(c.reporting_delay_days);
            out += ',' + std::to_string(c.reporting_delay_periods);
            out += ',' + std::to_string(c.accident_month);
            out += ',' + std::to_string(c.line_flag);
            out += ',' + std::to_string(j);
            out += ',' + csv::format_double(c.payment(j));
            out += ',' + std::to_string(c.is_open(j) ? 1 : 0);
            if (with_incurred)
                out += ',' + csv::format_double(c.incurred_at(j));
            out += '\n';
        }
    }
    return out;
}

inline void save_portfolio_csv(const Portfolio& p, const std::string& path,
                               const std::vector<std::string>& comments = {}) {
    csv::write_file(path, portfolio_to_csv(p, comments));
}

inline Portfolio load_portfolio_csv(const std::string& path) {
    csv::Table t = csv::read_file(path);
    std::vector<std::string> base = csv::split_line(kClaimsCsvHeader);
    bool with_incurred = t.header.size() == base.size() + 1 && t.header.back() == "incurred";
    if (!with_incurred && t.header.size() != base.size())
        throw validation_error("claims CSV header mismatch in " + path);
    csv::require_columns(t, base, path);

    struct Row {
        int dev = 0;
        double payment = 0.0;
        int open = 0;
        double incurred = 0.0;
    };
    struct Building {
        ClaimRecord claim;
        std::map<int, Row> rows;
    };
    std::vector<Building> order;
    std::map<std::string, size_t> index;
    int max_i = 0, max_dev = 0;

    for (size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        std::string ctx = path + " row " + std::to_string(r + 2);
        if (row.size() != base.size() + (with_incurred ? 1 : 0))
            throw validation_error("wrong column count in " + ctx);
        const std::string& id = row[0];
        auto [it, inserted] = index.emplace(id, order.size());
        if (inserted) {
            Building b;
            b.claim.claim_id = id;
            b.claim.accident_period = static_cast<int>(csv::parse_long(row[1], ctx));
            b.claim.reporting_delay_days = static_cast<int>(csv::parse_long(row[2], ctx));
            b.claim.reporting_delay_periods = static_cast<int>(csv::parse_long(row[3], ctx));
            b.claim.accident_month = static_cast<int>(csv::parse_long(row[4], ctx));
            b.claim.line_flag = static_cast<int>(csv::parse_long(row[5], ctx));
            order.push_back(std::move(b));
        }
        Building& b = order[it->second];
        if (b.claim.accident_period != csv::parse_long(row[1], ctx) ||
            b.claim.reporting_delay_periods != csv::parse_long(row[3], ctx))
            throw validation_error("claim " + id + " has inconsistent static fields in " + ctx);
        Row parsed;
        parsed.dev = static_cast<int>(csv::parse_long(row[6], ctx));
        parsed.payment = csv::parse_double(row[7], ctx);
        parsed.open = static_cast<int>(csv::parse_long(row[8], ctx));
        if (parsed.open != 0 && parsed.open != 1)
            throw validation_error("status_open must be 0 or 1 in " + ctx);
        if (with_incurred)
            parsed.incurred = csv::parse_double(row[9], ctx);
        if (parsed.dev < b.claim.reporting_delay_periods)
            throw validation_error("claim " + id + " has a row before its reporting lag (dev " +
                                   std::to_string(parsed.dev) + " < T=" +
                                   std::to_string(b.claim.reporting_delay_periods) + ") in " + ctx);
        if (!b.rows.emplace(parsed.dev, parsed).second)
            throw validation_error("duplicate dev period " + std::to_string(parsed.dev) +
                                   " for claim " + id + " in " + path);
        max_i = std::max(max_i, b.claim.accident_period);
        max_dev = std::max(max_dev, parsed.dev);
    }
    if (order.empty())
        throw validation_error("claims CSV has no data rows: " + path);

    Portfolio p;
    p.num_accident_periods = max_i;
    p.num_dev_periods = max_dev;
    // Square data iff any claim is observed past the valuation diagonal.
    p.evaluation_square = false;
    for (const auto& b : order) {
        int diag = std::min(max_dev, max_i - b.claim.accident_period);
        if (!b.rows.empty() && b.rows.rbegin()->first > diag)
            p.evaluation_square = true;
    }

    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (auto& b : order) {
        ClaimRecord c = b.claim;
        int horizon = p.evaluation_square
                          ? p.num_dev_periods
                          : std::min(p.num_dev_periods, p.num_accident_periods - c.accident_period);
        size_t len = static_cast<size_t>(horizon) + 1;
        c.payments.assign(len, nan);
        c.status_open.assign(len, 0);
        if (with_incurred)
            c.incurred.assign(len, nan);
        for (int j = c.reporting_delay_periods; j <= horizon; ++j) {
            auto it = b.rows.find(j);
            if (it == b.rows.end())
                throw validation_error("claim " + c.claim_id + " is missing dev period " +
                                       std::to_string(j) + " in " + path);
            c.payments[static_cast<size_t>(j)] = it->second.payment;
            c.status_open[static_cast<size_t>(j)] = static_cast<uint8_t>(it->second.open);
            if (with_incurred)
                c.incurred[static_cast<size_t>(j)] = it->second.incurred;
        }
        if (static_cast<int>(b.rows.size()) != horizon - c.reporting_delay_periods + 1)
            throw validation_error("claim " + c.claim_id + " has rows outside its observed range in " +
                                   path);
        p.claims.push_back(std::move(c));
    }
    p.validate();
    return p;
}

} // namespace clreserve
