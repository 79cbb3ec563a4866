#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "clreserve/errors.hpp"

namespace clreserve::csv {

// Shortest round-trip representation; keeps output files byte-stable
// across runs of the same build.
inline std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, const std::string& context) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw validation_error("cannot parse number '" + std::string(s) + "' in " + context);
    return v;
}

inline long parse_long(std::string_view s, const std::string& context) {
    long v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw validation_error("cannot parse integer '" + std::string(s) + "' in " + context);
    return v;
}

inline std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

// Reads all rows of a CSV file. Lines starting with '#' are comments and
// are returned separately (the simulator records its seed that way).
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> comments;
};

inline Table read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw validation_error("cannot open CSV file: " + path);
    Table t;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        if (line[0] == '#') {
            t.comments.push_back(line);
            continue;
        }
        if (!have_header) {
            t.header = split_line(line);
            have_header = true;
        } else {
            t.rows.push_back(split_line(line));
        }
    }
    if (!have_header)
        throw validation_error("CSV file has no header: " + path);
    return t;
}

inline void require_columns(const Table& t, const std::vector<std::string>& expected,
                            const std::string& path) {
    if (t.header.size() < expected.size())
        throw validation_error("CSV header mismatch in " + path);
    for (size_t k = 0; k < expected.size(); ++k)
        if (t.header[k] != expected[k])
            throw validation_error("CSV header mismatch in " + path + ": expected column '" +
                                   expected[k] + "', found '" + t.header[k] + "'");
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw validation_error("cannot write file: " + path);
    out << content;
}

} // namespace clreserve::csv
