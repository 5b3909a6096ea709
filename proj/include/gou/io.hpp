#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "log.hpp"

namespace gou {

/// Shortest decimal that reads back to the same double.
inline std::string format_double(double x) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, p);
}

/// A delimited series: optional index column (numbers or timestamps) plus values.
struct Series {
    std::vector<std::string> index;   ///< empty when the file has a single column
    std::vector<double> values;
    std::string value_name = "value";
};

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line, char delim) {
    std::vector<std::string> f;
    std::string cur;
    for (char c : line) {
        if (c == delim) {
            f.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    f.push_back(cur);
    for (auto& s : f) {
        const auto b = s.find_first_not_of(" \t\"");
        const auto e = s.find_last_not_of(" \t\"");
        s = b == std::string::npos ? "" : s.substr(b, e - b + 1);
    }
    return f;
}

inline std::optional<double> to_number(const std::string& s) {
    double v;
    const char* b = s.data();
    if (!s.empty() && s[0] == '+') ++b;
    auto [p, ec] = std::from_chars(b, s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
    return v;
}

} // namespace detail

/// Read comma- or tab-delimited text. The value is the last column unless
/// `column` names a header field or a 0-based position; a first line that does
/// not parse as numbers is taken as the header. Values must be finite and the
/// index strictly increasing (numerically if numeric, else lexicographically).
inline Series read_series(std::istream& in, const std::string& column = "") {
    Series s;
    std::string line;
    char delim = 0;
    int value_col = -1, ncols = -1;
    bool first = true, numeric_index = true;
    long row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r" || line[0] == '#') continue;
        if (!delim) delim = line.find('\t') != std::string::npos && line.find(',') == std::string::npos ? '\t' : ',';
        auto f = detail::split_fields(line, delim);
        if (first) {
            first = false;
            ncols = static_cast<int>(f.size());
            value_col = ncols - 1;
            // a data row always ends in a number
            const bool header = !detail::to_number(f.back());
            if (!column.empty()) {
                if (auto num = detail::to_number(column); num && !header) {
                    value_col = static_cast<int>(*num);
                } else {
                    auto it = std::find(f.begin(), f.end(), column);
                    detail::require(header && it != f.end(), "column '" + column + "' not found");
                    value_col = static_cast<int>(it - f.begin());
                }
                detail::require(value_col >= 0 && value_col < ncols, "column index out of range");
            }
            if (header) {
                s.value_name = f[value_col];
                continue;
            }
        }
        detail::require(static_cast<int>(f.size()) == ncols, "row " + std::to_string(row) + ": expected " +
                                                                 std::to_string(ncols) + " fields");
        const auto v = detail::to_number(f[value_col]);
        detail::require(v && std::isfinite(*v), "row " + std::to_string(row) + ": value is not a finite number");
        s.values.push_back(*v);
        if (ncols > 1) {
            const int ic = value_col == 0 ? 1 : 0;
            s.index.push_back(f[ic]);
            numeric_index = numeric_index && detail::to_number(f[ic]).has_value();
        }
    }
    for (std::size_t i = 1; i < s.index.size(); ++i) {
        const bool inc = numeric_index ? *detail::to_number(s.index[i]) > *detail::to_number(s.index[i - 1])
                                       : s.index[i] > s.index[i - 1];
        detail::require(inc, "index is not strictly increasing at data row " + std::to_string(i + 1));
    }
    return s;
}

inline Series read_series_file(const std::string& path, const std::string& column = "") {
    std::ifstream in(path);
    detail::require(in.good(), "cannot open '" + path + "'");
    return read_series(in, column);
}

/// Write named columns of equal length as CSV with shortest round-trip numbers.
inline void write_csv(std::ostream& out, const std::vector<std::string>& names,
                      const std::vector<std::vector<double>>& cols) {
    detail::require(names.size() == cols.size() && !cols.empty(), "one name per column");
    for (const auto& c : cols) detail::require(c.size() == cols[0].size(), "columns differ in length");
    for (std::size_t j = 0; j < names.size(); ++j) out << (j ? "," : "") << names[j];
    out << '\n';
    for (std::size_t i = 0; i < cols[0].size(); ++i) {
        for (std::size_t j = 0; j < cols.size(); ++j) out << (j ? "," : "") << format_double(cols[j][i]);
        out << '\n';
    }
}

/// Flat key/value run description; all values are stored as strings so that a
/// write/read cycle is lossless.
struct RunConfig {
    std::map<std::string, std::string> entries;

    bool operator==(const RunConfig&) const = default;

    std::string to_json() const { return nlohmann::json(entries).dump(2) + "\n"; }

    static RunConfig from_json(const std::string& text) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            throw InvalidArgument(std::string("config is not valid JSON: ") + e.what());
        }
        detail::require(j.is_object(), "config must be a flat JSON object");
        RunConfig c;
        for (auto& [k, v] : j.items()) {
            if (v.is_string()) {
                c.entries[k] = v.get<std::string>();
            } else if (v.is_boolean()) {
                c.entries[k] = v.get<bool>() ? "true" : "false";
            } else if (v.is_number_integer()) {
                c.entries[k] = v.dump();
            } else if (v.is_number()) {
                c.entries[k] = format_double(v.get<double>());
            } else {
                throw InvalidArgument("config value for '" + k + "' must be a scalar");
            }
        }
        return c;
    }

    void save(const std::string& path) const {
        std::ofstream out(path);
        detail::require(out.good(), "cannot write '" + path + "'");
        out << to_json();
    }

    static RunConfig load(const std::string& path) {
        std::ifstream in(path);
        detail::require(in.good(), "cannot open '" + path + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        return from_json(ss.str());
    }
};

/// 100 ln(X_{t+1} / X_t).
inline std::vector<double> log_returns(std::span<const double> prices) {
    detail::require(prices.size() >= 2, "need at least two prices");
    for (std::size_t i = 0; i < prices.size(); ++i)
        detail::require(prices[i] > 0 && std::isfinite(prices[i]),
                        "price at row " + std::to_string(i + 1) + " is not positive");
    std::vector<double> r(prices.size() - 1);
    for (std::size_t i = 0; i + 1 < prices.size(); ++i) r[i] = 100.0 * std::log(prices[i + 1] / prices[i]);
    return r;
}

/// Non-overlapping block sums of m consecutive returns; a trailing partial
/// block is dropped with a warning.
inline std::vector<double> aggregate_returns(std::span<const double> r, std::size_t m) {
    detail::require(m >= 1, "block size must be >= 1");
    std::vector<double> out(r.size() / m, 0.0);
    for (std::size_t b = 0; b < out.size(); ++b)
        for (std::size_t i = 0; i < m; ++i) out[b] += r[b * m + i];
    if (r.size() % m) warn("aggregate_returns: dropped " + std::to_string(r.size() % m) + " trailing values");
    return out;
}

/// X(t + lag) - X(t).
inline std::vector<double> difference(std::span<const double> x, std::size_t lag) {
    detail::require(lag >= 1, "lag must be >= 1");
    detail::require(lag < x.size(), "lag must be smaller than the series length");
    std::vector<double> out(x.size() - lag);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i + lag] - x[i];
    return out;
}

} // namespace gou
