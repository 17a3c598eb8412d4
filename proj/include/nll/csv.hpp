#pragma once
// CSV persistence: fields as "coordinates + value" rows, generic tables for
// experiment output, matrix load for table kernels. All output uses
// std::to_chars (shortest round-trip, '.' decimal separator, LF endings) so
// identical data produces identical bytes regardless of locale.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nll/grid.hpp"

namespace nll {

inline std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string field_to_csv(const Field& f) {
    const Grid& g = *f.grid;
    std::string out = g.dim() == 1 ? "x,value\n" : "x,y,value\n";
    for (std::size_t k = 0; k < f.size(); ++k) {
        out += format_double(g.x(k));
        if (g.dim() == 2) {
            out += ',';
            out += format_double(g.y(k));
        }
        out += ',';
        out += format_double(f[k]);
        out += '\n';
    }
    return out;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os << content;
    if (!os) throw std::runtime_error("write failed: " + path);
}

inline void write_field_csv(const Field& f, const std::string& path) {
    write_text_file(path, field_to_csv(f));
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    cells.push_back(cur);
    return cells;
}

inline double parse_double(const std::string& s, const std::string& context) {
    double v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw std::runtime_error("bad number '" + s + "' in " + context);
    return v;
}

} // namespace detail

/// Read a field written by write_field_csv back onto a matching grid.
/// Row order must match the grid's node ordering.
inline Field read_field_csv(const Grid& g, const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open: " + path);
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("empty CSV: " + path);
    Field f(g);
    std::size_t k = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto cells = detail::split_csv_line(line);
        const std::size_t want = g.dim() == 1 ? 2 : 3;
        if (cells.size() != want)
            throw std::runtime_error("wrong column count in " + path);
        if (k >= f.size()) throw std::runtime_error("too many rows in " + path);
        f[k] = detail::parse_double(cells.back(), path);
        ++k;
    }
    if (k != f.size()) throw std::runtime_error("row count does not match grid in " + path);
    return f;
}

/// Dense numeric matrix from a headerless CSV (table kernels).
inline std::vector<std::vector<double>> read_matrix_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open: " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        for (const auto& cell : detail::split_csv_line(line))
            row.push_back(detail::parse_double(cell, path));
        if (!rows.empty() && row.size() != rows.front().size())
            throw std::runtime_error("ragged rows in " + path);
        rows.push_back(std::move(row));
    }
    return rows;
}

/// Simple rectangular table with a header, used by the experiment sweeps.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::string to_csv() const {
        std::string out;
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (i) out += ',';
            out += header[i];
        }
        out += '\n';
        for (const auto& r : rows) {
            for (std::size_t i = 0; i < r.size(); ++i) {
                if (i) out += ',';
                out += format_double(r[i]);
            }
            out += '\n';
        }
        return out;
    }
};

/// FNV-1a 64-bit content hash (manifest input hashes).
inline std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string fnv1a64_hex(const std::string& data) {
    static const char* digits = "0123456789abcdef";
    std::uint64_t h = fnv1a64(data);
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[h & 0xf];
        h >>= 4;
    }
    return out;
}

} // namespace nll
