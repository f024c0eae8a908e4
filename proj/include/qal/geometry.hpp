// Atomic geometry plus standard XYZ text I/O. Coordinates are Ångström
// throughout; parsing is strict (exact token counts, finite values) and every
// parse failure carries the offending 1-based line number.

#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "qal/errors.hpp"

namespace qal {

struct Geometry {
    std::vector<std::string> elements;
    Eigen::MatrixX3d positions; // one row per atom, Å

    int n_atoms() const { return static_cast<int>(elements.size()); }

    void validate() const {
        if (static_cast<Eigen::Index>(elements.size()) != positions.rows()) {
            throw std::invalid_argument("Geometry: " + std::to_string(elements.size()) +
                                        " elements but " + std::to_string(positions.rows()) +
                                        " positions");
        }
        if (!positions.allFinite()) {
            throw std::invalid_argument("Geometry: non-finite coordinate");
        }
    }
};

namespace detail {

inline std::vector<std::string_view> split_tokens(std::string_view line) {
    std::vector<std::string_view> tokens;
    std::size_t pos = 0;
    while (pos < line.size()) {
        while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
        std::size_t start = pos;
        while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t') ++pos;
        if (pos > start) tokens.push_back(line.substr(start, pos - start));
    }
    return tokens;
}

inline double parse_double_token(std::string_view token, std::size_t line_no,
                                 const std::string& what) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size() || !std::isfinite(value)) {
        throw ParseError(what + ": bad number '" + std::string(token) + "'", line_no);
    }
    return value;
}

// Reads a line with the trailing '\r' of CRLF files stripped. Returns false
// at end of stream.
inline bool getline_crlf(std::istream& in, std::string& line) {
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
}

} // namespace detail

inline Geometry read_xyz(std::istream& in) {
    std::string line;
    if (!detail::getline_crlf(in, line)) {
        throw ParseError("XYZ: empty input", 1);
    }
    const auto count_tokens = detail::split_tokens(line);
    long count = -1;
    if (count_tokens.size() == 1) {
        const auto tok = count_tokens[0];
        const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), count);
        if (ec != std::errc{} || ptr != tok.data() + tok.size()) count = -1;
    }
    if (count < 1) {
        throw ParseError("XYZ: first line must be a positive atom count", 1);
    }
    if (!detail::getline_crlf(in, line)) {
        throw ParseError("XYZ: missing comment line", 2);
    }

    Geometry geometry;
    geometry.elements.reserve(static_cast<std::size_t>(count));
    geometry.positions.resize(count, 3);
    for (long i = 0; i < count; ++i) {
        const std::size_t line_no = static_cast<std::size_t>(i) + 3;
        if (!detail::getline_crlf(in, line)) {
            throw ParseError("XYZ: expected " + std::to_string(count) + " atom lines, got " +
                                 std::to_string(i),
                             line_no);
        }
        const auto tokens = detail::split_tokens(line);
        if (tokens.size() != 4) {
            throw ParseError("XYZ: atom line needs 'Element x y z', got " +
                                 std::to_string(tokens.size()) + " tokens",
                             line_no);
        }
        geometry.elements.emplace_back(tokens[0]);
        for (int c = 0; c < 3; ++c) {
            geometry.positions(i, c) =
                detail::parse_double_token(tokens[static_cast<std::size_t>(c) + 1], line_no,
                                           "XYZ coordinate");
        }
    }
    geometry.validate();
    return geometry; // content after the declared atoms (extra frames) is ignored
}

inline Geometry read_xyz(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("XYZ: cannot open '" + path + "'", 0);
    }
    return read_xyz(in);
}

inline void write_xyz(std::ostream& out, const Geometry& geometry,
                      const std::string& comment = "") {
    geometry.validate();
    out << geometry.n_atoms() << '\n' << comment << '\n';
    char buf[64];
    for (int i = 0; i < geometry.n_atoms(); ++i) {
        out << geometry.elements[static_cast<std::size_t>(i)];
        for (int c = 0; c < 3; ++c) {
            const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, geometry.positions(i, c));
            out << ' ' << std::string_view(buf, static_cast<std::size_t>(ptr - buf));
        }
        out << '\n';
    }
}

inline void write_xyz(const std::string& path, const Geometry& geometry,
                      const std::string& comment = "") {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("XYZ: cannot write '" + path + "'");
    }
    write_xyz(out, geometry, comment);
    out.flush();
    if (!out) {
        throw std::runtime_error("XYZ: write to '" + path + "' failed");
    }
}

} // namespace qal
