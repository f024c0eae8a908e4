// Homotop candidate space: every way of placing d dopant atoms on the n
// sites of a fixed host geometry. Homotops are identified canonically by
// their zero-based sorted site indices joined with "-".

#pragma once

#include <charconv>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qal/errors.hpp"
#include "qal/geometry.hpp"

namespace qal {

struct Homotop {
    std::vector<int> dopant_sites; // strictly increasing

    bool operator==(const Homotop&) const = default;

    std::string id() const {
        std::string out;
        for (std::size_t i = 0; i < dopant_sites.size(); ++i) {
            if (i > 0) out += '-';
            out += std::to_string(dopant_sites[i]);
        }
        return out;
    }

    // Parses a canonical id; rejects anything that would not round-trip
    // (unsorted, duplicate, signed, or non-numeric indices).
    static Homotop from_id(std::string_view id) {
        Homotop h;
        if (id.empty()) return h;
        std::size_t pos = 0;
        while (true) {
            const std::size_t dash = id.find('-', pos);
            const std::string_view token =
                id.substr(pos, dash == std::string_view::npos ? std::string_view::npos
                                                              : dash - pos);
            int site = -1;
            const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), site);
            if (token.empty() || ec != std::errc{} || ptr != token.data() + token.size()) {
                throw ParseError("homotop id '" + std::string(id) + "': bad index token '" +
                                 std::string(token) + "'");
            }
            if (!h.dopant_sites.empty() && site <= h.dopant_sites.back()) {
                throw ParseError("homotop id '" + std::string(id) +
                                 "': indices must be strictly increasing");
            }
            h.dopant_sites.push_back(site);
            if (dash == std::string_view::npos) break;
            pos = dash + 1;
        }
        return h;
    }

    void validate(int n_sites) const {
        for (std::size_t i = 0; i < dopant_sites.size(); ++i) {
            const int site = dopant_sites[i];
            if (site < 0 || site >= n_sites) {
                throw std::out_of_range("homotop site index " + std::to_string(site) +
                                        " outside [0, " + std::to_string(n_sites) + ")");
            }
            if (i > 0 && site <= dopant_sites[i - 1]) {
                throw std::invalid_argument("homotop indices must be strictly increasing");
            }
        }
    }
};

// All C(n_sites, n_dopants) index combinations in lexicographic order.
inline std::vector<Homotop> enumerate_homotops(int n_sites, int n_dopants) {
    if (n_sites < 0 || n_dopants < 0 || n_dopants > n_sites) {
        throw std::domain_error("enumerate_homotops: need 0 <= n_dopants <= n_sites, got " +
                                std::to_string(n_dopants) + " of " + std::to_string(n_sites));
    }
    std::vector<Homotop> out;
    std::vector<int> combo(static_cast<std::size_t>(n_dopants));
    for (int i = 0; i < n_dopants; ++i) combo[static_cast<std::size_t>(i)] = i;
    while (true) {
        out.push_back(Homotop{combo});
        // advance to the next combination, rightmost movable index first
        int i = n_dopants - 1;
        while (i >= 0 && combo[static_cast<std::size_t>(i)] == n_sites - n_dopants + i) --i;
        if (i < 0) break;
        ++combo[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < n_dopants; ++j) {
            combo[static_cast<std::size_t>(j)] = combo[static_cast<std::size_t>(j - 1)] + 1;
        }
    }
    return out;
}

struct CandidateSpace {
    Geometry host; // all sites as the host element
    int n_sites = 0;
    int n_dopants = 0;
    std::string dopant_element;
    std::vector<Homotop> homotops; // full lexicographic enumeration

    static CandidateSpace build(Geometry host, int n_dopants, std::string dopant_element) {
        host.validate();
        CandidateSpace space;
        space.n_sites = host.n_atoms();
        space.n_dopants = n_dopants;
        space.host = std::move(host);
        space.dopant_element = std::move(dopant_element);
        space.homotops = enumerate_homotops(space.n_sites, n_dopants);
        return space;
    }
};

// Host geometry with the dopant element substituted at the homotop's sites.
inline Geometry homotop_geometry(const CandidateSpace& space, const Homotop& h) {
    h.validate(space.n_sites);
    Geometry geometry = space.host;
    for (int site : h.dopant_sites) {
        geometry.elements[static_cast<std::size_t>(site)] = space.dopant_element;
    }
    return geometry;
}

} // namespace qal
