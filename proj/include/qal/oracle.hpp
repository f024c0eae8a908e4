// Energy oracles labeling homotops in Hartree: exact table lookup, an
// analytic pair potential for synthetic landscapes, and an adapter that
// shells out to an external quantum-chemistry command. Plus the energy-table
// CSV format shared by all of them.

#pragma once

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "qal/errors.hpp"
#include "qal/geometry.hpp"
#include "qal/space.hpp"

namespace qal {

struct EnergyRecord {
    std::string homotop_id;
    double energy_hartree = 0.0;

    bool operator==(const EnergyRecord&) const = default;
};

inline constexpr std::string_view kEnergyTableHeader = "homotop_id,energy_hartree";

inline std::vector<EnergyRecord> read_energy_table(std::istream& in) {
    std::string line;
    if (!detail::getline_crlf(in, line) || line != kEnergyTableHeader) {
        throw ParseError("energy table: first line must be '" + std::string(kEnergyTableHeader) +
                             "'",
                         1);
    }
    std::vector<EnergyRecord> records;
    std::map<std::string, std::size_t> seen;
    std::size_t line_no = 1;
    while (detail::getline_crlf(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::size_t comma = line.find(',');
        if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
            throw ParseError("energy table: expected 'homotop_id,energy_hartree'", line_no);
        }
        EnergyRecord record;
        record.homotop_id = line.substr(0, comma);
        try {
            Homotop::from_id(record.homotop_id); // reject non-canonical ids early
        } catch (const ParseError& e) {
            throw ParseError(std::string("energy table: ") + e.what(), line_no);
        }
        record.energy_hartree = detail::parse_double_token(
            std::string_view(line).substr(comma + 1), line_no, "energy table");
        if (const auto [it, inserted] = seen.emplace(record.homotop_id, line_no); !inserted) {
            throw DuplicateRecordError("energy table: id '" + record.homotop_id +
                                           "' already defined at line " +
                                           std::to_string(it->second),
                                       line_no);
        }
        records.push_back(std::move(record));
    }
    return records;
}

inline std::vector<EnergyRecord> read_energy_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("energy table: cannot open '" + path + "'", 0);
    }
    return read_energy_table(in);
}

inline void write_energy_table(std::ostream& out, const std::vector<EnergyRecord>& records) {
    out << kEnergyTableHeader << '\n';
    char buf[64];
    for (const auto& record : records) {
        const auto [ptr, ec] =
            std::to_chars(buf, buf + sizeof buf, record.energy_hartree); // shortest round-trip
        out << record.homotop_id << ','
            << std::string_view(buf, static_cast<std::size_t>(ptr - buf)) << '\n';
    }
}

inline void write_energy_table(const std::string& path, const std::vector<EnergyRecord>& records) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("energy table: cannot write '" + path + "'");
    }
    write_energy_table(out, records);
    out.flush();
    if (!out) {
        throw std::runtime_error("energy table: write to '" + path + "' failed");
    }
}

class EnergyOracle {
public:
    virtual ~EnergyOracle() = default;
    // Total energy of the homotop in Hartree.
    virtual double evaluate(const CandidateSpace& space, const Homotop& h) const = 0;
};

class TableOracle : public EnergyOracle {
public:
    explicit TableOracle(const std::vector<EnergyRecord>& records) {
        for (const auto& record : records) {
            if (!table_.emplace(record.homotop_id, record.energy_hartree).second) {
                throw DuplicateRecordError("table oracle: duplicate id '" + record.homotop_id +
                                               "'",
                                           0);
            }
        }
    }

    double evaluate(const CandidateSpace&, const Homotop& h) const override {
        const auto it = table_.find(h.id());
        if (it == table_.end()) {
            throw MissingRecordError("table oracle: no energy for homotop '" + h.id() + "'");
        }
        return it->second;
    }

    std::size_t size() const { return table_.size(); }

private:
    std::map<std::string, double> table_;
};

// Synthetic pair potential: E = sum over unordered atom pairs of
// J(species_i, species_j) * exp(-r_ij / rho). Couplings are keyed by
// host-host / host-dopant / dopant-dopant, named after the Si/Al test system.
struct ToyParams {
    double j_sisi = 0.0;
    double j_sial = -0.3;
    double j_alal = 0.5;
    double rho = 2.0; // Å

    void validate() const {
        if (!(rho > 0.0)) {
            throw std::invalid_argument("toy oracle: rho must be positive");
        }
    }
};

class ToyOracle : public EnergyOracle {
public:
    explicit ToyOracle(ToyParams params = {}) : params_(params) { params_.validate(); }

    double evaluate(const CandidateSpace& space, const Homotop& h) const override {
        const Geometry geometry = homotop_geometry(space, h);
        const int n = geometry.n_atoms();
        double energy = 0.0;
        for (int i = 0; i < n; ++i) {
            const bool i_dopant = geometry.elements[static_cast<std::size_t>(i)] ==
                                  space.dopant_element;
            for (int j = i + 1; j < n; ++j) {
                const double r = (geometry.positions.row(i) - geometry.positions.row(j)).norm();
                if (r == 0.0) {
                    throw DegenerateGeometryError("toy oracle: atoms " + std::to_string(i) +
                                                  " and " + std::to_string(j) + " coincide");
                }
                const bool j_dopant = geometry.elements[static_cast<std::size_t>(j)] ==
                                      space.dopant_element;
                const double coupling = i_dopant && j_dopant ? params_.j_alal
                                        : i_dopant || j_dopant ? params_.j_sial
                                                               : params_.j_sisi;
                energy += coupling * std::exp(-r / params_.rho);
            }
        }
        return energy;
    }

    const ToyParams& params() const { return params_; }

private:
    ToyParams params_;
};

// Runs `<command> <xyz_path>` and parses the last whitespace-separated token
// of the last non-empty stdout line as the energy. No relaxation happens
// here; whatever the external code prints is taken as the relaxed total
// energy of the homotop it was handed.
class CommandOracle : public EnergyOracle {
public:
    explicit CommandOracle(std::string command) : command_(std::move(command)) {
        if (command_.empty()) {
            throw std::invalid_argument("command oracle: empty command");
        }
    }

    double evaluate(const CandidateSpace& space, const Homotop& h) const override {
        namespace fs = std::filesystem;
        static std::atomic<unsigned long> counter{0};
        const std::string stem = "qal-" + std::to_string(::getpid()) + "-" +
                                 std::to_string(counter.fetch_add(1));
        const fs::path dir = fs::temp_directory_path();
        const fs::path xyz = dir / (stem + ".xyz");
        const fs::path out = dir / (stem + ".out");
        const fs::path err = dir / (stem + ".err");
        struct Cleanup {
            const fs::path *a, *b, *c;
            ~Cleanup() {
                std::error_code ec;
                fs::remove(*a, ec);
                fs::remove(*b, ec);
                fs::remove(*c, ec);
            }
        } cleanup{&xyz, &out, &err};

        write_xyz(xyz.string(), homotop_geometry(space, h), h.id());
        const std::string shell_command = command_ + " '" + xyz.string() + "' > '" +
                                          out.string() + "' 2> '" + err.string() + "'";
        const int status = std::system(shell_command.c_str());
        const std::string stderr_text = slurp(err);
        if (status == -1 || !WIFEXITED(status) || WEXITSTATUS(status) != 0) {
            throw OracleError("command oracle: '" + command_ + "' failed on homotop '" + h.id() +
                                  "' (status " + std::to_string(status) + ")",
                              stderr_text);
        }
        return parse_energy(slurp(out), stderr_text, h.id());
    }

    const std::string& command() const { return command_; }

private:
    static std::string slurp(const std::filesystem::path& path) {
        std::ifstream in(path);
        std::ostringstream buffer;
        buffer << in.rdbuf();
        return buffer.str();
    }

    double parse_energy(const std::string& stdout_text, const std::string& stderr_text,
                        const std::string& id) const {
        std::string_view text = stdout_text;
        // last non-empty line
        std::string_view line;
        while (!text.empty()) {
            const std::size_t nl = text.rfind('\n');
            std::string_view candidate =
                nl == std::string_view::npos ? text : text.substr(nl + 1);
            if (!candidate.empty() && candidate.back() == '\r') candidate.remove_suffix(1);
            if (candidate.find_first_not_of(" \t") != std::string_view::npos) {
                line = candidate;
                break;
            }
            text = nl == std::string_view::npos ? std::string_view{} : text.substr(0, nl);
        }
        const auto tokens = detail::split_tokens(line);
        if (tokens.empty()) {
            throw OracleError("command oracle: no energy on stdout for homotop '" + id + "'",
                              stderr_text);
        }
        const std::string_view token = tokens.back();
        double energy = 0.0;
        const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), energy);
        if (ec != std::errc{} || ptr != token.data() + token.size() || !std::isfinite(energy)) {
            throw OracleError("command oracle: cannot parse energy token '" + std::string(token) +
                                  "' for homotop '" + id + "'",
                              stderr_text);
        }
        return energy;
    }

    std::string command_;
};

} // namespace qal
