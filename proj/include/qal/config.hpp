// Run configuration: `key = value` text files with `#` comments, strict
// unknown-key and duplicate-key checking, defaults matching the benchmark
// protocol, and a canonical serialization whose FNV-1a hash stamps every
// output CSV so runs can be traced back to their exact settings.

#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qal/descriptors.hpp"
#include "qal/encoding.hpp"
#include "qal/errors.hpp"
#include "qal/gpr.hpp"
#include "qal/oracle.hpp"

namespace qal {

enum class OracleKind { Table, Toy, Command };
enum class ModelKind { Gpr, Qgpr };
enum class KernelKind { DotProductWhite, ConstantRbf, Fqk, Pqk };
enum class AcquisitionKind { Exploitation, Lcb };

inline std::string to_string(OracleKind kind) {
    switch (kind) {
    case OracleKind::Table: return "table";
    case OracleKind::Toy: return "toy";
    case OracleKind::Command: return "command";
    }
    return {};
}

inline std::string to_string(ModelKind kind) {
    return kind == ModelKind::Gpr ? "gpr" : "qgpr";
}

inline std::string to_string(KernelKind kind) {
    switch (kind) {
    case KernelKind::DotProductWhite: return "dotproduct_white";
    case KernelKind::ConstantRbf: return "constant_rbf";
    case KernelKind::Fqk: return "fqk";
    case KernelKind::Pqk: return "pqk";
    }
    return {};
}

inline std::string to_string(AcquisitionKind kind) {
    return kind == AcquisitionKind::Exploitation ? "exploitation" : "lcb";
}

struct AlConfig {
    // space + oracle
    std::string geometry_xyz;
    std::optional<int> n_sites; // checked against the geometry when present
    int n_dopants = 4;
    std::string dopant_element = "Al";
    OracleKind oracle = OracleKind::Toy;
    std::string energy_table;
    std::string command;
    ToyParams toy;

    // model
    ModelKind model = ModelKind::Gpr;
    std::optional<KernelKind> kernel; // default depends on model
    EncodingKind feature_map = EncodingKind::YZ_CX;
    int reps = 4;
    double gamma = 1.0;
    std::optional<double> diag_reg; // default depends on model
    int pca_components = 4;
    MbtrParams mbtr;

    // loop
    int n_initial = 20;
    int n_cycles = 60;
    int n_selected = 5;
    AcquisitionKind acquisition = AcquisitionKind::Exploitation;
    double kappa = 2.0;
    std::optional<double> init_threshold_hartree;
    std::optional<double> init_quantile;
    int runs = 10;
    std::uint64_t base_seed = 0;
    double train_fraction = 0.95;
    std::string out_dir = "out";
    int workers = 1;

    KernelKind effective_kernel() const {
        if (kernel) return *kernel;
        return model == ModelKind::Gpr ? KernelKind::DotProductWhite : KernelKind::Fqk;
    }

    // Table-1 defaults: alpha = 1.0 on classical Grams, sigma = 1e-4 on
    // quantum Grams.
    double effective_diag_reg() const {
        if (diag_reg) return *diag_reg;
        return model == ModelKind::Gpr ? 1.0 : 1e-4;
    }

    void validate() const {
        if (geometry_xyz.empty()) throw ConfigError("config: geometry_xyz is required");
        if (n_sites && *n_sites < 2) throw ConfigError("config: n_sites must be at least 2");
        if (n_dopants < 0) throw ConfigError("config: n_dopants must be nonnegative");
        if (n_sites && n_dopants > *n_sites) {
            throw ConfigError("config: n_dopants exceeds n_sites");
        }
        if (dopant_element.empty()) throw ConfigError("config: dopant_element is required");
        if (oracle == OracleKind::Table && energy_table.empty()) {
            throw ConfigError("config: oracle = table requires energy_table");
        }
        if (oracle == OracleKind::Command && command.empty()) {
            throw ConfigError("config: oracle = command requires command");
        }
        if (!(toy.rho > 0.0)) throw ConfigError("config: toy.rho must be positive");

        const KernelKind k = effective_kernel();
        const bool classical_kernel =
            k == KernelKind::DotProductWhite || k == KernelKind::ConstantRbf;
        if ((model == ModelKind::Gpr) != classical_kernel) {
            throw ConfigError("config: model " + to_string(model) + " cannot use kernel " +
                              to_string(k));
        }
        if (reps < 1) throw ConfigError("config: reps must be at least 1");
        if (k == KernelKind::Pqk && !(gamma > 0.0)) {
            throw ConfigError("config: pqk requires gamma > 0");
        }
        if (diag_reg && (!(*diag_reg >= 0.0) || !std::isfinite(*diag_reg))) {
            throw ConfigError("config: diag_reg must be a finite nonnegative real");
        }
        if (pca_components < 1) throw ConfigError("config: pca_components must be at least 1");
        if (model == ModelKind::Qgpr && pca_components > kMaxQubits) {
            throw ConfigError("config: pca_components (qubit count) capped at " +
                              std::to_string(kMaxQubits) + " for quantum kernels");
        }
        try {
            mbtr.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("config: ") + e.what());
        }

        if (n_initial < 2) throw ConfigError("config: n_initial must be at least 2");
        if (n_cycles < 1) throw ConfigError("config: n_cycles must be at least 1");
        if (n_selected < 1) throw ConfigError("config: n_selected must be at least 1");
        if (acquisition == AcquisitionKind::Lcb && !(kappa >= 0.0)) {
            throw ConfigError("config: kappa must be nonnegative");
        }
        if (init_threshold_hartree && init_quantile) {
            throw ConfigError(
                "config: init_threshold_hartree and init_quantile are mutually exclusive");
        }
        if (init_quantile && (!(*init_quantile >= 0.0) || !(*init_quantile <= 1.0))) {
            throw ConfigError("config: init_quantile must lie in [0, 1]");
        }
        if (init_quantile && oracle != OracleKind::Table) {
            throw ConfigError("config: init_quantile needs the full energy distribution; "
                              "use oracle = table or init_threshold_hartree");
        }
        if (runs < 1) throw ConfigError("config: runs must be at least 1");
        if (!(train_fraction > 0.0) || !(train_fraction < 1.0)) {
            throw ConfigError("config: train_fraction must lie in (0, 1)");
        }
        if (out_dir.empty()) throw ConfigError("config: out_dir must not be empty");
        if (workers < 1) throw ConfigError("config: workers must be at least 1");
    }
};

namespace detail {

inline std::string format_double(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

inline int config_int(std::string_view value, const std::string& key) {
    int out = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
        throw ConfigError("config: key '" + key + "': bad integer '" + std::string(value) + "'");
    }
    return out;
}

inline std::uint64_t config_u64(std::string_view value, const std::string& key) {
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
        throw ConfigError("config: key '" + key + "': bad unsigned integer '" +
                          std::string(value) + "'");
    }
    return out;
}

inline double config_real(std::string_view value, const std::string& key) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size() || !std::isfinite(out)) {
        throw ConfigError("config: key '" + key + "': bad real '" + std::string(value) + "'");
    }
    return out;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

} // namespace detail

inline AlConfig parse_config(std::istream& in) {
    AlConfig config;
    std::map<std::string, std::size_t> seen;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (const std::size_t hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = detail::trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("config: line " + std::to_string(line_no) +
                              ": expected 'key = value'");
        }
        const std::string key(detail::trim(line.substr(0, eq)));
        const std::string value(detail::trim(line.substr(eq + 1)));
        if (key.empty() || value.empty()) {
            throw ConfigError("config: line " + std::to_string(line_no) +
                              ": empty key or value");
        }
        if (const auto [it, inserted] = seen.emplace(key, line_no); !inserted) {
            throw ConfigError("config: line " + std::to_string(line_no) + ": key '" + key +
                              "' already set at line " + std::to_string(it->second));
        }

        if (key == "geometry_xyz") {
            config.geometry_xyz = value;
        } else if (key == "n_sites") {
            config.n_sites = detail::config_int(value, key);
        } else if (key == "n_dopants") {
            config.n_dopants = detail::config_int(value, key);
        } else if (key == "dopant_element") {
            config.dopant_element = value;
        } else if (key == "oracle") {
            if (value == "table") config.oracle = OracleKind::Table;
            else if (value == "toy") config.oracle = OracleKind::Toy;
            else if (value == "command") config.oracle = OracleKind::Command;
            else throw ConfigError("config: oracle must be table|toy|command, got '" + value + "'");
        } else if (key == "energy_table") {
            config.energy_table = value;
        } else if (key == "command") {
            config.command = value;
        } else if (key == "toy.j_sisi") {
            config.toy.j_sisi = detail::config_real(value, key);
        } else if (key == "toy.j_sial") {
            config.toy.j_sial = detail::config_real(value, key);
        } else if (key == "toy.j_alal") {
            config.toy.j_alal = detail::config_real(value, key);
        } else if (key == "toy.rho") {
            config.toy.rho = detail::config_real(value, key);
        } else if (key == "model") {
            if (value == "gpr") config.model = ModelKind::Gpr;
            else if (value == "qgpr") config.model = ModelKind::Qgpr;
            else throw ConfigError("config: model must be gpr|qgpr, got '" + value + "'");
        } else if (key == "kernel") {
            if (value == "dotproduct_white") config.kernel = KernelKind::DotProductWhite;
            else if (value == "constant_rbf") config.kernel = KernelKind::ConstantRbf;
            else if (value == "fqk") config.kernel = KernelKind::Fqk;
            else if (value == "pqk") config.kernel = KernelKind::Pqk;
            else {
                throw ConfigError(
                    "config: kernel must be dotproduct_white|constant_rbf|fqk|pqk, got '" +
                    value + "'");
            }
        } else if (key == "feature_map") {
            if (value == "yz_cx") config.feature_map = EncodingKind::YZ_CX;
            else if (value == "highdim") config.feature_map = EncodingKind::HighDim;
            else throw ConfigError("config: feature_map must be yz_cx|highdim, got '" + value + "'");
        } else if (key == "reps") {
            config.reps = detail::config_int(value, key);
        } else if (key == "gamma") {
            config.gamma = detail::config_real(value, key);
        } else if (key == "diag_reg") {
            config.diag_reg = detail::config_real(value, key);
        } else if (key == "pca_components") {
            config.pca_components = detail::config_int(value, key);
        } else if (key == "mbtr.grid_min") {
            config.mbtr.grid_min = detail::config_real(value, key);
        } else if (key == "mbtr.grid_max") {
            config.mbtr.grid_max = detail::config_real(value, key);
        } else if (key == "mbtr.grid_points") {
            config.mbtr.grid_points = detail::config_int(value, key);
        } else if (key == "mbtr.sigma") {
            config.mbtr.sigma = detail::config_real(value, key);
        } else if (key == "mbtr.decay") {
            config.mbtr.decay = detail::config_real(value, key);
        } else if (key == "n_initial") {
            config.n_initial = detail::config_int(value, key);
        } else if (key == "n_cycles") {
            config.n_cycles = detail::config_int(value, key);
        } else if (key == "n_selected") {
            config.n_selected = detail::config_int(value, key);
        } else if (key == "acquisition") {
            if (value == "exploitation") config.acquisition = AcquisitionKind::Exploitation;
            else if (value == "lcb") config.acquisition = AcquisitionKind::Lcb;
            else {
                throw ConfigError("config: acquisition must be exploitation|lcb, got '" + value +
                                  "'");
            }
        } else if (key == "kappa") {
            config.kappa = detail::config_real(value, key);
        } else if (key == "init_threshold_hartree") {
            config.init_threshold_hartree = detail::config_real(value, key);
        } else if (key == "init_quantile") {
            config.init_quantile = detail::config_real(value, key);
        } else if (key == "runs") {
            config.runs = detail::config_int(value, key);
        } else if (key == "base_seed") {
            config.base_seed = detail::config_u64(value, key);
        } else if (key == "train_fraction") {
            config.train_fraction = detail::config_real(value, key);
        } else if (key == "out_dir") {
            config.out_dir = value;
        } else if (key == "workers") {
            config.workers = detail::config_int(value, key);
        } else {
            throw ConfigError("config: line " + std::to_string(line_no) + ": unknown key '" +
                              key + "'");
        }
    }
    config.validate();
    return config;
}

inline AlConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("config: cannot open '" + path + "'");
    }
    return parse_config(in);
}

// Canonical text of the effective settings (defaults resolved, fixed key
// order). Basis of the config hash recorded in output headers.
inline std::string canonical_config_text(const AlConfig& config) {
    std::ostringstream out;
    out << "geometry_xyz = " << config.geometry_xyz << '\n';
    if (config.n_sites) out << "n_sites = " << *config.n_sites << '\n';
    out << "n_dopants = " << config.n_dopants << '\n';
    out << "dopant_element = " << config.dopant_element << '\n';
    out << "oracle = " << to_string(config.oracle) << '\n';
    if (!config.energy_table.empty()) out << "energy_table = " << config.energy_table << '\n';
    if (!config.command.empty()) out << "command = " << config.command << '\n';
    out << "toy.j_sisi = " << detail::format_double(config.toy.j_sisi) << '\n';
    out << "toy.j_sial = " << detail::format_double(config.toy.j_sial) << '\n';
    out << "toy.j_alal = " << detail::format_double(config.toy.j_alal) << '\n';
    out << "toy.rho = " << detail::format_double(config.toy.rho) << '\n';
    out << "model = " << to_string(config.model) << '\n';
    out << "kernel = " << to_string(config.effective_kernel()) << '\n';
    out << "feature_map = " << to_string(config.feature_map) << '\n';
    out << "reps = " << config.reps << '\n';
    out << "gamma = " << detail::format_double(config.gamma) << '\n';
    out << "diag_reg = " << detail::format_double(config.effective_diag_reg()) << '\n';
    out << "pca_components = " << config.pca_components << '\n';
    out << "mbtr.grid_min = " << detail::format_double(config.mbtr.grid_min) << '\n';
    out << "mbtr.grid_max = " << detail::format_double(config.mbtr.grid_max) << '\n';
    out << "mbtr.grid_points = " << config.mbtr.grid_points << '\n';
    out << "mbtr.sigma = " << detail::format_double(config.mbtr.sigma) << '\n';
    out << "mbtr.decay = " << detail::format_double(config.mbtr.decay) << '\n';
    out << "n_initial = " << config.n_initial << '\n';
    out << "n_cycles = " << config.n_cycles << '\n';
    out << "n_selected = " << config.n_selected << '\n';
    out << "acquisition = " << to_string(config.acquisition) << '\n';
    out << "kappa = " << detail::format_double(config.kappa) << '\n';
    if (config.init_threshold_hartree) {
        out << "init_threshold_hartree = " << detail::format_double(*config.init_threshold_hartree)
            << '\n';
    }
    if (config.init_quantile) {
        out << "init_quantile = " << detail::format_double(*config.init_quantile) << '\n';
    }
    out << "runs = " << config.runs << '\n';
    out << "base_seed = " << config.base_seed << '\n';
    out << "train_fraction = " << detail::format_double(config.train_fraction) << '\n';
    out << "out_dir = " << config.out_dir << '\n';
    out << "workers = " << config.workers << '\n';
    return out.str();
}

// FNV-1a, 64-bit, as a 16-digit hex string.
inline std::string config_hash(const AlConfig& config) {
    const std::string text = canonical_config_text(config);
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (const unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    char buf[17];
    for (int i = 15; i >= 0; --i) {
        buf[i] = "0123456789abcdef"[hash & 0xf];
        hash >>= 4;
    }
    return std::string(buf, 16);
}

// Table-1 kernel setups: initial leaf parameters plus log-space search
// bounds for the classical compositions; fixed (never re-tuned) specs for
// the quantum kernels.
struct ModelSpec {
    KernelSpec kernel;
    std::optional<HyperBounds> bounds; // present only for classical kernels
    double diag_reg = 0.0;
};

inline ModelSpec make_model(const AlConfig& config) {
    ModelSpec spec;
    spec.diag_reg = config.effective_diag_reg();
    switch (config.effective_kernel()) {
    case KernelKind::DotProductWhite:
        spec.kernel = ClassicalKernel::dot_product(1.0) + ClassicalKernel::white(10.0);
        spec.bounds = HyperBounds{{{1e-3, 1e3}, {1e-3, 1e3}}};
        break;
    case KernelKind::ConstantRbf:
        spec.kernel = ClassicalKernel::constant(1.0) * ClassicalKernel::rbf(10.0);
        spec.bounds = HyperBounds{{{1e-3, 1e3}, {1e-2, 1e2}}};
        break;
    case KernelKind::Fqk:
        spec.kernel = QuantumKernelSpec{QuantumKernelKind::FQK,
                                        EncodingSpec{config.feature_map, config.pca_components,
                                                     config.reps},
                                        config.gamma};
        break;
    case KernelKind::Pqk:
        spec.kernel = QuantumKernelSpec{QuantumKernelKind::PQK,
                                        EncodingSpec{config.feature_map, config.pca_components,
                                                     config.reps},
                                        config.gamma};
        break;
    }
    if (const auto* quantum = std::get_if<QuantumKernelSpec>(&spec.kernel)) {
        quantum->validate();
    }
    return spec;
}

inline std::unique_ptr<EnergyOracle> make_oracle(const AlConfig& config) {
    switch (config.oracle) {
    case OracleKind::Table:
        return std::make_unique<TableOracle>(read_energy_table(config.energy_table));
    case OracleKind::Toy:
        return std::make_unique<ToyOracle>(config.toy);
    case OracleKind::Command:
        return std::make_unique<CommandOracle>(config.command);
    }
    throw ConfigError("config: unreachable oracle kind");
}

} // namespace qal
