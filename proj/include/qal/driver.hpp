// Active-learning orchestration: feature pipeline over the full candidate
// space, seeded initialization, the per-cycle fit/score/select/evaluate
// loop, multi-run experiments, aggregation across runs, and the CSV/SVG
// output formats.
//
// The observed/virtual bookkeeping works on row indices into the candidate
// enumeration; canonical homotop id strings appear at the interfaces (CSV,
// tie-breaking) only.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "qal/config.hpp"
#include "qal/descriptors.hpp"
#include "qal/errors.hpp"
#include "qal/gpr.hpp"
#include "qal/oracle.hpp"
#include "qal/space.hpp"

namespace qal {

// Classical hyperparameters are re-tuned every cycle from the Table-1
// initial point plus this many random log-space restarts.
inline constexpr int kOptimizerRestarts = 2;
// Rejection-sampling budget for threshold-filtered initialization when no
// energy table exists, in draws per requested structure.
inline constexpr int kInitRejectionCapFactor = 50;

namespace detail {

inline Eigen::MatrixXd take_rows(const Eigen::MatrixXd& source, const std::vector<int>& rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), source.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = source.row(rows[i]);
    }
    return out;
}

inline Eigen::MatrixXd take_submatrix(const Eigen::MatrixXd& source, const std::vector<int>& rows,
                                      const std::vector<int>& cols) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()),
                        static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < cols.size(); ++j) {
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                source(rows[i], cols[j]);
        }
    }
    return out;
}

inline Eigen::VectorXd take(const std::vector<double>& values, const std::vector<int>& at) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(at.size()));
    for (std::size_t i = 0; i < at.size(); ++i) {
        out(static_cast<Eigen::Index>(i)) = values[static_cast<std::size_t>(at[i])];
    }
    return out;
}

} // namespace detail

// Everything derived from the config once per experiment: the enumerated
// space, the oracle, the MBTR -> PCA -> [0, pi] feature pipeline fitted over
// the FULL candidate set, and (for quantum kernels, whose parameters never
// change) the full-space Gram matrix, sliced per cycle instead of recomputed.
struct Workspace {
    AlConfig config;
    std::string hash;
    CandidateSpace space;
    std::vector<std::string> ids; // canonical id per homotop row
    std::unique_ptr<EnergyOracle> oracle;
    PcaModel pca;
    MinMaxScaler scaler;
    Eigen::MatrixXd features; // n_homotops x pca_components, scaled to [0, pi]
    ModelSpec model;
    Eigen::MatrixXd quantum_gram_full; // empty for classical kernels

    bool classical() const { return std::holds_alternative<ClassicalKernel>(model.kernel); }
    int total() const { return static_cast<int>(space.homotops.size()); }

    static Workspace prepare(AlConfig config) {
        config.validate();
        Workspace ws;
        ws.config = std::move(config);
        ws.hash = config_hash(ws.config);

        Geometry host = read_xyz(ws.config.geometry_xyz);
        if (ws.config.n_sites && *ws.config.n_sites != host.n_atoms()) {
            throw ConfigError("config: n_sites = " + std::to_string(*ws.config.n_sites) +
                              " but '" + ws.config.geometry_xyz + "' has " +
                              std::to_string(host.n_atoms()) + " atoms");
        }
        ws.space = CandidateSpace::build(std::move(host), ws.config.n_dopants,
                                         ws.config.dopant_element);
        ws.ids.reserve(ws.space.homotops.size());
        for (const auto& h : ws.space.homotops) ws.ids.push_back(h.id());
        ws.oracle = make_oracle(ws.config);

        Eigen::MatrixXd descriptors(ws.total(), ws.config.mbtr.length());
        for (int i = 0; i < ws.total(); ++i) {
            descriptors.row(i) =
                mbtr2(homotop_geometry(ws.space, ws.space.homotops[static_cast<std::size_t>(i)]),
                      ws.config.mbtr);
        }
        ws.pca = fit_pca(descriptors, ws.config.pca_components);
        auto [features, scaler] =
            minmax_scale(pca_project(ws.pca, descriptors), 0.0, std::numbers::pi);
        ws.features = std::move(features);
        ws.scaler = std::move(scaler);

        ws.model = make_model(ws.config);
        if (!ws.classical()) {
            ws.quantum_gram_full = quantum_gram(std::get<QuantumKernelSpec>(ws.model.kernel),
                                                ws.features, ws.features, true);
        }
        return ws;
    }
};

struct CycleRecord {
    int cycle = 0;          // 1-based
    int n_observed = 0;     // database size the model was fit on
    int n_new_calcs_cum = 0; // selected-and-evaluated count, cumulative
    double best_energy = 0.0; // after this cycle's update
    double mae_train = 0.0;
    double mae_test = 0.0;
    std::vector<std::string> selected_ids;
    std::vector<double> selected_energies;
};

struct RunState {
    std::uint64_t seed = 0;
    std::mt19937_64 rng;
    std::vector<int> observed; // homotop rows, in acquisition order
    std::vector<double> observed_energy;
    std::vector<int> virtual_set; // remaining rows, enumeration order
    double best_energy = std::numeric_limits<double>::infinity();
    std::vector<CycleRecord> history;
};

// Draws n_initial distinct structures, uniformly at random among those whose
// energy passes the init filter (>= threshold); everything else starts
// virtual, including structures failing the filter. With a table oracle the
// filter set is computed exactly from the full table; otherwise a capped
// seeded rejection sampler probes the oracle.
inline RunState init_database(const Workspace& ws, std::uint64_t seed) {
    const AlConfig& config = ws.config;
    const int total = ws.total();
    RunState state;
    state.seed = seed;
    state.rng.seed(seed);

    double threshold = -std::numeric_limits<double>::infinity();
    if (config.init_threshold_hartree) threshold = *config.init_threshold_hartree;

    std::vector<int> chosen;
    std::vector<double> chosen_energy;
    chosen.reserve(static_cast<std::size_t>(config.n_initial));
    chosen_energy.reserve(static_cast<std::size_t>(config.n_initial));

    const auto sample_from_pool = [&](std::vector<int> pool,
                                      const std::vector<double>& all_energies) {
        // partial Fisher-Yates: the first n_initial slots become the draw
        for (int i = 0; i < config.n_initial; ++i) {
            std::uniform_int_distribution<int> pick(i, static_cast<int>(pool.size()) - 1);
            std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(state.rng))]);
            const int row = pool[static_cast<std::size_t>(i)];
            chosen.push_back(row);
            chosen_energy.push_back(all_energies.empty()
                                        ? ws.oracle->evaluate(ws.space, ws.space.homotops[static_cast<std::size_t>(row)])
                                        : all_energies[static_cast<std::size_t>(row)]);
        }
    };

    if (config.oracle == OracleKind::Table) {
        std::vector<double> all(static_cast<std::size_t>(total));
        for (int i = 0; i < total; ++i) {
            all[static_cast<std::size_t>(i)] =
                ws.oracle->evaluate(ws.space, ws.space.homotops[static_cast<std::size_t>(i)]);
        }
        if (config.init_quantile) {
            std::vector<double> sorted = all;
            std::sort(sorted.begin(), sorted.end());
            const auto idx = static_cast<std::size_t>(
                std::ceil(*config.init_quantile * static_cast<double>(sorted.size() - 1)));
            threshold = sorted[idx];
        }
        std::vector<int> eligible;
        for (int i = 0; i < total; ++i) {
            if (all[static_cast<std::size_t>(i)] >= threshold) eligible.push_back(i);
        }
        if (static_cast<int>(eligible.size()) < config.n_initial) {
            throw ConfigError("init filter keeps " + std::to_string(eligible.size()) + " of " +
                              std::to_string(total) + " structures but n_initial = " +
                              std::to_string(config.n_initial));
        }
        sample_from_pool(std::move(eligible), all);
    } else if (threshold == -std::numeric_limits<double>::infinity()) {
        if (total < config.n_initial) {
            throw ConfigError("candidate space holds " + std::to_string(total) +
                              " structures but n_initial = " + std::to_string(config.n_initial));
        }
        std::vector<int> pool(static_cast<std::size_t>(total));
        std::iota(pool.begin(), pool.end(), 0);
        sample_from_pool(std::move(pool), {});
    } else {
        // no table: probe random structures until enough pass the filter
        const int cap = kInitRejectionCapFactor * config.n_initial;
        std::vector<char> accepted(static_cast<std::size_t>(total), 0);
        std::map<int, double> probed;
        std::uniform_int_distribution<int> pick(0, total - 1);
        int draws = 0;
        while (static_cast<int>(chosen.size()) < config.n_initial) {
            if (draws >= cap) {
                throw ConfigError("init filter: gave up after " + std::to_string(cap) +
                                  " rejection-sampling draws with only " +
                                  std::to_string(chosen.size()) + " of " +
                                  std::to_string(config.n_initial) +
                                  " accepted; the threshold excludes too much of the space");
            }
            ++draws;
            const int row = pick(state.rng);
            if (accepted[static_cast<std::size_t>(row)]) continue;
            auto it = probed.find(row);
            if (it == probed.end()) {
                it = probed
                         .emplace(row, ws.oracle->evaluate(
                                           ws.space, ws.space.homotops[static_cast<std::size_t>(row)]))
                         .first;
            }
            if (it->second >= threshold) {
                accepted[static_cast<std::size_t>(row)] = 1;
                chosen.push_back(row);
                chosen_energy.push_back(it->second);
            }
        }
    }

    std::vector<char> in_observed(static_cast<std::size_t>(total), 0);
    for (const int row : chosen) in_observed[static_cast<std::size_t>(row)] = 1;
    state.observed = std::move(chosen);
    state.observed_energy = std::move(chosen_energy);
    state.virtual_set.reserve(static_cast<std::size_t>(total - config.n_initial));
    for (int i = 0; i < total; ++i) {
        if (!in_observed[static_cast<std::size_t>(i)]) state.virtual_set.push_back(i);
    }
    state.best_energy = *std::min_element(state.observed_energy.begin(),
                                          state.observed_energy.end());
    return state;
}

// Uniform random partition with |train| = round(fraction * N) clamped to
// [1, N-1], so both sides are always non-empty.
template <typename T>
std::pair<std::vector<T>, std::vector<T>> split_train_test(const std::vector<T>& observed,
                                                           double train_fraction,
                                                           std::mt19937_64& rng) {
    const int n = static_cast<int>(observed.size());
    if (n < 2) {
        throw std::invalid_argument("split_train_test: need at least 2 observations");
    }
    if (!(train_fraction > 0.0) || !(train_fraction < 1.0)) {
        throw std::invalid_argument("split_train_test: train_fraction must lie in (0, 1)");
    }
    std::vector<T> shuffled = observed;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const int n_train =
        std::clamp(static_cast<int>(std::llround(train_fraction * n)), 1, n - 1);
    return {std::vector<T>(shuffled.begin(), shuffled.begin() + n_train),
            std::vector<T>(shuffled.begin() + n_train, shuffled.end())};
}

struct AcquireResult {
    std::vector<int> positions; // into the prediction arrays, selection order
    bool exhausted = false;     // the request consumed every candidate
};

// Picks the k candidates with the lowest score: predicted mean for
// exploitation, mean - kappa*sqrt(variance) for lcb. Ties break by
// ascending homotop id so selection is deterministic.
inline AcquireResult acquire(AcquisitionKind kind, double kappa, const Eigen::VectorXd& means,
                             const Eigen::VectorXd& variances,
                             const std::vector<std::string>& ids, int k) {
    const Eigen::Index n = means.size();
    if (variances.size() != n || static_cast<Eigen::Index>(ids.size()) != n || n == 0) {
        throw std::invalid_argument("acquire: prediction arrays must be non-empty and aligned");
    }
    if (k < 1) {
        throw std::invalid_argument("acquire: k must be positive");
    }
    Eigen::VectorXd score = means;
    if (kind == AcquisitionKind::Lcb) {
        score -= kappa * variances.cwiseMax(0.0).cwiseSqrt();
    }
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (score(a) != score(b)) return score(a) < score(b);
        return ids[static_cast<std::size_t>(a)] < ids[static_cast<std::size_t>(b)];
    });
    AcquireResult out;
    const int take = std::min<int>(k, static_cast<int>(n));
    out.positions.assign(order.begin(), order.begin() + take);
    out.exhausted = k >= static_cast<int>(n);
    return out;
}

// One cycle: split 95/5, fit (re-tuning classical hyperparameters; quantum
// kernels stay fixed and reuse the precomputed full-space Gram), log MAEs,
// predict the virtual set, acquire, evaluate with the oracle, update.
// Returns false when the virtual set is exhausted.
inline bool run_cycle(const Workspace& ws, RunState& state) {
    const AlConfig& config = ws.config;
    if (state.virtual_set.empty()) {
        throw std::invalid_argument("run_cycle: no virtual candidates left");
    }
    const int n_obs_pre = static_cast<int>(state.observed.size());

    std::vector<int> positions(static_cast<std::size_t>(n_obs_pre));
    std::iota(positions.begin(), positions.end(), 0);
    const auto [train_pos, test_pos] =
        split_train_test(positions, config.train_fraction, state.rng);
    std::vector<int> train_rows, test_rows;
    train_rows.reserve(train_pos.size());
    test_rows.reserve(test_pos.size());
    for (const int p : train_pos) train_rows.push_back(state.observed[static_cast<std::size_t>(p)]);
    for (const int p : test_pos) test_rows.push_back(state.observed[static_cast<std::size_t>(p)]);
    const Eigen::VectorXd y_train = detail::take(state.observed_energy, train_pos);
    const Eigen::VectorXd y_test = detail::take(state.observed_energy, test_pos);

    double mae_train = 0.0;
    double mae_test = 0.0;
    Eigen::VectorXd virt_mean, virt_var;
    if (ws.classical()) {
        const Eigen::MatrixXd x_train = detail::take_rows(ws.features, train_rows);
        const ClassicalKernel tuned = optimize_hyperparameters(
            std::get<ClassicalKernel>(ws.model.kernel), *ws.model.bounds, x_train, y_train,
            ws.model.diag_reg, kOptimizerRestarts, state.rng);
        const GprModel model = fit(tuned, x_train, y_train, ws.model.diag_reg);
        mae_train = mae(predict(model, x_train).mean, y_train);
        mae_test = mae(predict(model, detail::take_rows(ws.features, test_rows)).mean, y_test);
        const Prediction virt = predict(model, detail::take_rows(ws.features, state.virtual_set));
        virt_mean = virt.mean;
        virt_var = virt.variance;
    } else {
        const Eigen::MatrixXd& g = ws.quantum_gram_full;
        const GramFit gram_fit =
            fit_gram(detail::take_submatrix(g, train_rows, train_rows), y_train,
                     ws.model.diag_reg);
        const auto predict_rows = [&](const std::vector<int>& rows) {
            return predict_gram(gram_fit, detail::take_submatrix(g, rows, train_rows),
                                Eigen::VectorXd::Ones(static_cast<Eigen::Index>(rows.size())));
        };
        mae_train = mae(predict_rows(train_rows).mean, y_train);
        mae_test = mae(predict_rows(test_rows).mean, y_test);
        const Prediction virt = predict_rows(state.virtual_set);
        virt_mean = virt.mean;
        virt_var = virt.variance;
    }

    std::vector<std::string> virt_ids;
    virt_ids.reserve(state.virtual_set.size());
    for (const int row : state.virtual_set) virt_ids.push_back(ws.ids[static_cast<std::size_t>(row)]);
    const AcquireResult acq =
        acquire(config.acquisition, config.kappa, virt_mean, virt_var, virt_ids,
                config.n_selected);

    CycleRecord record;
    record.cycle = static_cast<int>(state.history.size()) + 1;
    record.n_observed = n_obs_pre;
    record.mae_train = mae_train;
    record.mae_test = mae_test;
    std::vector<char> remove(state.virtual_set.size(), 0);
    for (const int pos : acq.positions) {
        const int row = state.virtual_set[static_cast<std::size_t>(pos)];
        const double energy =
            ws.oracle->evaluate(ws.space, ws.space.homotops[static_cast<std::size_t>(row)]);
        record.selected_ids.push_back(ws.ids[static_cast<std::size_t>(row)]);
        record.selected_energies.push_back(energy);
        state.observed.push_back(row);
        state.observed_energy.push_back(energy);
        state.best_energy = std::min(state.best_energy, energy);
        remove[static_cast<std::size_t>(pos)] = 1;
    }
    std::vector<int> remaining;
    remaining.reserve(state.virtual_set.size() - acq.positions.size());
    for (std::size_t i = 0; i < state.virtual_set.size(); ++i) {
        if (!remove[i]) remaining.push_back(state.virtual_set[i]);
    }
    state.virtual_set = std::move(remaining);

    record.n_new_calcs_cum =
        (state.history.empty() ? 0 : state.history.back().n_new_calcs_cum) +
        static_cast<int>(acq.positions.size());
    record.best_energy = state.best_energy;
    state.history.push_back(std::move(record));
    return !state.virtual_set.empty();
}

struct RunResult {
    std::uint64_t seed = 0;
    std::vector<CycleRecord> history;
    std::optional<std::string> failure; // set when the run aborted early
};

inline RunResult run_single(const Workspace& ws, int run_index) {
    RunResult result;
    result.seed = ws.config.base_seed + static_cast<std::uint64_t>(run_index);
    RunState state;
    try {
        state = init_database(ws, result.seed);
    } catch (const std::exception& e) {
        result.failure = std::string("initialization failed: ") + e.what();
        return result;
    }
    for (int cycle = 1; cycle <= ws.config.n_cycles; ++cycle) {
        if (state.virtual_set.empty()) break;
        try {
            if (!run_cycle(ws, state)) break;
        } catch (const std::exception& e) {
            result.failure = "cycle " + std::to_string(cycle) + " failed: " + e.what();
            break;
        }
    }
    result.history = std::move(state.history);
    return result;
}

struct AggregatePoint {
    int n_new_calcs = 0;
    double mean_best_energy = 0.0;
    double std_best_energy = 0.0; // sample standard deviation, 0 for one run
};

// Pointwise mean/std of best-so-far across runs on the union grid of
// cumulative new-calculation counts; exhausted runs carry their final best
// forward.
inline std::vector<AggregatePoint> aggregate_runs(
    const std::vector<std::vector<CycleRecord>>& histories) {
    if (histories.empty()) {
        throw std::invalid_argument("aggregate_runs: need at least one history");
    }
    std::set<int> checkpoints;
    for (const auto& history : histories) {
        if (history.empty()) {
            throw std::invalid_argument("aggregate_runs: history without cycles");
        }
        for (const auto& record : history) checkpoints.insert(record.n_new_calcs_cum);
    }
    std::vector<AggregatePoint> out;
    out.reserve(checkpoints.size());
    for (const int checkpoint : checkpoints) {
        std::vector<double> values;
        values.reserve(histories.size());
        for (const auto& history : histories) {
            double value = history.front().best_energy;
            for (const auto& record : history) {
                if (record.n_new_calcs_cum > checkpoint) break;
                value = record.best_energy;
            }
            values.push_back(value);
        }
        const double mean =
            std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
        double std_dev = 0.0;
        if (values.size() > 1) {
            double ss = 0.0;
            for (const double v : values) ss += (v - mean) * (v - mean);
            std_dev = std::sqrt(ss / static_cast<double>(values.size() - 1));
        }
        out.push_back({checkpoint, mean, std_dev});
    }
    return out;
}

struct MaeReportRow {
    int target_n_observed = 0;
    double mean_n_observed = 0.0; // actual database sizes averaged over runs
    double mean_mae_train = 0.0;
    double mean_mae_test = 0.0;
};

// Table-1-shaped summary: per target database size, the MAEs of the cycle
// whose n_observed comes closest, averaged over runs.
inline std::vector<MaeReportRow> make_mae_report(
    const std::vector<std::vector<CycleRecord>>& histories,
    const std::vector<int>& targets = {20, 100, 200}) {
    if (histories.empty()) {
        throw std::invalid_argument("make_mae_report: need at least one history");
    }
    std::vector<MaeReportRow> rows;
    rows.reserve(targets.size());
    for (const int target : targets) {
        MaeReportRow row;
        row.target_n_observed = target;
        for (const auto& history : histories) {
            if (history.empty()) {
                throw std::invalid_argument("make_mae_report: history without cycles");
            }
            const CycleRecord* closest = &history.front();
            for (const auto& record : history) {
                if (std::abs(record.n_observed - target) <
                    std::abs(closest->n_observed - target)) {
                    closest = &record;
                }
            }
            row.mean_n_observed += closest->n_observed;
            row.mean_mae_train += closest->mae_train;
            row.mean_mae_test += closest->mae_test;
        }
        const double n = static_cast<double>(histories.size());
        row.mean_n_observed /= n;
        row.mean_mae_train /= n;
        row.mean_mae_test /= n;
        rows.push_back(row);
    }
    return rows;
}

struct ExperimentResult {
    std::string config_hash;
    std::vector<RunResult> runs;
    std::vector<AggregatePoint> aggregate;   // over runs that produced cycles
    std::vector<MaeReportRow> mae_report;
};

// `runs` independent seeded runs (seed = base_seed + run_index), optionally
// spread across worker threads; runs are self-contained so the schedule
// cannot change any result.
inline ExperimentResult run_experiment(const Workspace& ws) {
    const int n_runs = ws.config.runs;
    std::vector<RunResult> results(static_cast<std::size_t>(n_runs));
    const int workers = std::clamp(ws.config.workers, 1, n_runs);
    if (workers == 1) {
        for (int i = 0; i < n_runs; ++i) results[static_cast<std::size_t>(i)] = run_single(ws, i);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> threads;
        threads.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            threads.emplace_back([&] {
                for (int i = next.fetch_add(1); i < n_runs; i = next.fetch_add(1)) {
                    results[static_cast<std::size_t>(i)] = run_single(ws, i);
                }
            });
        }
        for (auto& thread : threads) thread.join();
    }

    ExperimentResult out;
    out.config_hash = ws.hash;
    std::vector<std::vector<CycleRecord>> histories;
    for (const auto& result : results) {
        if (!result.history.empty()) histories.push_back(result.history);
    }
    if (!histories.empty()) {
        out.aggregate = aggregate_runs(histories);
        out.mae_report = make_mae_report(histories);
    }
    out.runs = std::move(results);
    return out;
}

// ---------------------------------------------------------------------------
// Output files

inline constexpr std::string_view kRunCsvHeader =
    "cycle,n_observed,n_new_calcs_cum,best_energy_hartree,mae_train_hartree,mae_test_hartree";
inline constexpr std::string_view kAggregateCsvHeader =
    "n_new_calcs,mean_best_energy_hartree,std_best_energy_hartree";
inline constexpr std::string_view kMaeReportCsvHeader =
    "n_observed_target,mean_n_observed,mean_mae_train_hartree,mean_mae_test_hartree";

inline void write_run_csv(std::ostream& out, const std::string& hash, const RunResult& run) {
    out << "# config_hash = " << hash << '\n';
    out << "# seed = " << run.seed << '\n';
    if (run.failure) {
        out << "# failure = " << *run.failure << '\n';
    }
    out << kRunCsvHeader << '\n';
    for (const auto& r : run.history) {
        out << r.cycle << ',' << r.n_observed << ',' << r.n_new_calcs_cum << ','
            << detail::format_double(r.best_energy) << ',' << detail::format_double(r.mae_train)
            << ',' << detail::format_double(r.mae_test) << '\n';
    }
}

struct RunCsv {
    std::string config_hash;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> failure;
    std::vector<CycleRecord> records;
};

inline RunCsv read_run_csv(std::istream& in) {
    RunCsv out;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (detail::getline_crlf(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line.front() == '#') {
            std::string_view body = detail::trim(std::string_view(line).substr(1));
            if (const std::size_t eq = body.find('='); eq != std::string_view::npos) {
                const std::string key(detail::trim(body.substr(0, eq)));
                const std::string value(detail::trim(body.substr(eq + 1)));
                if (key == "config_hash") out.config_hash = value;
                else if (key == "seed") out.seed = detail::config_u64(value, key);
                else if (key == "failure") out.failure = value;
            }
            continue;
        }
        if (!header_seen) {
            if (line != kRunCsvHeader) {
                throw ParseError("run CSV: expected header '" + std::string(kRunCsvHeader) + "'",
                                 line_no);
            }
            header_seen = true;
            continue;
        }
        std::vector<std::string_view> fields;
        std::string_view rest = line;
        while (true) {
            const std::size_t comma = rest.find(',');
            fields.push_back(rest.substr(0, comma));
            if (comma == std::string_view::npos) break;
            rest = rest.substr(comma + 1);
        }
        if (fields.size() != 6) {
            throw ParseError("run CSV: expected 6 fields, got " + std::to_string(fields.size()),
                             line_no);
        }
        CycleRecord record;
        record.cycle = detail::config_int(fields[0], "cycle");
        record.n_observed = detail::config_int(fields[1], "n_observed");
        record.n_new_calcs_cum = detail::config_int(fields[2], "n_new_calcs_cum");
        record.best_energy = detail::parse_double_token(fields[3], line_no, "run CSV");
        record.mae_train = detail::parse_double_token(fields[4], line_no, "run CSV");
        record.mae_test = detail::parse_double_token(fields[5], line_no, "run CSV");
        out.records.push_back(std::move(record));
    }
    if (!header_seen) {
        throw ParseError("run CSV: missing header", line_no);
    }
    return out;
}

inline RunCsv read_run_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("run CSV: cannot open '" + path + "'", 0);
    }
    return read_run_csv(in);
}

inline void write_aggregate_csv(std::ostream& out, const std::string& hash,
                                const std::vector<AggregatePoint>& points) {
    out << "# config_hash = " << hash << '\n';
    out << kAggregateCsvHeader << '\n';
    for (const auto& p : points) {
        out << p.n_new_calcs << ',' << detail::format_double(p.mean_best_energy) << ','
            << detail::format_double(p.std_best_energy) << '\n';
    }
}

inline std::vector<AggregatePoint> read_aggregate_csv(std::istream& in) {
    std::vector<AggregatePoint> points;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (detail::getline_crlf(in, line)) {
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        if (!header_seen) {
            if (line != kAggregateCsvHeader) {
                throw ParseError("aggregate CSV: expected header '" +
                                     std::string(kAggregateCsvHeader) + "'",
                                 line_no);
            }
            header_seen = true;
            continue;
        }
        const std::size_t c1 = line.find(',');
        const std::size_t c2 = c1 == std::string::npos ? std::string::npos
                                                       : line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos ||
            line.find(',', c2 + 1) != std::string::npos) {
            throw ParseError("aggregate CSV: expected 3 fields", line_no);
        }
        AggregatePoint p;
        p.n_new_calcs = detail::config_int(std::string_view(line).substr(0, c1), "n_new_calcs");
        p.mean_best_energy = detail::parse_double_token(
            std::string_view(line).substr(c1 + 1, c2 - c1 - 1), line_no, "aggregate CSV");
        p.std_best_energy = detail::parse_double_token(std::string_view(line).substr(c2 + 1),
                                                       line_no, "aggregate CSV");
        points.push_back(p);
    }
    if (!header_seen) {
        throw ParseError("aggregate CSV: missing header", line_no);
    }
    return points;
}

inline std::vector<AggregatePoint> read_aggregate_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("aggregate CSV: cannot open '" + path + "'", 0);
    }
    return read_aggregate_csv(in);
}

inline void write_mae_report_csv(std::ostream& out, const std::string& hash,
                                 const std::vector<MaeReportRow>& rows) {
    out << "# config_hash = " << hash << '\n';
    out << kMaeReportCsvHeader << '\n';
    for (const auto& row : rows) {
        out << row.target_n_observed << ',' << detail::format_double(row.mean_n_observed) << ','
            << detail::format_double(row.mean_mae_train) << ','
            << detail::format_double(row.mean_mae_test) << '\n';
    }
}

// Writes run_<i>.csv, aggregate.csv, mae_report.csv and the resolved config
// under config.out_dir. Returns the directory used.
inline std::filesystem::path write_experiment_outputs(const Workspace& ws,
                                                      const ExperimentResult& result) {
    namespace fs = std::filesystem;
    const fs::path dir(ws.config.out_dir);
    fs::create_directories(dir);
    for (std::size_t i = 0; i < result.runs.size(); ++i) {
        std::ofstream out(dir / ("run_" + std::to_string(i) + ".csv"));
        write_run_csv(out, result.config_hash, result.runs[i]);
    }
    if (!result.aggregate.empty()) {
        std::ofstream out(dir / "aggregate.csv");
        write_aggregate_csv(out, result.config_hash, result.aggregate);
    }
    if (!result.mae_report.empty()) {
        std::ofstream out(dir / "mae_report.csv");
        write_mae_report_csv(out, result.config_hash, result.mae_report);
    }
    {
        std::ofstream out(dir / "config.txt");
        out << "# config_hash = " << result.config_hash << '\n'
            << canonical_config_text(ws.config);
    }
    return dir;
}

// Minimal self-contained SVG line chart: mean best energy vs new
// calculations, with a shaded +-1 std band.
inline std::string render_aggregate_svg(const std::vector<AggregatePoint>& points,
                                        const std::string& title) {
    if (points.empty()) {
        throw std::invalid_argument("render_aggregate_svg: no points");
    }
    constexpr double width = 720.0, height = 480.0;
    constexpr double ml = 80.0, mr = 24.0, mt = 40.0, mb = 56.0;
    double x_min = points.front().n_new_calcs, x_max = points.back().n_new_calcs;
    double y_min = std::numeric_limits<double>::infinity(), y_max = -y_min;
    for (const auto& p : points) {
        y_min = std::min(y_min, p.mean_best_energy - p.std_best_energy);
        y_max = std::max(y_max, p.mean_best_energy + p.std_best_energy);
    }
    if (x_max == x_min) x_max = x_min + 1.0;
    if (y_max == y_min) y_max = y_min + 1.0;
    const double y_pad = 0.05 * (y_max - y_min);
    y_min -= y_pad;
    y_max += y_pad;
    const auto sx = [&](double x) { return ml + (x - x_min) / (x_max - x_min) * (width - ml - mr); };
    const auto sy = [&](double y) {
        return height - mb - (y - y_min) / (y_max - y_min) * (height - mt - mb);
    };
    const auto num = [](double v) {
        std::ostringstream s;
        s << v;
        return s.str();
    };

    std::ostringstream svg;
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
        << "' viewBox='0 0 " << width << ' ' << height << "'>\n";
    svg << "<rect width='100%' height='100%' fill='white'/>\n";
    svg << "<text x='" << width / 2 << "' y='" << mt - 16
        << "' text-anchor='middle' font-family='sans-serif' font-size='15'>" << title
        << "</text>\n";

    // std band
    svg << "<polygon fill='#9ecae1' fill-opacity='0.45' stroke='none' points='";
    for (const auto& p : points) {
        svg << num(sx(p.n_new_calcs)) << ',' << num(sy(p.mean_best_energy + p.std_best_energy))
            << ' ';
    }
    for (auto it = points.rbegin(); it != points.rend(); ++it) {
        svg << num(sx(it->n_new_calcs)) << ','
            << num(sy(it->mean_best_energy - it->std_best_energy)) << ' ';
    }
    svg << "'/>\n";

    // mean polyline
    svg << "<polyline fill='none' stroke='#08519c' stroke-width='2' points='";
    for (const auto& p : points) {
        svg << num(sx(p.n_new_calcs)) << ',' << num(sy(p.mean_best_energy)) << ' ';
    }
    svg << "'/>\n";

    // axes with 5 ticks each
    svg << "<line x1='" << ml << "' y1='" << height - mb << "' x2='" << width - mr << "' y2='"
        << height - mb << "' stroke='black'/>\n";
    svg << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << height - mb
        << "' stroke='black'/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double fx = x_min + (x_max - x_min) * t / 4.0;
        const double fy = y_min + (y_max - y_min) * t / 4.0;
        svg << "<line x1='" << num(sx(fx)) << "' y1='" << height - mb << "' x2='" << num(sx(fx))
            << "' y2='" << height - mb + 5 << "' stroke='black'/>\n";
        svg << "<text x='" << num(sx(fx)) << "' y='" << height - mb + 20
            << "' text-anchor='middle' font-family='sans-serif' font-size='11'>" << num(fx)
            << "</text>\n";
        svg << "<line x1='" << ml - 5 << "' y1='" << num(sy(fy)) << "' x2='" << ml << "' y2='"
            << num(sy(fy)) << "' stroke='black'/>\n";
        svg << "<text x='" << ml - 8 << "' y='" << num(sy(fy) + 4)
            << "' text-anchor='end' font-family='sans-serif' font-size='11'>" << num(fy)
            << "</text>\n";
    }
    svg << "<text x='" << (ml + width - mr) / 2 << "' y='" << height - 12
        << "' text-anchor='middle' font-family='sans-serif' font-size='13'>new calculations"
        << "</text>\n";
    svg << "<text x='18' y='" << (mt + height - mb) / 2
        << "' text-anchor='middle' font-family='sans-serif' font-size='13' transform='rotate(-90 "
        << "18 " << (mt + height - mb) / 2 << ")'>mean best energy (Hartree)</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

} // namespace qal
