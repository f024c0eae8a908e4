// Command-line front end: enumerate homotop spaces, generate synthetic
// energy tables, run full active-learning experiments from a config file,
// merge per-run CSVs, and plot aggregate curves as SVG.

#include <algorithm>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qal/config.hpp"
#include "qal/driver.hpp"
#include "qal/geometry.hpp"
#include "qal/oracle.hpp"
#include "qal/space.hpp"

namespace {

int cmd_enumerate(int n_sites, int n_dopants) {
    for (const auto& h : qal::enumerate_homotops(n_sites, n_dopants)) {
        std::cout << h.id() << '\n';
    }
    return 0;
}

int cmd_gen_table(const std::string& geometry_path, int n_dopants,
                  const std::string& dopant_element, const qal::ToyParams& toy,
                  const std::string& output) {
    const qal::CandidateSpace space =
        qal::CandidateSpace::build(qal::read_xyz(geometry_path), n_dopants, dopant_element);
    const qal::ToyOracle oracle(toy);
    std::vector<qal::EnergyRecord> records;
    records.reserve(space.homotops.size());
    const qal::EnergyRecord* best = nullptr;
    for (const auto& h : space.homotops) {
        records.push_back({h.id(), oracle.evaluate(space, h)});
        if (!best || records.back().energy_hartree < best->energy_hartree) {
            best = &records.back();
        }
    }
    qal::write_energy_table(output, records);
    std::cout << "wrote " << records.size() << " records to " << output << '\n';
    if (best) {
        std::cout << "global minimum: " << best->homotop_id << " at " << best->energy_hartree
                  << " Hartree\n";
    }
    return 0;
}

int cmd_run(const std::string& config_path) {
    const qal::AlConfig config = qal::parse_config_file(config_path);
    std::cout << "preparing candidate space and features...\n";
    const qal::Workspace ws = qal::Workspace::prepare(config);
    std::cout << "config hash " << ws.hash << ", " << ws.total() << " homotops, "
              << (ws.classical() ? "classical" : "quantum") << " kernel\n";
    if (ws.scaler.any_constant()) {
        std::cerr << "warning: at least one PCA feature is constant over the candidate space\n";
    }
    const qal::ExperimentResult result = qal::run_experiment(ws);
    const auto dir = qal::write_experiment_outputs(ws, result);

    int failures = 0;
    for (std::size_t i = 0; i < result.runs.size(); ++i) {
        const auto& run = result.runs[i];
        std::cout << "run " << i << " (seed " << run.seed << "): " << run.history.size()
                  << " cycles";
        if (!run.history.empty()) {
            std::cout << ", best " << run.history.back().best_energy << " Hartree";
        }
        if (run.failure) {
            std::cout << " [FAILED: " << *run.failure << ']';
            ++failures;
        }
        std::cout << '\n';
    }
    if (!result.aggregate.empty()) {
        const auto& last = result.aggregate.back();
        std::cout << "aggregate at " << last.n_new_calcs << " new calcs: mean best "
                  << last.mean_best_energy << " +- " << last.std_best_energy << " Hartree\n";
    }
    std::cout << "outputs in " << dir.string() << '\n';
    if (failures > 0) {
        std::cerr << failures << " of " << result.runs.size() << " runs failed\n";
        return 1;
    }
    return 0;
}

int cmd_aggregate(const std::vector<std::string>& run_csvs, const std::string& output) {
    std::vector<std::vector<qal::CycleRecord>> histories;
    std::string hash;
    for (const auto& path : run_csvs) {
        qal::RunCsv csv = qal::read_run_csv(path);
        if (hash.empty()) {
            hash = csv.config_hash;
        } else if (!csv.config_hash.empty() && csv.config_hash != hash) {
            std::cerr << "warning: " << path << " has config hash " << csv.config_hash
                      << ", expected " << hash << '\n';
        }
        if (csv.records.empty()) {
            std::cerr << "warning: " << path << " has no cycles, skipping\n";
            continue;
        }
        histories.push_back(std::move(csv.records));
    }
    const auto points = qal::aggregate_runs(histories);
    std::ofstream out(output);
    if (!out) {
        throw std::runtime_error("cannot write '" + output + "'");
    }
    qal::write_aggregate_csv(out, hash, points);
    std::cout << "aggregated " << histories.size() << " runs into " << output << '\n';
    return 0;
}

int cmd_plot(const std::string& input, const std::string& output, const std::string& title) {
    const auto points = qal::read_aggregate_csv(input);
    std::ofstream out(output);
    if (!out) {
        throw std::runtime_error("cannot write '" + output + "'");
    }
    out << qal::render_aggregate_svg(points, title);
    std::cout << "wrote " << output << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"active-learning search over doped-cluster homotop spaces"};
    app.require_subcommand(1);

    auto* enumerate = app.add_subcommand("enumerate", "print all homotop ids of a space");
    int n_sites = 0, n_dopants = 0;
    enumerate->add_option("--n-sites", n_sites, "number of host sites")->required();
    enumerate->add_option("--n-dopants", n_dopants, "number of dopant atoms")->required();

    auto* gen_table = app.add_subcommand("gen-table",
                                         "evaluate the toy oracle over a whole space "
                                         "and write an energy table CSV");
    std::string geometry_path, dopant_element = "Al", table_output;
    int table_dopants = 4;
    qal::ToyParams toy;
    gen_table->add_option("--geometry", geometry_path, "host geometry XYZ file")->required();
    gen_table->add_option("--n-dopants", table_dopants, "number of dopant atoms");
    gen_table->add_option("--dopant-element", dopant_element, "dopant element symbol");
    gen_table->add_option("--j-sisi", toy.j_sisi, "host-host coupling (Hartree)");
    gen_table->add_option("--j-sial", toy.j_sial, "host-dopant coupling (Hartree)");
    gen_table->add_option("--j-alal", toy.j_alal, "dopant-dopant coupling (Hartree)");
    gen_table->add_option("--rho", toy.rho, "decay length (Angstrom)");
    gen_table->add_option("--output", table_output, "energy table CSV to write")->required();

    auto* run = app.add_subcommand("run", "run a full experiment from a config file");
    std::string config_path;
    run->add_option("config", config_path, "key = value config file")->required();

    auto* aggregate = app.add_subcommand("aggregate", "merge per-run CSVs into an aggregate CSV");
    std::vector<std::string> run_csvs;
    std::string aggregate_output;
    aggregate->add_option("csvs", run_csvs, "per-run CSV files")->required()->expected(-1);
    aggregate->add_option("--output", aggregate_output, "aggregate CSV to write")->required();

    auto* plot = app.add_subcommand("plot", "render an aggregate CSV as an SVG line chart");
    std::string plot_input, plot_output, plot_title = "mean best energy vs new calculations";
    plot->add_option("--input", plot_input, "aggregate CSV")->required();
    plot->add_option("--output", plot_output, "SVG file to write")->required();
    plot->add_option("--title", plot_title, "chart title");

    CLI11_PARSE(app, argc, argv);

    try {
        if (enumerate->parsed()) return cmd_enumerate(n_sites, n_dopants);
        if (gen_table->parsed()) {
            return cmd_gen_table(geometry_path, table_dopants, dopant_element, toy, table_output);
        }
        if (run->parsed()) return cmd_run(config_path);
        if (aggregate->parsed()) return cmd_aggregate(run_csvs, aggregate_output);
        if (plot->parsed()) return cmd_plot(plot_input, plot_output, plot_title);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
