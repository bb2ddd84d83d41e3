// bmsrate: run bonus-malus scenarios, trace the full optimisation, and check
// the analytic results against simulation.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "bms/errors.hpp"
#include "bms/report.hpp"
#include "bms/scenario.hpp"
#include "bms/simulation.hpp"

namespace {

struct Options {
    std::string config;
    std::string out;
    std::optional<int> nodes;
    std::optional<std::uint64_t> seed;
};

bms::ScenarioConfig load(const Options& o) {
    bms::ScenarioConfig cfg = bms::load_scenario(o.config);
    if (o.nodes) {
        if (*o.nodes < 2) throw bms::ConfigError("quadrature_nodes", "need at least 2 nodes");
        cfg.quadrature_nodes = *o.nodes;
    }
    if (!o.out.empty()) cfg.output_dir = o.out;
    return cfg;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << text;
}

int run_scenario_cmd(const Options& o) {
    const auto run = bms::run_scenario(load(o));
    bms::write_scenario_outputs(run, run.config.output_dir);
    std::cout << "wrote relativities.csv, priori.csv, metrics.md, report.json to "
              << run.config.output_dir << '\n';
    return 0;
}

int trace_cmd(const Options& o) {
    bms::ScenarioConfig cfg = load(o);
    if (!cfg.wants(bms::SchemeKind::Pfos)) {
        throw bms::ConfigError("schemes", "trace needs \"pfos\" in the scheme list");
    }
    cfg.schemes = {bms::SchemeKind::Pfos};
    const auto run = bms::run_scenario(cfg);
    std::ostringstream csv;
    bms::write_trace_csv(csv, run.pfos->trace);
    const auto path = std::filesystem::path(cfg.output_dir) / "trace.csv";
    write_file(path, csv.str());
    for (const auto& step : run.pfos->trace) {
        std::cout << step.label() << "  FIX " << step.fix.value_or(0.0) << "  HMSE " << step.hmse
                  << '\n';
    }
    std::cout << "wrote " << path.string() << '\n';
    return 0;
}

int simulate_cmd(const Options& o) {
    bms::ScenarioConfig cfg = load(o);
    if (!cfg.simulation) throw bms::ConfigError("simulation", "config has no simulation block");
    if (o.seed) cfg.simulation->config.seed = *o.seed;
    if (!cfg.wants(cfg.simulation->scheme)) cfg.schemes.push_back(cfg.simulation->scheme);
    const auto run = bms::run_scenario(cfg);
    const bms::SchemeResult* s = run.find(cfg.simulation->scheme);
    const auto sim = bms::simulate(cfg.portfolio, cfg.rule, s->table, cfg.simulation->config);
    const auto report = bms::simulation_report(run, *cfg.simulation, sim);
    const auto path = std::filesystem::path(cfg.output_dir) / "sim-report.json";
    write_file(path, report.dump(2) + "\n");
    std::cout << "max |z| = " << report["max_abs_z"].get<double>() << "\nwrote " << path.string()
              << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bonus-malus premium schemes: relativities, fairness and prediction error"};
    app.require_subcommand(1);
    Options opt;
    auto add = [&](const char* name, const char* help) {
        CLI::App* c = app.add_subcommand(name, help);
        c->add_option("config", opt.config, "Scenario JSON file")->required();
        c->add_option("--out", opt.out, "Output directory (overrides output_dir)");
        c->add_option("--quadrature-nodes", opt.nodes, "Gauss-Laguerre nodes");
        c->add_option("--seed", opt.seed, "Simulation seed (overrides the config)");
        return c;
    };
    auto* run_cmd = add("run-scenario", "Compute schemes and metrics, write the report tables");
    auto* trace = add("trace", "Write the coordinate-descent trace of the full optimisation");
    auto* sim = add("simulate", "Compare analytic values with a Monte-Carlo portfolio");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (run_cmd->parsed()) return run_scenario_cmd(opt);
        if (trace->parsed()) return trace_cmd(opt);
        if (sim->parsed()) return simulate_cmd(opt);
    } catch (const bms::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const bms::NonConvergenceError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        const auto& t = e.trace();
        if (!t.empty()) {
            std::cerr << "  last step " << t.back().label() << " HMSE " << t.back().hmse << '\n';
        }
        return 2;
    } catch (const bms::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
