#pragma once

// Output files for a scenario run: relativity and a-priori rate tables (CSV),
// a markdown summary, JSON reports, the descent trace, and a CSV reader for
// reloading any of them.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bms/scenario.hpp"
#include "bms/simulation.hpp"

namespace bms {

// CSV numbers carry 12 significant digits.
constexpr int kCsvDigits = 12;

std::string csv_number(double x);

// (x_i - x_{i-1}) / max_j x_j for i >= 1; the first entry has no change.
std::vector<std::optional<double>> sequential_changes(const std::vector<double>& values);

void write_relativities_csv(std::ostream& out, const ScenarioRun& run);
void write_priori_csv(std::ostream& out, const ScenarioRun& run);
void write_metrics_md(std::ostream& out, const ScenarioRun& run);
void write_trace_csv(std::ostream& out, const DescentTrace& trace);

nlohmann::json report_json(const ScenarioRun& run);

// Analytic values of `run` against the Monte-Carlo estimates in `sim`.
nlohmann::json simulation_report(const ScenarioRun& run, const SimulationBlock& block,
                                 const SimResult& sim);

// relativities.csv, priori.csv, metrics.md and report.json under `dir`.
void write_scenario_outputs(const ScenarioRun& run, const std::filesystem::path& dir);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const;
    double number(std::size_t row, std::size_t col) const;
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv(const std::filesystem::path& path);

} // namespace bms
