#pragma once

// JSON scenario configuration and the analytic pipeline that runs it.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bms/frequency_model.hpp"
#include "bms/markov_chain.hpp"
#include "bms/metrics.hpp"
#include "bms/premium_schemes.hpp"
#include "bms/simulation.hpp"

namespace bms {

enum class SchemeKind { Pno, Ppos, Pfos, Poi, Debias };

std::string scheme_name(SchemeKind kind);
SchemeKind parse_scheme_name(const std::string& name, const std::string& field);

struct SimulationBlock {
    SimConfig config;
    SchemeKind scheme = SchemeKind::Ppos;
};

struct ScenarioConfig {
    std::string name;
    Portfolio portfolio;
    TransitionRule rule;
    std::vector<SchemeKind> schemes;
    PfosOptions pfos;  // pfos.q unset: use the PPOS relativity at floor(z/2)
    int quadrature_nodes = kDefaultQuadratureNodes;
    std::optional<SimulationBlock> simulation;
    std::string output_dir;
    std::vector<std::string> class_labels;
    bool weights_approximated = false;

    bool wants(SchemeKind kind) const;
};

// Throws ConfigError naming the offending key.
ScenarioConfig parse_scenario(const nlohmann::json& doc, const std::string& default_name = "scenario");
ScenarioConfig load_scenario(const std::filesystem::path& path);

struct SchemeResult {
    SchemeKind kind;
    std::string label;
    std::optional<SharedScheme> shared;
    IndividualizedScheme table;
    SchemeMetrics metrics;
};

struct ScenarioRun {
    ScenarioConfig config;
    MixedLevelMoments moments;
    LevelLaw law;
    std::vector<SchemeResult> schemes;
    std::optional<PfosResult> pfos;
    std::optional<IndividualizedScheme> pfos_pure;  // pure-relativity view of PFOS
    std::optional<SchemeMetrics> pfos_pure_metrics;
    std::optional<double> alt_fairness;

    const SchemeResult* find(SchemeKind kind) const;
};

ScenarioRun run_scenario(const ScenarioConfig& config);

} // namespace bms
