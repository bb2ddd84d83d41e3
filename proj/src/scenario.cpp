#include "bms/scenario.hpp"

#include <algorithm>
#include <fstream>

#include "bms/errors.hpp"

namespace bms {

using nlohmann::json;

std::string scheme_name(SchemeKind kind) {
    switch (kind) {
    case SchemeKind::Pno: return "pno";
    case SchemeKind::Ppos: return "ppos";
    case SchemeKind::Pfos: return "pfos";
    case SchemeKind::Poi: return "poi";
    case SchemeKind::Debias: return "debias";
    }
    return "?";
}

SchemeKind parse_scheme_name(const std::string& name, const std::string& field) {
    for (auto k : {SchemeKind::Pno, SchemeKind::Ppos, SchemeKind::Pfos, SchemeKind::Poi,
                   SchemeKind::Debias}) {
        if (scheme_name(k) == name) return k;
    }
    throw ConfigError(field, "unknown scheme '" + name + "' (pno | ppos | pfos | poi | debias)");
}

bool ScenarioConfig::wants(SchemeKind kind) const {
    return std::find(schemes.begin(), schemes.end(), kind) != schemes.end();
}

const SchemeResult* ScenarioRun::find(SchemeKind kind) const {
    for (const auto& s : schemes) {
        if (s.kind == kind) return &s;
    }
    return nullptr;
}

namespace {

const json* member(const json& obj, const char* key) {
    auto it = obj.find(key);
    return it == obj.end() || it->is_null() ? nullptr : &*it;
}

double number(const json& v, const std::string& field) {
    if (!v.is_number()) throw ConfigError(field, "expected a number");
    return v.get<double>();
}

long integer(const json& v, const std::string& field) {
    if (!v.is_number_integer()) throw ConfigError(field, "expected an integer");
    return v.get<long>();
}

int small_integer(const json& v, const std::string& field) {
    const long x = integer(v, field);
    if (x < -1'000'000'000L || x > 1'000'000'000L) throw ConfigError(field, "out of range");
    return static_cast<int>(x);
}

const json& require(const json& obj, const char* key, const std::string& field) {
    const json* v = member(obj, key);
    if (!v) throw ConfigError(field, "missing");
    return *v;
}

Portfolio parse_portfolio(const json& doc, std::vector<std::string>& labels) {
    const json& classes = require(doc, "classes", "classes");
    if (!classes.is_array() || classes.empty()) {
        throw ConfigError("classes", "expected a non-empty array");
    }
    std::vector<RateClass> rates;
    for (std::size_t i = 0; i < classes.size(); ++i) {
        const std::string at = "classes[" + std::to_string(i) + "]";
        const json& c = classes[i];
        if (!c.is_object()) throw ConfigError(at, "expected an object");
        rates.push_back({number(require(c, "lambda", at + ".lambda"), at + ".lambda"),
                         number(require(c, "weight", at + ".weight"), at + ".weight")});
        if (const json* l = member(c, "label")) {
            if (!l->is_string()) throw ConfigError(at + ".label", "expected a string");
            labels.push_back(l->get<std::string>());
        } else {
            labels.push_back(std::to_string(i + 1));
        }
    }
    const double psi = number(require(doc, "psi", "psi"), "psi");
    return Portfolio(std::move(rates), ResidualLaw(psi));
}

TransitionRule parse_rule(const json& doc) {
    const json& r = require(doc, "rule", "rule");
    if (!r.is_object()) throw ConfigError("rule", "expected an object");
    return TransitionRule(small_integer(require(r, "levels", "rule.levels"), "rule.levels"),
                          small_integer(require(r, "penalty", "rule.penalty"), "rule.penalty"));
}

PfosOptions parse_pfos(const json& doc) {
    PfosOptions opt;
    const json* p = member(doc, "pfos");
    if (!p) return opt;
    if (!p->is_object()) throw ConfigError("pfos", "expected an object");
    if (const json* q = member(*p, "q")) {
        if (q->is_string()) {
            if (q->get<std::string>() != "ppos") {
                throw ConfigError("pfos.q", "expected a positive number or \"ppos\"");
            }
        } else {
            opt.q = number(*q, "pfos.q");
            if (!(*opt.q > 0.0)) throw ConfigError("pfos.q", "must be positive");
        }
    }
    if (const json* s = member(*p, "start")) {
        const std::string v = s->is_string() ? s->get<std::string>() : "";
        if (v == "pno") {
            opt.start = DescentStart::NoPosterior;
        } else if (v == "ppos") {
            opt.start = DescentStart::PartialOptimum;
        } else {
            throw ConfigError("pfos.start", "expected \"pno\" or \"ppos\"");
        }
    }
    if (const json* t = member(*p, "tolerance")) {
        opt.tolerance = number(*t, "pfos.tolerance");
        if (!(opt.tolerance > 0.0)) throw ConfigError("pfos.tolerance", "must be positive");
    }
    if (const json* m = member(*p, "max_cycles")) {
        opt.max_cycles = small_integer(*m, "pfos.max_cycles");
        if (opt.max_cycles < 1) throw ConfigError("pfos.max_cycles", "must be at least 1");
    }
    return opt;
}

std::optional<SimulationBlock> parse_simulation(const json& doc) {
    const json* s = member(doc, "simulation");
    if (!s) return std::nullopt;
    if (!s->is_object()) throw ConfigError("simulation", "expected an object");
    SimulationBlock block;
    SimConfig& c = block.config;
    if (const json* v = member(*s, "policyholders")) c.policyholders = integer(*v, "simulation.policyholders");
    if (const json* v = member(*s, "burn_in_years")) c.burn_in_years = small_integer(*v, "simulation.burn_in_years");
    if (const json* v = member(*s, "sample_years")) c.sample_years = small_integer(*v, "simulation.sample_years");
    if (const json* v = member(*s, "threads")) c.threads = small_integer(*v, "simulation.threads");
    if (const json* v = member(*s, "batches")) c.batches = small_integer(*v, "simulation.batches");
    if (const json* v = member(*s, "seed")) {
        const bool ok = v->is_number_unsigned() || (v->is_number_integer() && v->get<std::int64_t>() >= 0);
        if (!ok) throw ConfigError("simulation.seed", "expected a non-negative integer");
        c.seed = v->get<std::uint64_t>();
    }
    if (const json* v = member(*s, "starting_level")) {
        if (v->is_string() && *v == "best") {
            c.start.policy = StartingLevel::Policy::Best;
        } else if (v->is_string() && *v == "worst") {
            c.start.policy = StartingLevel::Policy::Worst;
        } else if (v->is_number_integer()) {
            c.start.policy = StartingLevel::Policy::Fixed;
            c.start.level = small_integer(*v, "simulation.starting_level");
        } else {
            throw ConfigError("simulation.starting_level", "expected \"best\", \"worst\" or a level");
        }
    }
    if (const json* v = member(*s, "scheme")) {
        if (!v->is_string()) throw ConfigError("simulation.scheme", "expected a scheme name");
        block.scheme = parse_scheme_name(v->get<std::string>(), "simulation.scheme");
    }
    c.validate();
    return block;
}

} // namespace

ScenarioConfig parse_scenario(const json& doc, const std::string& default_name) {
    if (!doc.is_object()) throw ConfigError("(root)", "expected a JSON object");

    std::string name = default_name;
    if (const json* n = member(doc, "name")) {
        if (!n->is_string()) throw ConfigError("name", "expected a string");
        name = n->get<std::string>();
    }
    std::vector<std::string> labels;
    Portfolio portfolio = parse_portfolio(doc, labels);
    TransitionRule rule = parse_rule(doc);

    std::vector<SchemeKind> schemes{SchemeKind::Pno, SchemeKind::Ppos, SchemeKind::Pfos,
                                    SchemeKind::Poi};
    if (const json* s = member(doc, "schemes")) {
        if (!s->is_array() || s->empty()) throw ConfigError("schemes", "expected a non-empty array");
        schemes.clear();
        for (std::size_t i = 0; i < s->size(); ++i) {
            const std::string at = "schemes[" + std::to_string(i) + "]";
            if (!(*s)[i].is_string()) throw ConfigError(at, "expected a scheme name");
            const SchemeKind k = parse_scheme_name((*s)[i].get<std::string>(), at);
            if (std::find(schemes.begin(), schemes.end(), k) != schemes.end()) {
                throw ConfigError(at, "duplicate scheme");
            }
            schemes.push_back(k);
        }
    }

    int nodes = kDefaultQuadratureNodes;
    if (const json* q = member(doc, "quadrature_nodes")) {
        nodes = small_integer(*q, "quadrature_nodes");
        if (nodes < 2) throw ConfigError("quadrature_nodes", "need at least 2 nodes");
    }

    std::string out = "out/" + name;
    if (const json* o = member(doc, "output_dir")) {
        if (!o->is_string()) throw ConfigError("output_dir", "expected a string");
        out = o->get<std::string>();
    }

    bool approximated = false;
    if (const json* a = member(doc, "weights_approximated")) {
        if (!a->is_boolean()) throw ConfigError("weights_approximated", "expected true or false");
        approximated = a->get<bool>();
    }

    return ScenarioConfig{std::move(name), std::move(portfolio), rule, std::move(schemes),
                          parse_pfos(doc), nodes, parse_simulation(doc), std::move(out),
                          std::move(labels), approximated};
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot read " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config", std::string("malformed JSON: ") + e.what());
    }
    return parse_scenario(doc, path.stem().string());
}

ScenarioRun run_scenario(const ScenarioConfig& config) {
    const Portfolio& pf = config.portfolio;
    const QuadratureRule quad = build_gamma_quadrature(pf.residual(), config.quadrature_nodes);
    MixedLevelMoments moments = mixed_level_moments(pf, config.rule, quad);
    LevelLaw law = level_law(moments, pf);

    ScenarioRun run{config, std::move(moments), std::move(law), {}, std::nullopt, std::nullopt,
                    std::nullopt, std::nullopt};
    const MixedLevelMoments& m = run.moments;

    auto add_shared = [&](SchemeKind kind, const SharedScheme& s) {
        run.schemes.push_back({kind, scheme_name(kind), s, s.expanded(), evaluate(s, m, pf)});
    };
    for (SchemeKind kind : config.schemes) {
        switch (kind) {
        case SchemeKind::Pno: add_shared(kind, pno(pf, config.rule.levels())); break;
        case SchemeKind::Ppos: add_shared(kind, ppos(m, pf)); break;
        case SchemeKind::Debias: add_shared(kind, debias_priori(ppos(m, pf).gamma(), pf, m)); break;
        case SchemeKind::Poi: {
            IndividualizedScheme s = poi(m, pf);
            SchemeMetrics metrics = evaluate(s, m, pf);
            run.schemes.push_back({kind, scheme_name(kind), std::nullopt, std::move(s), std::move(metrics)});
            break;
        }
        case SchemeKind::Pfos: {
            run.pfos = pfos(m, pf, config.pfos);
            add_shared(kind, run.pfos->scheme);
            run.pfos_pure = pure_relativity_view(run.pfos->scheme, pf);
            run.pfos_pure_metrics = evaluate(*run.pfos_pure, m, pf);
            break;
        }
        }
    }

    bool distinct = false;
    for (std::size_t k = 1; k < pf.size(); ++k) distinct |= pf.at(k).lambda != pf.at(0).lambda;
    if (distinct) run.alt_fairness = alt_fairness_measure(m, pf);
    return run;
}

} // namespace bms
