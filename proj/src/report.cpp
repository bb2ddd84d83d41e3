#include "bms/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "bms/errors.hpp"

namespace bms {

using nlohmann::json;

std::string csv_number(double x) {
    std::ostringstream s;
    s << std::setprecision(kCsvDigits) << x;
    return s.str();
}

std::vector<std::optional<double>> sequential_changes(const std::vector<double>& values) {
    std::vector<std::optional<double>> out(values.size());
    if (values.empty()) return out;
    const double top = *std::max_element(values.begin(), values.end());
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (top > 0.0) out[i] = (values[i] - values[i - 1]) / top;
    }
    return out;
}

namespace {

std::string fixed(double x, int decimals) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(decimals) << x;
    std::string r = s.str();
    if (r.find_first_not_of("-0.") == std::string::npos && r[0] == '-') r.erase(0, 1);
    return r;
}

template <class Vec>
void csv_row(std::ostream& out, const std::string& a, const std::string& b, const Vec& v) {
    out << a << ',' << b;
    for (Eigen::Index i = 0; i < v.size(); ++i) out << ',' << csv_number(v(i));
    out << '\n';
}

template <class Vec>
json to_array(const Vec& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

json to_rows(const Eigen::MatrixXd& m) {
    json a = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(to_array(m.row(r)));
    return a;
}

json optional_number(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

json metrics_json(const SchemeMetrics& m) {
    return {{"fix", optional_number(m.fix)},
            {"hmse", m.hmse},
            {"variance_between", m.split.between},
            {"variance_within", m.split.within},
            {"relativity_means", to_array(m.relativity_means)},
            {"pure_relativity_means", to_array(m.pure_relativity_means)},
            {"premium_means", to_array(m.premium_means)}};
}

bool in_chain(SchemeKind k) { return k != SchemeKind::Debias; }

std::string percent(const std::optional<double>& x) {
    return x ? fixed(100.0 * *x, 1) + "%" : "-";
}

json compare(double analytic, const Estimate& e) {
    return {{"analytic", analytic},
            {"empirical", e.value},
            {"std_error", e.std_error},
            {"z", e.z_score(analytic)}};
}

} // namespace

void write_relativities_csv(std::ostream& out, const ScenarioRun& run) {
    const auto& labels = run.config.class_labels;
    out << "scheme,class";
    for (int l = 1; l <= run.config.rule.levels(); ++l) out << ",l" << l;
    out << '\n';
    for (const auto& s : run.schemes) {
        if (s.shared) {
            csv_row(out, s.label, "", s.shared->gamma());
        } else {
            for (int k = 0; k < s.table.classes(); ++k) {
                csv_row(out, s.label, labels[k], s.table.gamma().row(k));
            }
        }
        if (s.kind == SchemeKind::Pfos && run.pfos_pure) {
            for (int k = 0; k < run.pfos_pure->classes(); ++k) {
                csv_row(out, "pfos_pure", labels[k], run.pfos_pure->gamma().row(k));
            }
        }
    }
    csv_row(out, "level_law", "", run.law.marginal);
}

void write_priori_csv(std::ostream& out, const ScenarioRun& run) {
    out << "scheme";
    for (const auto& label : run.config.class_labels) out << ',' << label;
    out << '\n';
    for (const auto& s : run.schemes) {
        out << s.label;
        for (int k = 0; k < s.table.classes(); ++k) out << ',' << csv_number(s.table.xi()(k));
        out << '\n';
        if (s.kind == SchemeKind::Pfos && run.pfos_pure) {
            out << "pfos_pure";
            for (int k = 0; k < run.pfos_pure->classes(); ++k) {
                out << ',' << csv_number(run.pfos_pure->xi()(k));
            }
            out << '\n';
        }
    }
}

void write_metrics_md(std::ostream& out, const ScenarioRun& run) {
    const auto& cfg = run.config;
    out << "# " << cfg.name << "\n\n";
    out << "-1/+" << cfg.rule.penalty() << " rule on " << cfg.rule.levels() << " levels, "
        << cfg.portfolio.size() << " classes, psi = " << cfg.portfolio.residual().dispersion()
        << ", " << cfg.quadrature_nodes << " quadrature nodes.\n\n";
    if (cfg.weights_approximated) {
        out << "**Weights approximated**: class weights are products of marginal proportions, "
               "so FIX and HMSE here are indicative only.\n\n";
    }

    std::vector<double> fix_chain, hmse_chain;
    for (const auto& s : run.schemes) {
        if (!in_chain(s.kind)) continue;
        fix_chain.push_back(s.metrics.fix.value_or(0.0));
        hmse_chain.push_back(s.metrics.hmse);
    }
    const auto dfix = sequential_changes(fix_chain);
    const auto dhmse = sequential_changes(hmse_chain);

    out << "| Method |";
    for (const auto& label : cfg.class_labels) out << " E[gamma \\| " << label << "] |";
    out << " FIX | dFIX | dFIX raw | HMSE | dHMSE | dHMSE raw |\n|---|";
    for (std::size_t k = 0; k < cfg.class_labels.size(); ++k) out << "---:|";
    out << "---:|---:|---:|---:|---:|---:|\n";

    bool undefined_fix = false;
    auto row = [&](const std::string& name, const SchemeMetrics& m, const std::string& df,
                   const std::string& dh, const std::string& df_raw, const std::string& dh_raw) {
        out << "| " << name << " |";
        for (Eigen::Index k = 0; k < m.relativity_means.size(); ++k) {
            out << ' ' << fixed(m.relativity_means(k), 3) << " |";
        }
        std::string f = fixed(m.fix.value_or(0.0), 4);
        if (!m.fix) {
            f += "*";
            undefined_fix = true;
        }
        out << ' ' << f << " | " << df << " | " << df_raw << " | " << fixed(m.hmse, 4) << " | " << dh
            << " | " << dh_raw << " |\n";
    };

    std::size_t pos = 0;
    for (const auto& s : run.schemes) {
        std::string df = "-", dh = "-", df_raw = "-", dh_raw = "-";
        if (in_chain(s.kind)) {
            df = percent(dfix[pos]);
            dh = percent(dhmse[pos]);
            if (pos > 0) {
                df_raw = fixed(fix_chain[pos] - fix_chain[pos - 1], 4);
                dh_raw = fixed(hmse_chain[pos] - hmse_chain[pos - 1], 4);
            }
            ++pos;
        }
        row(s.label, s.metrics, df, dh, df_raw, dh_raw);
        if (s.kind == SchemeKind::Pfos && run.pfos_pure_metrics) {
            row("pfos (pure view)", *run.pfos_pure_metrics, "-", "-", "-", "-");
        }
    }
    out << '\n';
    if (undefined_fix) {
        out << "\\* The pure relativity has no variance, so FIX is undefined; shown as 0.\n\n";
    }
    out << "dFIX and dHMSE: change from the previous row of the pno, ppos, pfos, poi sequence, "
           "divided by the largest value in that sequence. The raw columns give the plain "
           "difference.\n\n";
    if (run.alt_fairness) {
        out << "Alternative fairness Var(E[Lambda | L]) / Var(Lambda): "
            << fixed(*run.alt_fairness, 4) << "\n\n";
    }
    if (run.pfos) {
        out << "pfos: " << run.pfos->cycles << " descent cycles, gamma(" << cfg.rule.midpoint_level()
            << ") = " << fixed(run.pfos->q, 4) << "\n\n";
    }
    out << "| P(L = l) |";
    for (int l = 1; l <= cfg.rule.levels(); ++l) out << ' ' << l << " |";
    out << "\n|---|";
    for (int l = 1; l <= cfg.rule.levels(); ++l) out << "---:|";
    out << "\n| |";
    for (int l = 0; l < cfg.rule.levels(); ++l) out << ' ' << fixed(run.law.marginal(l), 3) << " |";
    out << '\n';
}

void write_trace_csv(std::ostream& out, const DescentTrace& trace) {
    if (trace.empty()) return;
    const auto classes = trace.front().xi.size();
    const auto levels = trace.front().gamma.size();
    out << "step,label,gamma_iter,xi_iter,fix,fix_defined,hmse";
    for (Eigen::Index k = 1; k <= classes; ++k) out << ",xi" << k;
    for (Eigen::Index l = 1; l <= levels; ++l) out << ",gamma" << l;
    out << '\n';
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const auto& t = trace[i];
        out << i << ",\"" << t.label() << "\"," << t.gamma_iter << ',' << t.xi_iter << ','
            << csv_number(t.fix.value_or(0.0)) << ',' << (t.fix ? 1 : 0) << ','
            << csv_number(t.hmse);
        for (Eigen::Index k = 0; k < classes; ++k) out << ',' << csv_number(t.xi(k));
        for (Eigen::Index l = 0; l < levels; ++l) out << ',' << csv_number(t.gamma(l));
        out << '\n';
    }
}

json report_json(const ScenarioRun& run) {
    const auto& cfg = run.config;
    json classes = json::array();
    for (std::size_t k = 0; k < cfg.portfolio.size(); ++k) {
        classes.push_back({{"label", cfg.class_labels[k]},
                           {"lambda", cfg.portfolio.at(k).lambda},
                           {"weight", cfg.portfolio.at(k).weight}});
    }
    json schemes = json::object();
    for (const auto& s : run.schemes) {
        json j = metrics_json(s.metrics);
        j["xi"] = to_array(s.table.xi());
        j["gamma"] = s.shared ? to_array(s.shared->gamma()) : to_rows(s.table.gamma());
        if (s.kind == SchemeKind::Pfos && run.pfos) {
            j["cycles"] = run.pfos->cycles;
            j["q"] = run.pfos->q;
            json pure = metrics_json(*run.pfos_pure_metrics);
            pure["xi"] = to_array(run.pfos_pure->xi());
            pure["gamma"] = to_rows(run.pfos_pure->gamma());
            j["pure_view"] = std::move(pure);
        }
        schemes[s.label] = std::move(j);
    }
    return {{"name", cfg.name},
            {"weights_approximated", cfg.weights_approximated},
            {"psi", cfg.portfolio.residual().dispersion()},
            {"rule", {{"levels", cfg.rule.levels()}, {"penalty", cfg.rule.penalty()}}},
            {"quadrature_nodes", cfg.quadrature_nodes},
            {"classes", std::move(classes)},
            {"level_law", to_array(run.law.marginal)},
            {"level_law_by_class", to_rows(run.law.conditional)},
            {"schemes", std::move(schemes)},
            {"alt_fairness", optional_number(run.alt_fairness)}};
}

json simulation_report(const ScenarioRun& run, const SimulationBlock& block, const SimResult& sim) {
    const SchemeResult* s = run.find(block.scheme);
    if (!s) throw std::invalid_argument("simulated scheme missing from the analytic run");
    const SimConfig& c = block.config;
    double worst = 0.0;
    auto track = [&](json j) {
        worst = std::max(worst, std::abs(j["z"].get<double>()));
        return j;
    };

    json law = json::array();
    for (int l = 0; l < run.config.rule.levels(); ++l) {
        json j = track(compare(run.law.marginal(l), {sim.level_law(l), sim.level_law_se(l)}));
        j["level"] = l + 1;
        law.push_back(std::move(j));
    }
    json rel = json::array(), pure = json::array();
    for (int k = 0; k < s->table.classes(); ++k) {
        json a = track(compare(s->metrics.relativity_means(k), sim.relativity_means[k]));
        json b = track(compare(s->metrics.pure_relativity_means(k), sim.pure_relativity_means[k]));
        a["class"] = b["class"] = run.config.class_labels[k];
        a["policyholders"] = b["policyholders"] = sim.class_counts[k];
        rel.push_back(std::move(a));
        pure.push_back(std::move(b));
    }

    std::string start = "best";
    if (c.start.policy == StartingLevel::Policy::Worst) start = "worst";
    if (c.start.policy == StartingLevel::Policy::Fixed) start = std::to_string(c.start.level);

    json out = {{"name", run.config.name},
                {"scheme", s->label},
                {"seed", c.seed},
                {"policyholders", c.policyholders},
                {"burn_in_years", c.burn_in_years},
                {"sample_years", c.sample_years},
                {"starting_level", start},
                {"batches", c.batches},
                {"level_law", std::move(law)},
                {"relativity_means", std::move(rel)},
                {"pure_relativity_means", std::move(pure)},
                {"fix", track(compare(s->metrics.fix.value_or(0.0), sim.fix))},
                {"hmse", track(compare(s->metrics.hmse, sim.hmse))}};
    if (run.alt_fairness) out["alt_fairness"] = track(compare(*run.alt_fairness, sim.alt_fairness));
    out["max_abs_z"] = worst;
    return out;
}

void write_scenario_outputs(const ScenarioRun& run, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto open = [&](const char* name) {
        std::ofstream f(dir / name);
        if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
        return f;
    };
    {
        auto f = open("relativities.csv");
        write_relativities_csv(f, run);
    }
    {
        auto f = open("priori.csv");
        write_priori_csv(f, run);
    }
    {
        auto f = open("metrics.md");
        write_metrics_md(f, run);
    }
    {
        auto f = open("report.json");
        f << report_json(run).dump(2) << '\n';
    }
}

std::size_t CsvTable::column(const std::string& name) const {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw std::out_of_range("no CSV column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
}

double CsvTable::number(std::size_t row, std::size_t col) const {
    const std::string& cell = rows.at(row).at(col);
    std::size_t used = 0;
    const double x = std::stod(cell, &used);
    if (used != cell.size()) throw std::invalid_argument("not a number: '" + cell + "'");
    return x;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cells.back() += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cells.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.emplace_back();
        } else if (c != '\r') {
            cells.back() += c;
        }
    }
    return cells;
}

} // namespace

CsvTable read_csv(std::istream& in) {
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) return t;
    t.header = split_csv_line(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != t.header.size()) {
            throw std::invalid_argument("CSV row has " + std::to_string(cells.size()) +
                                        " cells, header has " + std::to_string(t.header.size()));
        }
        t.rows.push_back(std::move(cells));
    }
    return t;
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    return read_csv(in);
}

} // namespace bms
