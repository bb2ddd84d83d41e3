#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const fs::path kCli = BMSRATE_PATH;
const fs::path kScenarios = SCENARIO_DIR;

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("bmsrate-test-" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

struct Outcome {
    int code;
    std::string err;
};

Outcome run(const std::string& args, const fs::path& dir) {
    const fs::path err = dir / "stderr.txt";
    const std::string cmd = "\"" + kCli.string() + "\" " + args + " >/dev/null 2>\"" + err.string() + "\"";
    const int status = std::system(cmd.c_str());
    std::ifstream in(err);
    std::stringstream s;
    s << in.rdbuf();
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, s.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path write_config(const fs::path& dir, const std::string& name, const nlohmann::json& doc) {
    const fs::path p = dir / name;
    std::ofstream(p) << doc.dump(2);
    return p;
}

nlohmann::json scenario_one() {
    std::ifstream in(kScenarios / "scenario-1.json");
    return nlohmann::json::parse(in);
}

} // namespace

TEST_CASE("run-scenario writes all report files") {
    const auto dir = scratch("run");
    const auto r = run("run-scenario \"" + (kScenarios / "scenario-1.json").string() + "\" --out \"" + dir.string() + "\"", dir);
    CHECK(r.code == 0);
    for (const char* f : {"relativities.csv", "priori.csv", "metrics.md", "report.json"}) CHECK(fs::exists(dir / f));
    const auto md = slurp(dir / "metrics.md");
    CHECK(md.find("| ppos |") != std::string::npos);
}

TEST_CASE("outputs are identical across runs") {
    const auto a = scratch("same-a"), b = scratch("same-b");
    const auto cfg = (kScenarios / "scenario-2.json").string();
    CHECK(run("run-scenario \"" + cfg + "\" --out \"" + a.string() + "\"", a).code == 0);
    CHECK(run("run-scenario \"" + cfg + "\" --out \"" + b.string() + "\"", b).code == 0);
    for (const char* f : {"relativities.csv", "priori.csv", "metrics.md", "report.json"}) {
        CHECK(slurp(a / f) == slurp(b / f));
    }
}

TEST_CASE("quadrature override") {
    const auto dir = scratch("nodes");
    const auto cfg = (kScenarios / "scenario-1.json").string();
    CHECK(run("run-scenario \"" + cfg + "\" --quadrature-nodes 32 --out \"" + dir.string() + "\"", dir).code == 0);
    const auto rep = nlohmann::json::parse(slurp(dir / "report.json"));
    CHECK(rep["quadrature_nodes"] == 32);
    CHECK(run("run-scenario \"" + cfg + "\" --quadrature-nodes 1 --out \"" + dir.string() + "\"", dir).code == 1);
}

TEST_CASE("configuration errors exit with 1 and name the field") {
    const auto dir = scratch("config");
    auto doc = scenario_one();
    for (auto& c : doc["classes"]) c["weight"] = 0.3;  // sums to 0.9
    auto r = run("run-scenario \"" + write_config(dir, "w.json", doc).string() + "\"", dir);
    CHECK(r.code == 1);
    CHECK(r.err.find("weight") != std::string::npos);

    doc = scenario_one();
    doc.erase("simulation");
    r = run("simulate \"" + write_config(dir, "s.json", doc).string() + "\" --out \"" + dir.string() + "\"", dir);
    CHECK(r.code == 1);
    CHECK(r.err.find("simulation") != std::string::npos);

    doc = scenario_one();
    doc["schemes"] = {"ppos"};
    r = run("trace \"" + write_config(dir, "t.json", doc).string() + "\" --out \"" + dir.string() + "\"", dir);
    CHECK(r.code == 1);
    CHECK(r.err.find("pfos") != std::string::npos);

    std::ofstream(dir / "broken.json") << "{ not json";
    CHECK(run("run-scenario \"" + (dir / "broken.json").string() + "\"", dir).code == 1);
    CHECK(run("run-scenario \"" + (dir / "absent.json").string() + "\"", dir).code == 1);
    CHECK(run("frobnicate", dir).code == 1);
}

TEST_CASE("numeric failures exit with 2 and print diagnostics") {
    const auto dir = scratch("numeric");
    auto doc = scenario_one();
    doc["pfos"]["max_cycles"] = 1;
    doc["pfos"]["tolerance"] = 1e-300;
    const auto r = run("run-scenario \"" + write_config(dir, "n.json", doc).string() + "\" --out \"" + dir.string() + "\"", dir);
    CHECK(r.code == 2);
    CHECK(r.err.find("did not reach") != std::string::npos);
    CHECK(r.err.find("HMSE") != std::string::npos);
}

TEST_CASE("trace writes one row per half-step") {
    const auto dir = scratch("trace");
    CHECK(run("trace \"" + (kScenarios / "scenario-1.json").string() + "\" --out \"" + dir.string() + "\"", dir).code == 0);
    const auto text = slurp(dir / "trace.csv");
    CHECK(text.find("\"(gamma^0, xi^0)\"") != std::string::npos);
    CHECK(text.find("\"(gamma^1, xi^0)\"") != std::string::npos);
    CHECK(text.find("\"(gamma^1, xi^1)\"") != std::string::npos);
}

TEST_CASE("simulate is reproducible for a fixed seed") {
    const auto a = scratch("sim-a"), b = scratch("sim-b");
    auto doc = scenario_one();
    doc["simulation"]["policyholders"] = 20000;
    const auto cfg = write_config(a, "c.json", doc).string();
    CHECK(run("simulate \"" + cfg + "\" --out \"" + a.string() + "\"", a).code == 0);
    CHECK(run("simulate \"" + cfg + "\" --out \"" + b.string() + "\"", b).code == 0);
    const auto ta = slurp(a / "sim-report.json");
    CHECK(!ta.empty());
    CHECK(ta == slurp(b / "sim-report.json"));
    const auto c = scratch("sim-c");
    CHECK(run("simulate \"" + cfg + "\" --seed 7 --out \"" + c.string() + "\"", c).code == 0);
    const auto rep = nlohmann::json::parse(slurp(c / "sim-report.json"));
    CHECK(rep["seed"] == 7);
    CHECK(slurp(c / "sim-report.json") != ta);
}

TEST_CASE("scenario I simulation: every level-law z-score below 4") {
    const auto dir = scratch("sim-z");
    CHECK(run("simulate \"" + (kScenarios / "scenario-1.json").string() + "\" --out \"" + dir.string() + "\"", dir).code == 0);
    const auto rep = nlohmann::json::parse(slurp(dir / "sim-report.json"));
    CHECK(rep["policyholders"] == 100000);
    for (const auto& row : rep["level_law"]) CHECK(std::abs(row["z"].get<double>()) < 4.0);
}
