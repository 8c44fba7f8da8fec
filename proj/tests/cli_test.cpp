#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "nucleon/cli.hpp"
#include "nucleon/io.hpp"

using namespace nucleon;
namespace fs = std::filesystem;
using io::json;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "nucleon");
    std::vector<const char*> argv;
    for (const std::string& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("nucleon_cli_test_" + std::to_string(::getpid())) / name;
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

json diagnostic_of(const Run& r) {
    REQUIRE(!r.err.empty());
    return json::parse(r.err.substr(0, r.err.find('\n')));
}

}  // namespace

TEST_CASE("number formatting and hashing") {
    CHECK(io::format_number(1.0) == "1.0000000000000000e+00");
    CHECK(io::format_number(-0.125) == "-1.2500000000000000e-01");
    CHECK(io::format_number(std::nan("")) == "nan");
    CHECK(io::format_number(-INFINITY) == "-inf");
    CHECK(io::fnv1a("") == 0xcbf29ce484222325ULL);
    CHECK(io::fnv1a("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(io::fnv1a("foobar") == 0x85944171f73967e8ULL);
    CHECK(io::config_hash(json{{"b", 1}, {"a", 2}}) == io::config_hash(json{{"a", 2}, {"b", 1}}));
    CHECK(io::config_hash(json{{"a", 2}}).size() == 16);
}

TEST_CASE("help and parse errors") {
    CHECK(run({"--help"}).code == kExitOk);
    CHECK(run({}).code == kExitValidation);
    const Run bad = run({"shoot", "--no-such-flag", "1"});
    CHECK(bad.code == kExitValidation);
    CHECK(diagnostic_of(bad)["kind"] == "validation");
    CHECK(run({"frobnicate"}).code == kExitValidation);
    CHECK(run({"shoot", "--a", "four", "--out", scratch_dir("nan_flag").string()}).code == kExitValidation);
    CHECK(run({"shoot", "--d", "2.5", "--out", scratch_dir("frac_d").string()}).code == kExitValidation);
}

TEST_CASE("shoot artifacts and manifest") {
    const fs::path dir = scratch_dir("shoot");
    const Run r = run({"shoot", "--y", "1.2", "--out", dir.string()});
    REQUIRE(r.code == kExitOk);
    CHECK(r.err.empty());
    const std::string csv = slurp(dir / "trajectory.csv");
    std::istringstream lines(csv);
    std::string header, first;
    std::getline(lines, header);
    std::getline(lines, first);
    CHECK(header == "r,u,du,H");
    const std::regex num("-?[0-9]\\.[0-9]{16}e[+-][0-9]{2}");
    std::istringstream cells(first);
    std::string cell;
    int count = 0;
    while (std::getline(cells, cell, ',')) {
        CHECK(std::regex_match(cell, num));
        ++count;
    }
    CHECK(count == 4);

    const json m = read_json(dir / "manifest.json");
    CHECK(m["command"] == "shoot");
    CHECK(m["config"]["y"] == 1.2);
    CHECK_FALSE(m["config"].contains("output_dir"));
    CHECK(m["config_hash"] == io::config_hash(m["config"]));
    CHECK(m["wall_time_s"].get<double>() >= 0.0);
    CHECK(m["artifacts"].size() == 2);
    for (const json& a : m["artifacts"]) {
        CHECK(a["config_hash"] == m["config_hash"]);
        CHECK(fs::exists(dir / a["path"].get<std::string>()));
    }
    CHECK(read_json(dir / "shot.json")["config_hash"] == m["config_hash"]);
}

TEST_CASE("runs are deterministic") {
    for (const char* cmd : {"shoot", "ground-state"}) {
        const fs::path d1 = scratch_dir(std::string(cmd) + "_1"), d2 = scratch_dir(std::string(cmd) + "_2");
        REQUIRE(run({cmd, "--out", d1.string()}).code == kExitOk);
        REQUIRE(run({cmd, "--out", d2.string()}).code == kExitOk);
        for (const auto& entry : fs::directory_iterator(d1)) {
            if (entry.path().filename() == "manifest.json") continue;
            CHECK(slurp(entry.path()) == slurp(d2 / entry.path().filename()));
        }
        CHECK(read_json(d1 / "manifest.json")["config_hash"] == read_json(d2 / "manifest.json")["config_hash"]);
    }
}

TEST_CASE("output directory precedence") {
    const fs::path from_file = scratch_dir("prec_file"), from_env = scratch_dir("prec_env"),
                   from_flag = scratch_dir("prec_flag");
    const fs::path cfg = scratch_dir("prec_cfg");
    fs::create_directories(cfg);
    std::ofstream(cfg / "c.json") << json{{"y", 0.7}, {"output_dir", from_file.string()}}.dump();
    const std::string cfg_path = (cfg / "c.json").string();

    ::setenv("NUCLEON_NLS_OUT", from_env.string().c_str(), 1);
    REQUIRE(run({"shoot", "--config", cfg_path, "--out", from_flag.string()}).code == kExitOk);
    CHECK(fs::exists(from_flag / "manifest.json"));
    CHECK_FALSE(fs::exists(from_env));
    REQUIRE(run({"shoot", "--config", cfg_path}).code == kExitOk);
    CHECK(fs::exists(from_env / "manifest.json"));
    CHECK_FALSE(fs::exists(from_file));
    ::unsetenv("NUCLEON_NLS_OUT");
    REQUIRE(run({"shoot", "--config", cfg_path}).code == kExitOk);
    CHECK(fs::exists(from_file / "manifest.json"));

    const json a = read_json(from_flag / "manifest.json"), b = read_json(from_file / "manifest.json");
    CHECK(a["config_hash"] == b["config_hash"]);
    CHECK(a["config"]["y"] == 0.7);

    // a flag overrides the config file
    const fs::path over = scratch_dir("prec_override");
    REQUIRE(run({"shoot", "--config", cfg_path, "--y", "0.9", "--out", over.string()}).code == kExitOk);
    CHECK(read_json(over / "manifest.json")["config"]["y"] == 0.9);
    CHECK(read_json(over / "manifest.json")["config_hash"] != a["config_hash"]);
}

TEST_CASE("strict config validation") {
    const fs::path dir = scratch_dir("strict");
    fs::create_directories(dir);
    auto with_config = [&](const std::string& text) {
        std::ofstream(dir / "c.json") << text;
        return run({"shoot", "--config", (dir / "c.json").string(), "--out", (dir / "out").string()});
    };
    Run r = with_config(R"({"bogus": 1})");
    CHECK(r.code == kExitValidation);
    CHECK(diagnostic_of(r)["field"] == "/bogus");
    r = with_config(R"({"controls": {"rel_tol": 1e-9, "typo": 1}})");
    CHECK(r.code == kExitValidation);
    CHECK(diagnostic_of(r)["field"] == "/controls/typo");
    r = with_config(R"({"a": "four"})");
    CHECK(r.code == kExitValidation);
    CHECK(diagnostic_of(r)["field"] == "/a");
    CHECK(with_config("{not json").code == kExitValidation);
    CHECK(with_config(R"({"d": 2})").code == kExitOk);
    CHECK(run({"shoot", "--config", (dir / "missing.json").string()}).code == kExitValidation);
}

TEST_CASE("exit codes for bad parameters and regimes") {
    const fs::path dir = scratch_dir("codes");
    Run r = run({"ground-state", "--a", "-1", "--out", dir.string()});
    CHECK(r.code == kExitValidation);
    r = run({"ground-state", "--a", "1.5", "--b", "1", "--out", dir.string()});
    CHECK(r.code == kExitNumerical);
    CHECK(diagnostic_of(r)["kind"] == "regime");
    CHECK(diagnostic_of(r)["status"] == "error");
    r = run({"shoot", "--y", "2.0", "--out", dir.string()});
    CHECK(r.code == kExitValidation);
    r = run({"continue", "--eps-list", "0,0.6", "--N", "200", "--out", dir.string()});
    CHECK(r.code == kExitValidation);
}

TEST_CASE("other commands") {
    const fs::path dir = scratch_dir("others");
    Run r = run({"portrait", "--a", "2", "--b", "1", "--out", (dir / "portrait").string()});
    REQUIRE(r.code == kExitOk);
    const json pj = read_json(dir / "portrait" / "portrait.json");
    CHECK(pj["counts"]["SMinus"] == 0);
    CHECK(pj["samples"] == 50);
    REQUIRE(pj["trajectories"].size() == 50);
    const std::string traj = slurp(dir / "portrait" / pj["trajectories"][0].get<std::string>());
    CHECK(traj.substr(0, traj.find('\n')) == "r,u,du,H");
    CHECK(read_json(dir / "portrait" / "manifest.json")["artifacts"].size() == 52);

    CHECK(run({"linearize", "--out", (dir / "lin").string()}).code == kExitOk);
    CHECK(read_json(dir / "lin" / "linearized.json")["sign_change_radii"].size() == 1);
    CHECK(run({"wronskian", "--out", (dir / "w").string()}).code == kExitOk);
    CHECK(run({"energy", "--out", (dir / "e").string()}).code == kExitOk);
    CHECK(run({"check-F", "--out", (dir / "f").string()}).code == kExitOk);
    CHECK(run({"spectrum", "--N", "2000", "--ell-max", "1", "--out", (dir / "s").string()}).code == kExitOk);
    CHECK(fs::exists(dir / "s" / "spectrum.csv"));

    r = run({"continue", "--N", "800", "--eps-list", "0,0.01,0.1", "--out", (dir / "c").string()});
    REQUIRE(r.code == kExitOk);
    const json bj = read_json(dir / "c" / "branch.json");
    CHECK(bj["points"].size() == 3);
    CHECK(fs::exists(dir / "c" / "branch.csv"));
    CHECK(fs::exists(dir / "c" / "state_2.json"));
}
