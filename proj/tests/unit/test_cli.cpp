#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

// End-to-end checks of the command-line driver: listing, the strict config
// schema, the exit-code contract, and byte-level reproducibility of data
// outputs. The binary under test is named by the WD_CLI_PATH environment
// variable (set by the build harness).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

std::string cli_path() {
    const char* p = std::getenv("WD_CLI_PATH");
    REQUIRE_MESSAGE(p != nullptr, "WD_CLI_PATH must point at the driver binary");
    return p;
}

fs::path scratch_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() /
                     ("wiredelay_cli_test_" + std::to_string(::getpid()));
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

CliResult run_cli(const std::string& args) {
    const fs::path out = scratch_dir() / "stdout.txt";
    const fs::path err = scratch_dir() / "stderr.txt";
    const std::string cmd =
        cli_path() + " " + args + " > " + out.string() + " 2> " + err.string();
    const int raw = std::system(cmd.c_str());
    CliResult r;
    r.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

fs::path write_config(const std::string& name, const std::string& body) {
    const fs::path p = scratch_dir() / name;
    std::ofstream(p, std::ios::binary) << body;
    return p;
}

int count_lines_containing(const std::string& text, const std::string& needle) {
    int n = 0;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
        if (line.find(needle) != std::string::npos) ++n;
    return n;
}

}  // namespace

TEST_CASE("list prints all eight experiments and the JSON variant round-trips") {
    const CliResult text = run_cli("list");
    CHECK(text.exit_code == 0);
    CHECK(count_lines_containing(text.out, "[module:") == 8);
    for (const char* name : {"noise-check", "moments", "dufresne", "coupled-vs-decoupled",
                             "rider-valko", "lyapunov", "microscopic-check", "resolvent"})
        CHECK(text.out.find(name) != std::string::npos);

    const CliResult as_json = run_cli("list --json");
    CHECK(as_json.exit_code == 0);
    const nlohmann::json doc = nlohmann::json::parse(as_json.out);
    REQUIRE(doc.is_array());
    REQUIRE(doc.size() == 8);
    for (const auto& entry : doc) {
        CHECK(entry.contains("name"));
        CHECK(entry.contains("description"));
        CHECK(entry.contains("module"));
    }
    CHECK(nlohmann::json::parse(doc.dump()) == doc);
}

TEST_CASE("a minimal run writes manifest, summary and data files") {
    const fs::path cfg = write_config(
        "noise.json", R"({"experiment":"noise-check","sim":{"n_traj":20000,"master_seed":7}})");
    const fs::path out = scratch_dir() / "noise_run";
    const CliResult r = run_cli("run " + cfg.string() + " --out " + out.string());
    CHECK(r.exit_code == 0);
    CHECK(count_lines_containing(r.out, "PASS") == 3);
    CHECK(count_lines_containing(r.out, "FAIL") == 0);

    CHECK(fs::exists(out / "noise_correlator.csv"));
    const nlohmann::json summary = nlohmann::json::parse(slurp(out / "summary.json"));
    CHECK(summary.at("pass").get<bool>());
    CHECK(summary.at("experiment").get<std::string>() == "noise-check");

    const nlohmann::json manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
    CHECK(manifest.at("seed").get<std::uint64_t>() == 7);
    CHECK(manifest.at("config").at("sim").at("n_traj").get<std::uint64_t>() == 20000);
    CHECK(manifest.at("config").at("output").at("directory").get<std::string>() ==
          out.string());
    CHECK(manifest.at("run").contains("timestamp"));
    CHECK(manifest.at("run").contains("wall_time_seconds"));
}

TEST_CASE("configuration problems exit with code 2") {
    const fs::path unknown = write_config(
        "unknown.json", R"({"experiment":"moments","simulation":{"n_traj":10}})");
    CHECK(run_cli("run " + unknown.string()).exit_code == 2);

    const fs::path typo = write_config(
        "typo.json", R"({"experiment":"momments"})");
    const CliResult r = run_cli("run " + typo.string());
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("momments") != std::string::npos);

    const fs::path bad_scheme = write_config(
        "scheme.json",
        R"({"experiment":"coupled-vs-decoupled","sim":{"scheme":"ito-euler","n_traj":4}})");
    CHECK(run_cli("run " + bad_scheme.string()).exit_code == 2);

    const fs::path not_json = write_config("garbage.json", "not json at all {{{");
    CHECK(run_cli("run " + not_json.string()).exit_code == 2);

    CHECK(run_cli("run " + (scratch_dir() / "no_such_file.json").string()).exit_code == 2);
    CHECK(run_cli("frobnicate").exit_code == 2);
}

TEST_CASE("a failed asserted tolerance exits with code 1") {
    // Drift-only paths (noise_scale 0) cannot reproduce the ensemble mean,
    // so the moments experiment must report a deterministic failure.
    const fs::path cfg = write_config(
        "fail.json",
        R"({"experiment":"moments","sim":{"n_traj":20,"noise_scale":0,"master_seed":3}})");
    const fs::path out = scratch_dir() / "fail_run";
    const CliResult r = run_cli("run " + cfg.string() + " --out " + out.string());
    CHECK(r.exit_code == 1);
    CHECK(count_lines_containing(r.out, "FAIL") >= 1);
    const nlohmann::json summary = nlohmann::json::parse(slurp(out / "summary.json"));
    CHECK_FALSE(summary.at("pass").get<bool>());
}

TEST_CASE("data outputs are byte-identical across reruns and worker counts") {
    const fs::path cfg = write_config(
        "repro.json", R"({"experiment":"moments","sim":{"n_traj":60,"master_seed":42}})");
    const fs::path a = scratch_dir() / "repro_a";
    const fs::path b = scratch_dir() / "repro_b";
    const fs::path c = scratch_dir() / "repro_c";
    CHECK(run_cli("run " + cfg.string() + " --out " + a.string()).exit_code == 0);
    CHECK(run_cli("run " + cfg.string() + " --out " + b.string() + " --workers 3").exit_code ==
          0);
    CHECK(run_cli("run " + cfg.string() + " --out " + c.string() + " --seed 43").exit_code == 0);

    CHECK(slurp(a / "moments.csv") == slurp(b / "moments.csv"));
    CHECK(slurp(a / "summary.json") == slurp(b / "summary.json"));
    CHECK(slurp(a / "moments.csv") != slurp(c / "moments.csv"));

    // Manifests may differ only inside the "run" object -- and in the
    // output directory, which this test itself varies via --out.
    nlohmann::json ma = nlohmann::json::parse(slurp(a / "manifest.json"));
    nlohmann::json mb = nlohmann::json::parse(slurp(b / "manifest.json"));
    ma.erase("run");
    mb.erase("run");
    ma["config"]["output"].erase("directory");
    mb["config"]["output"].erase("directory");
    CHECK(ma == mb);
}
