#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

// Exercises the installed binary end to end: golden outputs, exit codes,
// determinism of seeded runs. Paths come from the build system.
#ifndef MUDA_CLI_PATH
#error "MUDA_CLI_PATH must point at the CLI binary"
#endif
#ifndef MUDA_SOURCE_DIR
#error "MUDA_SOURCE_DIR must point at the repository root"
#endif

const char* testing_temp_dir();

namespace {

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::string temp_path(const std::string& hint) {
    static int counter = 0;
    return std::string(::testing_temp_dir()) + "/" + hint + "_" + std::to_string(counter++);
}

CliResult run_cli(const std::string& args) {
    static int counter = 0;
    const std::string base = std::string(::testing_temp_dir()) + "/cli_" + std::to_string(counter++);
    const std::string out_path = base + ".out";
    const std::string err_path = base + ".err";
    const std::string command = std::string(MUDA_CLI_PATH) + " " + args + " > " + out_path +
                                " 2> " + err_path;
    const int status = std::system(command.c_str());

    CliResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = slurp(out_path);
    result.err = slurp(err_path);
    return result;
}

std::string fixture(const std::string& name) {
    return std::string(MUDA_SOURCE_DIR) + "/tests/fixtures/" + name;
}

std::string golden(const std::string& name) {
    return std::string(MUDA_SOURCE_DIR) + "/tests/golden/" + name;
}

}  // namespace

// one writable scratch directory for the whole binary run
static std::string g_temp_dir;
const char* testing_temp_dir() {
    if (g_temp_dir.empty()) {
        char pattern[] = "/tmp/muda_cli_tests_XXXXXX";
        REQUIRE(mkdtemp(pattern) != nullptr);
        g_temp_dir = pattern;
    }
    return g_temp_dir.c_str();
}

TEST_CASE("run --side-only reproduces the worked example through the binary") {
    const CliResult vickrey = run_cli("run " + fixture("example1_left.json") +
                                      " --variant vickrey --side-only --price 50");
    REQUIRE(vickrey.exit_code == 0);
    REQUIRE(vickrey.out == slurp(golden("side_vickrey_price50.json")));

    const nlohmann::json doc = nlohmann::json::parse(vickrey.out);
    REQUIRE(doc["seller_gain"] == 130.0);
    REQUIRE(doc["total_fees"] == 30.0);
    REQUIRE(doc["units_bought"] == 4);
    REQUIRE(doc["traders"]["alice"]["fee"] == 20.0);
    REQUIRE(doc["traders"]["bob"]["fee"] == 10.0);
}

TEST_CASE("run emits a full outcome document") {
    const CliResult result =
        run_cli("run " + fixture("example1_left.json") + " --variant vickrey --seed 5");
    REQUIRE(result.exit_code == 0);
    const nlohmann::json doc = nlohmann::json::parse(result.out);
    REQUIRE(doc["variant"] == "vickrey");
    REQUIRE(doc["seed"] == 5);
    REQUIRE(doc["split"]["sides"].size() == 3);
    REQUIRE(doc["benchmark"]["max_gft"] == 265.0);
    REQUIRE(doc.contains("total_gft"));
    REQUIRE(doc.contains("market_maker_revenue"));
}

TEST_CASE("identical flags and seed give byte-identical output") {
    const std::string args =
        "run " + fixture("example1_left.json") + " --variant lottery --seed 9";
    const CliResult a = run_cli(args);
    const CliResult b = run_cli(args);
    REQUIRE(a.exit_code == 0);
    REQUIRE(a.out == b.out);

    const CliResult c = run_cli("experiment-uniform --n-list 6 --reps 3 --seed 4");
    const CliResult d = run_cli("experiment-uniform --n-list 6 --reps 3 --seed 4");
    REQUIRE(c.exit_code == 0);
    REQUIRE(c.out == d.out);
}

TEST_CASE("optimal subcommand reports the full-market optimum") {
    const CliResult result = run_cli("optimal " + fixture("example1_left.json"));
    REQUIRE(result.exit_code == 0);
    const nlohmann::json doc = nlohmann::json::parse(result.out);
    REQUIRE(doc["k"] == 5);
    REQUIRE(doc["max_gft"] == 265.0);
    REQUIRE(doc["equilibrium_interval"]["low"] == 35.0);
    REQUIRE(doc["equilibrium_interval"]["high"] == 40.0);
}

TEST_CASE("empty market yields a zero outcome, not an error") {
    const std::string path = temp_path("empty") + ".json";
    std::ofstream(path) << R"({"max_units": 1, "traders": []})";
    const CliResult result = run_cli("run " + path);
    REQUIRE(result.exit_code == 0);
    const nlohmann::json doc = nlohmann::json::parse(result.out);
    REQUIRE(doc["total_gft"] == 0.0);
    REQUIRE(doc["benchmark"]["k"] == 0);
}

TEST_CASE("bad inputs exit 1 with a diagnostic naming the problem") {
    const std::string path = temp_path("bad") + ".json";
    std::ofstream(path) << R"({"max_units": 2, "traders": [
        {"id": "x", "side": "buyer", "marginals": [3, 9]}
    ]})";
    const CliResult result = run_cli("run " + path);
    REQUIRE(result.exit_code == 1);
    REQUIRE(result.err.find("error:") != std::string::npos);
    REQUIRE(result.err.find("increase") != std::string::npos);
    REQUIRE(result.err.find("x") != std::string::npos);

    const CliResult missing = run_cli("run /nonexistent.json");
    REQUIRE(missing.exit_code == 1);
    REQUIRE(missing.err.find("error:") != std::string::npos);
}

TEST_CASE("unknown flags and missing subcommands exit 2 with usage") {
    const CliResult unknown = run_cli("run " + fixture("example1_left.json") + " --bogus");
    REQUIRE(unknown.exit_code == 2);

    const CliResult none = run_cli("");
    REQUIRE(none.exit_code == 2);

    const CliResult badsub = run_cli("frobnicate");
    REQUIRE(badsub.exit_code == 2);
}

TEST_CASE("default uniform experiment matches the checked-in golden CSV") {
    const CliResult result = run_cli("experiment-uniform");
    REQUIRE(result.exit_code == 0);
    REQUIRE(result.out == slurp(golden("experiment_uniform_default.csv")));
}

TEST_CASE("experiment output echoes the effective configuration") {
    const CliResult result =
        run_cli("experiment-uniform --n-list 4,8 --m 2 --M 6 --V 100 --A 50 --reps 2 --seed 3");
    REQUIRE(result.exit_code == 0);
    REQUIRE(result.out.find("# mode=uniform\n") != std::string::npos);
    REQUIRE(result.out.find("# group_size=2\n") != std::string::npos);
    REQUIRE(result.out.find("# center=100\n") != std::string::npos);
    REQUIRE(result.out.find("# amplitude=50\n") != std::string::npos);
    REQUIRE(result.out.find("# reps=2\n") != std::string::npos);
    REQUIRE(result.out.find("# seed=3\n") != std::string::npos);
    REQUIRE(result.out.find("# group_count=3\n") != std::string::npos);
    REQUIRE(result.out.find("# max_units=6\n") != std::string::npos);
    REQUIRE(result.out.find("# n_list=4;8\n") != std::string::npos);
    REQUIRE(result.out.find("x,mean_lottery") != std::string::npos);

    const CliResult indivisible = run_cli("experiment-uniform --m 3 --M 10");
    REQUIRE(indivisible.exit_code == 1);
    REQUIRE(indivisible.err.find("multiple") != std::string::npos);
}

TEST_CASE("concentration sweep echoes its own mode") {
    const CliResult result = run_cli(
        "experiment-uniform --m 1 --M-list 10,100 --total-units 1000 --reps 2 --seed 1");
    REQUIRE(result.exit_code == 0);
    REQUIRE(result.out.find("# mode=concentration\n") != std::string::npos);
    REQUIRE(result.out.find("# M_list=10;100\n") != std::string::npos);
    REQUIRE(result.out.find("# total_units=1000\n") != std::string::npos);
}

TEST_CASE("orderbook fixture generation and experiment round-trip") {
    const std::string path = temp_path("fixture") + ".csv";
    const CliResult wrote = run_cli("experiment-orderbook --make-fixture " + path +
                                    " --fixture-symbols 2 --fixture-traders 8 --seed 6");
    REQUIRE(wrote.exit_code == 0);
    REQUIRE(wrote.out.find("wrote fixture") != std::string::npos);

    const CliResult result =
        run_cli("experiment-orderbook " + path + " --n-list 4 --reps 2 --seed 6");
    REQUIRE(result.exit_code == 0);
    REQUIRE(result.out.find("# mode=orderbook\n") != std::string::npos);
    REQUIRE(result.out.find("# symbols=2\n") != std::string::npos);
    REQUIRE(result.out.find("x,mean_lottery") != std::string::npos);

    const CliResult no_input = run_cli("experiment-orderbook");
    REQUIRE(no_input.exit_code == 1);
}

TEST_CASE("fuzz subcommand reports zero violations on the example market") {
    const CliResult result =
        run_cli("fuzz " + fixture("example1_left.json") + " --deviations 40 --seed 2");
    REQUIRE(result.exit_code == 0);
    REQUIRE(result.out.find("seed: 2") != std::string::npos);
    REQUIRE(result.out.find("total violations: 0") != std::string::npos);
    REQUIRE(result.out.find("trader alice:") != std::string::npos);
    REQUIRE(result.out.find("trader carol:") != std::string::npos);
}

TEST_CASE("--out writes the same bytes to a file") {
    const std::string path = temp_path("outfile") + ".json";
    const CliResult direct = run_cli("optimal " + fixture("example1_left.json"));
    const CliResult redirected =
        run_cli("optimal " + fixture("example1_left.json") + " --out " + path);
    REQUIRE(redirected.exit_code == 0);
    REQUIRE(redirected.out.empty());
    REQUIRE(slurp(path) == direct.out);
}
