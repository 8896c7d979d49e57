#include "doctest.h"

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "support/test_env.hpp"

namespace {

struct CliResult {
    int exit_code = -1;
    std::string output;  // stdout and stderr combined
};

CliResult run_cli(const std::string& args) {
    REQUIRE_MESSAGE(!testenv::cli_path.empty(), "pass --cli=<path-to-binary>");
    const std::string cmd = testenv::cli_path + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    CliResult r;
    std::array<char, 4096> buf;
    std::size_t got;
    while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.output.append(buf.data(), got);
    const int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string iris() { return testenv::data_dir + "/iris.csv"; }

}  // namespace

TEST_CASE("fit writes a clustering with the expected shape") {
    const CliResult r = run_cli("fit --input " + iris() +
                                " --label-column species --k auto --method rfkm --seed 7"
                                " --normalize --out cli_fit.json");
    CHECK(r.exit_code == 0);
    const auto j = nlohmann::json::parse(slurp("cli_fit.json"));
    CHECK(j["assignment"].size() == 150);
    CHECK(j["representatives"].size() == 3);
    CHECK(j["representatives"][0].size() == 4);
    std::remove("cli_fit.json");
}

TEST_CASE("fit and eval print the same metrics") {
    const CliResult fit = run_cli("fit --input " + iris() +
                                  " --label-column species --k 3 --method km --seed 3"
                                  " --out cli_roundtrip.json");
    REQUIRE(fit.exit_code == 0);
    const CliResult eval = run_cli("eval --input " + iris() +
                                   " --label-column species --clustering cli_roundtrip.json");
    REQUIRE(eval.exit_code == 0);
    // every metric line printed by fit must appear identically in eval's output
    std::istringstream lines(fit.output);
    std::string line;
    int compared = 0;
    while (std::getline(lines, line)) {
        if (line.rfind("avg", 0) == 0 || line.rfind("var_", 0) == 0 ||
            line.rfind("jain", 0) == 0 || line.rfind("max", 0) == 0 ||
            line.rfind("silhouette", 0) == 0 || line.rfind("purity", 0) == 0) {
            CHECK_MESSAGE(eval.output.find(line) != std::string::npos, line);
            ++compared;
        }
    }
    CHECK(compared == 7);
    std::remove("cli_roundtrip.json");
}

TEST_CASE("usage errors exit with 2") {
    CHECK(run_cli("fit --input " + iris() + " --k 0").exit_code == 2);
    CHECK(run_cli("fit").exit_code == 2);  // missing --input
    {
        std::ofstream out("cli_prose.csv");
        out << "x,y\n1,2\n3,4\n5,6\n";
    }
    CHECK(run_cli("fit --input cli_prose.csv --k auto").exit_code == 2);  // no labels
    std::remove("cli_prose.csv");
    CHECK(run_cli("toy --case 3").exit_code == 2);
    CHECK(run_cli("definitely-not-a-command").exit_code == 2);
    CHECK(run_cli("bench --config missing.cfg").exit_code == 2);
}

TEST_CASE("runtime errors exit with 1") {
    CHECK(run_cli("fit --input no_such_file.csv --k 2").exit_code == 1);

    // clustering of the wrong length
    {
        std::ofstream out("cli_bad_clustering.json");
        out << "{\"assignment\":[0,1,0],\"representatives\":[[1,2,3,4],[2,3,4,5]]}\n";
    }
    const CliResult r = run_cli("eval --input " + iris() +
                                " --label-column species --clustering cli_bad_clustering.json");
    CHECK(r.exit_code == 1);
    std::remove("cli_bad_clustering.json");
}

TEST_CASE("toy cases self-check and exit cleanly") {
    const CliResult one = run_cli("toy --case 1");
    CHECK(one.exit_code == 0);
    CHECK(one.output.find("Jain") != std::string::npos);
    const CliResult two = run_cli("toy --case 2");
    CHECK(two.exit_code == 0);
    CHECK(two.output.find("objective") != std::string::npos);
}

TEST_CASE("bench runs a config end to end") {
    {
        std::ofstream out("cli_bench.cfg");
        out << "dataset = " << iris() << "\n"
            << "label_column = species\n"
            << "k = auto\n"
            << "restarts = 3\n"
            << "base_seed = 5\n"
            << "normalize = true\n"
            << "out_json = cli_bench_report.json\n"
            << "out_csv = cli_bench_runs.csv\n";
    }
    const CliResult r = run_cli("bench --config cli_bench.cfg");
    CHECK(r.exit_code == 0);
    const auto j = nlohmann::json::parse(slurp("cli_bench_report.json"));
    CHECK(j["methods"].contains("km"));
    CHECK(j["methods"].contains("rfkm"));
    CHECK(j["k"] == 3);
    const std::string runs = slurp("cli_bench_runs.csv");
    std::size_t lines = 0;
    for (char ch : runs) lines += ch == '\n';
    CHECK(lines == 1 + 2 * 3);
    std::remove("cli_bench.cfg");
    std::remove("cli_bench_report.json");
    std::remove("cli_bench_runs.csv");
}

TEST_CASE("bench rejects a bad config with exit 2") {
    {
        std::ofstream out("cli_bad.cfg");
        out << "dataset = " << iris() << "\nwat = 1\n";
    }
    const CliResult r = run_cli("bench --config cli_bad.cfg");
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("wat") != std::string::npos);
    std::remove("cli_bad.cfg");
}
