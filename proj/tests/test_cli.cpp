#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "ccbart/io.hpp"

using namespace ccbart;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / "ccbart_cli_test") {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    fs::path file(const std::string& name) const { return path / name; }
};

int run_cli(const std::string& args, const fs::path& log) {
    const std::string cmd =
        std::string(CCBART_CLI_PATH) + " " + args + " >" + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

} // namespace

TEST_CASE("simulate is deterministic in the seed and honors the schema") {
    TempDir tmp;
    const auto log = tmp.file("log.txt");
    REQUIRE(run_cli("simulate --family clayton --n 30 --seed 7 --output " +
                        tmp.file("a.csv").string(),
                    log) == 0);
    REQUIRE(run_cli("simulate --family clayton --n 30 --seed 7 --output " +
                        tmp.file("b.csv").string(),
                    log) == 0);
    REQUIRE(run_cli("simulate --family clayton --n 30 --seed 8 --output " +
                        tmp.file("c.csv").string(),
                    log) == 0);
    CHECK(slurp(tmp.file("a.csv")) == slurp(tmp.file("b.csv")));
    CHECK(slurp(tmp.file("a.csv")) != slurp(tmp.file("c.csv")));

    const Table t = read_csv(tmp.file("a.csv"));
    CHECK(t.columns == std::vector<std::string>{"x", "u1", "u2", "theta_true", "tau_true"});
    CHECK(t.rows.size() == 30);
}

TEST_CASE("configuration mistakes exit with code 2") {
    TempDir tmp;
    const auto log = tmp.file("log.txt");
    CHECK(run_cli("simulate --family vine --output " + tmp.file("x.csv").string(), log) == 2);
    CHECK(run_cli("simulate --no-such-flag", log) == 2);
    CHECK(run_cli("fit --output " + tmp.file("run").string(), log) == 2); // missing --input
    CHECK(run_cli("", log) == 2); // a subcommand is required

    // unknown key in a config file
    std::ofstream(tmp.file("bad.cfg")) << "iteratons=10\n";
    CHECK(run_cli("fit --config " + tmp.file("bad.cfg").string() + " --input " +
                      tmp.file("absent.csv").string(),
                  log) == 2);
}

TEST_CASE("data problems exit with code 3 and name the offending column") {
    TempDir tmp;
    const auto log = tmp.file("log.txt");
    CHECK(run_cli("fit --input " + tmp.file("absent.csv").string() + " --output " +
                      tmp.file("run").string(),
                  log) == 3);

    std::ofstream(tmp.file("partial.csv")) << "x,u1\n0.1,0.2\n0.3,0.4\n";
    CHECK(run_cli("fit --input " + tmp.file("partial.csv").string() + " --output " +
                      tmp.file("run").string(),
                  log) == 3);
    CHECK(slurp(log).find("u2") != std::string::npos);
}

TEST_CASE("simulate, fit, metrics, plotdata, and gof chain end to end") {
    TempDir tmp;
    const auto log = tmp.file("log.txt");
    const std::string data = tmp.file("data.csv").string();
    REQUIRE(run_cli("simulate --family gaussian --tau-shape sine --n 40 --seed 3 --output " +
                        data,
                    log) == 0);

    const std::string fit_args = " --family gaussian --iterations 120 --burn-in 60"
                                 " --chains 2 --adapt-start 20 --prior-sign penalizing"
                                 " --seed 11 --input " + data;
    const std::string run1 = tmp.file("run1").string();
    REQUIRE(run_cli("fit" + fit_args + " --output " + run1, log) == 0);

    // the whole export set is present and the snapshot records the run
    for (const char* name : {"config.cfg", "manifest.json", "chain_0.csv", "chain_1.csv",
                             "theta_0.csv", "theta_1.csv", "summary.json", "model.json"})
        CHECK(fs::exists(fs::path(run1) / name));
    const auto snapshot = read_key_values(fs::path(run1) / "config.cfg");
    CHECK(snapshot.at("iterations") == "120");
    CHECK(snapshot.at("prior_sign") == "penalizing");
    CHECK(read_csv(fs::path(run1) / "theta_0.csv").columns.size() == 40);

    // identical invocation, byte-identical artifacts
    const std::string run2 = tmp.file("run2").string();
    REQUIRE(run_cli("fit" + fit_args + " --output " + run2, log) == 0);
    for (const char* name : {"manifest.json", "chain_0.csv", "chain_1.csv", "theta_0.csv",
                             "theta_1.csv", "summary.json", "model.json"})
        CHECK(slurp(fs::path(run1) / name) == slurp(fs::path(run2) / name));

    const std::string model = (fs::path(run1) / "model.json").string();
    const std::string metrics = tmp.file("metrics.csv").string();
    REQUIRE(run_cli("metrics --model " + model + " --truth " + data + " --output " + metrics,
                    log) == 0);
    const Table scored = read_csv(metrics);
    CHECK(scored.columns == std::vector<std::string>{"rmse", "rmse_rooted", "ci_length",
                                                     "ci_cov"});
    REQUIRE(scored.rows.size() == 1);
    CHECK(scored.rows[0][3] >= 0.0);
    CHECK(scored.rows[0][3] <= 1.0);

    const std::string plot = tmp.file("plot.csv").string();
    REQUIRE(run_cli("plotdata --model " + model + " --output " + plot, log) == 0);
    const Table curve = read_csv(plot);
    CHECK(curve.columns == std::vector<std::string>{"x", "tau", "tau_lo", "tau_hi"});
    CHECK(curve.rows.size() == 40);
    for (std::size_t i = 0; i + 1 < curve.rows.size(); ++i)
        CHECK(curve.rows[i][0] <= curve.rows[i + 1][0]);

    const std::string gof = tmp.file("gof.csv").string();
    REQUIRE(run_cli("gof --model " + model + " --input " + data +
                        " --gof-replicates 2 --gof-permutations 9 --seed 5 --output " + gof,
                    log) == 0);
    const std::string pvals = slurp(gof); // label column is text, so compare raw
    CHECK(pvals.find("test,mean,median,sd") == 0);
    CHECK(pvals.find("\ncramer,") != std::string::npos);
    CHECK(pvals.find("\nff,") != std::string::npos);
}

TEST_CASE("raw margins fit exactly like precomputed pseudo-observations") {
    TempDir tmp;
    const auto log = tmp.file("log.txt");

    // raw data with arbitrary margins; its rank transform written by hand
    std::vector<double> x, y1, y2;
    for (int i = 0; i < 41; ++i) {
        x.push_back((i + 0.5) / 41.0);
        y1.push_back(std::sin(3.7 * i) * 10.0 + i * 0.01);
        y2.push_back(std::cos(2.3 * i) * 5.0 - i * 0.02);
    }
    const auto u1 = pseudo_observations(y1);
    const auto u2 = pseudo_observations(y2);

    std::ofstream raw(tmp.file("raw.csv"));
    raw << "x,y1,y2\n";
    for (int i = 0; i < 41; ++i)
        raw << format_double(x[i]) << ',' << format_double(y1[i]) << ','
            << format_double(y2[i]) << '\n';
    raw.close();
    std::ofstream ranked(tmp.file("ranked.csv"));
    ranked << "x,u1,u2\n";
    for (int i = 0; i < 41; ++i)
        ranked << format_double(x[i]) << ',' << format_double(u1[i]) << ','
               << format_double(u2[i]) << '\n';
    ranked.close();

    const std::string args = " --iterations 80 --chains 1 --seed 21 --output ";
    REQUIRE(run_cli("fit --input " + tmp.file("raw.csv").string() + args +
                        tmp.file("run_raw").string(),
                    log) == 0);
    REQUIRE(run_cli("fit --input " + tmp.file("ranked.csv").string() + args +
                        tmp.file("run_ranked").string(),
                    log) == 0);
    CHECK(slurp(tmp.file("run_raw") / "theta_0.csv") ==
          slurp(tmp.file("run_ranked") / "theta_0.csv"));
    CHECK(slurp(tmp.file("run_raw") / "summary.json") ==
          slurp(tmp.file("run_ranked") / "summary.json"));
    CHECK(read_csv(tmp.file("run_raw") / "theta_0.csv").columns.size() == 41);
}

TEST_CASE("config file fills fields that flags do not override") {
    TempDir tmp;
    const auto log = tmp.file("log.txt");
    const std::string data = tmp.file("data.csv").string();
    REQUIRE(run_cli("simulate --n 25 --seed 2 --output " + data, log) == 0);

    std::ofstream(tmp.file("run.cfg")) << "iterations=60\nseed=5\nchains=1\n";
    const std::string run = tmp.file("run").string();
    REQUIRE(run_cli("fit --config " + tmp.file("run.cfg").string() +
                        " --iterations 80 --input " + data + " --output " + run,
                    log) == 0);
    const auto snapshot = read_key_values(fs::path(run) / "config.cfg");
    CHECK(snapshot.at("iterations") == "80"); // the flag wins
    CHECK(snapshot.at("seed") == "5");        // the file fills the rest
    CHECK(snapshot.at("chains") == "1");
}
