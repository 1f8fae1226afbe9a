#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "ccbart/copula.hpp"
#include "ccbart/dataset.hpp"
#include "ccbart/diagnostics.hpp"
#include "ccbart/sampler.hpp"
#include "ccbart/sim.hpp"

namespace ccbart {

// bad configuration (CLI exit 2)
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// bad input data (CLI exit 3)
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// shortest text that round-trips the double exactly
std::string format_double(double value);

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows; // row-major, rows[i].size() == columns.size()

    int column(const std::string& name) const; // -1 if absent
    int require_column(const std::string& name) const; // throws DataError
    std::vector<double> column_values(const std::string& name) const;
};

Table read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const Table& table);

// (u1,u2,x) directly, or raw (y1,y2,x) through the rank transform
Dataset dataset_from_table(const Table& table);

// flat key=value file; '#' starts a comment, blank lines ignored
std::map<std::string, std::string> read_key_values(const std::filesystem::path& path);

// Everything a subcommand can be told. Parsed from key=value pairs with every
// key checked; unknown keys are rejected.
struct RunConfig {
    std::string family = "gaussian";
    double df = 4.0;
    int num_trees = 1;
    int iterations = 3000;
    int burn_in = -1; // -1: iterations / 2
    int chains = 4;
    int adapt_start = 500;
    double init_prop_var = 0.2;
    bool adaptive = true;
    double omega = 1.62;
    double zeta = 0.62;
    std::string prior_sign = "as_printed"; // or "penalizing" / "penalizing_abs"
    double a = 1.0;
    double b = 2.0;
    double p_grow = 0.25, p_prune = 0.25, p_change = 0.25, p_swap = 0.25;
    std::uint64_t seed = 1;
    std::string tau_shape = "step";
    int n = 200;
    int gof_replicates = 100;
    int gof_permutations = 1000;
    std::string input;
    std::string output;
    std::string model_file;
    std::string truth_file;

    void apply(const std::map<std::string, std::string>& kv); // throws ConfigError
    std::map<std::string, std::string> to_key_values() const;
    void validate() const; // throws ConfigError

    CopulaModel model() const;
    SamplerConfig sampler_config() const;
};

// fitted model: everything cmd_gof and cmd_plotdata need
struct FittedModel {
    CopulaModel model;
    std::vector<double> x;
    PosteriorSummary theta;
};

void write_model(const std::filesystem::path& path, const FittedModel& fitted);
FittedModel read_model(const std::filesystem::path& path);

// Run directory layout: config.cfg snapshot, manifest.json (seeds), chain_<c>.csv
// traces, theta_<c>.csv draws, summary.json, model.json.
void write_run_directory(const std::filesystem::path& dir, const RunConfig& config,
                         const Dataset& data, const std::vector<ChainTrace>& chains,
                         const FittedModel& fitted);

} // namespace ccbart
