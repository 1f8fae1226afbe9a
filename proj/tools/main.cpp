// command-line front end: simulate | fit | gof | metrics | plotdata
#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>

#include "ccbart/diagnostics.hpp"
#include "ccbart/io.hpp"
#include "ccbart/sim.hpp"

namespace fs = std::filesystem;
using namespace ccbart;

namespace {

// default output root: CCBART_OUTPUT_ROOT if set, else the working directory
fs::path output_root() {
    if (const char* env = std::getenv("CCBART_OUTPUT_ROOT")) return fs::path(env);
    return fs::current_path();
}

fs::path resolve_output(const RunConfig& config, const std::string& fallback) {
    fs::path p = config.output.empty() ? fs::path(fallback) : fs::path(config.output);
    if (p.is_relative()) p = output_root() / p;
    return p;
}

struct FlagBinding {
    std::string flag;
    std::function<void(RunConfig&, const RunConfig&)> copy;
};

// one entry per RunConfig field so the config file / CLI override merge can't
// drift out of sync with the option list
const std::vector<FlagBinding>& bindings() {
    static const std::vector<FlagBinding> b = {
        {"--family", [](RunConfig& d, const RunConfig& s) { d.family = s.family; }},
        {"--df", [](RunConfig& d, const RunConfig& s) { d.df = s.df; }},
        {"--num-trees", [](RunConfig& d, const RunConfig& s) { d.num_trees = s.num_trees; }},
        {"--iterations", [](RunConfig& d, const RunConfig& s) { d.iterations = s.iterations; }},
        {"--burn-in", [](RunConfig& d, const RunConfig& s) { d.burn_in = s.burn_in; }},
        {"--chains", [](RunConfig& d, const RunConfig& s) { d.chains = s.chains; }},
        {"--adapt-start", [](RunConfig& d, const RunConfig& s) { d.adapt_start = s.adapt_start; }},
        {"--init-prop-var",
         [](RunConfig& d, const RunConfig& s) { d.init_prop_var = s.init_prop_var; }},
        {"--adaptive", [](RunConfig& d, const RunConfig& s) { d.adaptive = s.adaptive; }},
        {"--omega", [](RunConfig& d, const RunConfig& s) { d.omega = s.omega; }},
        {"--zeta", [](RunConfig& d, const RunConfig& s) { d.zeta = s.zeta; }},
        {"--prior-sign", [](RunConfig& d, const RunConfig& s) { d.prior_sign = s.prior_sign; }},
        {"--a", [](RunConfig& d, const RunConfig& s) { d.a = s.a; }},
        {"--b", [](RunConfig& d, const RunConfig& s) { d.b = s.b; }},
        {"--p-grow", [](RunConfig& d, const RunConfig& s) { d.p_grow = s.p_grow; }},
        {"--p-prune", [](RunConfig& d, const RunConfig& s) { d.p_prune = s.p_prune; }},
        {"--p-change", [](RunConfig& d, const RunConfig& s) { d.p_change = s.p_change; }},
        {"--p-swap", [](RunConfig& d, const RunConfig& s) { d.p_swap = s.p_swap; }},
        {"--seed", [](RunConfig& d, const RunConfig& s) { d.seed = s.seed; }},
        {"--tau-shape", [](RunConfig& d, const RunConfig& s) { d.tau_shape = s.tau_shape; }},
        {"--n", [](RunConfig& d, const RunConfig& s) { d.n = s.n; }},
        {"--gof-replicates",
         [](RunConfig& d, const RunConfig& s) { d.gof_replicates = s.gof_replicates; }},
        {"--gof-permutations",
         [](RunConfig& d, const RunConfig& s) { d.gof_permutations = s.gof_permutations; }},
        {"--input", [](RunConfig& d, const RunConfig& s) { d.input = s.input; }},
        {"--output", [](RunConfig& d, const RunConfig& s) { d.output = s.output; }},
        {"--model", [](RunConfig& d, const RunConfig& s) { d.model_file = s.model_file; }},
        {"--truth", [](RunConfig& d, const RunConfig& s) { d.truth_file = s.truth_file; }},
    };
    return b;
}

void add_run_options(CLI::App* cmd, RunConfig& config, std::string& config_file) {
    cmd->add_option("--config", config_file, "key=value config file, read before flag overrides");
    cmd->add_option("--family", config.family, "gaussian|student_t|clayton|gumbel|frank");
    cmd->add_option("--df", config.df, "Student-t degrees of freedom");
    cmd->add_option("--num-trees", config.num_trees);
    cmd->add_option("--iterations", config.iterations);
    cmd->add_option("--burn-in", config.burn_in, "-1 means iterations/2");
    cmd->add_option("--chains", config.chains);
    cmd->add_option("--adapt-start", config.adapt_start);
    cmd->add_option("--init-prop-var", config.init_prop_var);
    cmd->add_option("--adaptive", config.adaptive);
    cmd->add_option("--omega", config.omega);
    cmd->add_option("--zeta", config.zeta);
    cmd->add_option("--prior-sign", config.prior_sign, "as_printed|penalizing|penalizing_abs");
    cmd->add_option("--a", config.a);
    cmd->add_option("--b", config.b);
    cmd->add_option("--p-grow", config.p_grow);
    cmd->add_option("--p-prune", config.p_prune);
    cmd->add_option("--p-change", config.p_change);
    cmd->add_option("--p-swap", config.p_swap);
    cmd->add_option("--seed", config.seed);
    cmd->add_option("--tau-shape", config.tau_shape, "step|sine");
    cmd->add_option("--n", config.n);
    cmd->add_option("--gof-replicates", config.gof_replicates);
    cmd->add_option("--gof-permutations", config.gof_permutations);
    cmd->add_option("--input", config.input);
    cmd->add_option("--output", config.output);
    cmd->add_option("--model", config.model_file, "fitted model JSON");
    cmd->add_option("--truth", config.truth_file, "truth CSV with a theta_true column");
}

// config-file values fill in every field the user did not pass as a flag
void merge_config_file(const CLI::App* cmd, RunConfig& config, const std::string& config_file) {
    if (config_file.empty()) return;
    RunConfig from_file;
    from_file.apply(read_key_values(config_file));
    for (const auto& binding : bindings())
        if (cmd->count(binding.flag) == 0) binding.copy(config, from_file);
}

int cmd_simulate(const RunConfig& config) {
    DgpConfig dgp;
    dgp.model = config.model();
    dgp.shape = tau_shape_from_name(config.tau_shape);
    dgp.n = static_cast<std::size_t>(config.n);
    Rng rng(config.seed);
    SimulatedData sim;
    try {
        sim = generate_dataset(dgp, rng);
    } catch (const std::domain_error& e) {
        throw ConfigError(std::string("tau curve outside family range: ") + e.what());
    }

    Table out;
    out.columns = {"x", "u1", "u2", "theta_true", "tau_true"};
    for (std::size_t i = 0; i < sim.data.n(); ++i)
        out.rows.push_back(
            {sim.data.x[0][i], sim.data.u1[i], sim.data.u2[i], sim.theta[i], sim.tau[i]});
    const fs::path path = resolve_output(config, "dataset.csv");
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    write_csv(path, out);
    std::cout << "wrote " << path.string() << " (" << sim.data.n() << " rows)\n";
    return 0;
}

int cmd_fit(const RunConfig& config) {
    if (config.input.empty()) throw ConfigError("fit requires --input");
    const Dataset data = dataset_from_table(read_csv(config.input));

    const auto chains =
        run_chains(config.model(), data, config.sampler_config(), config.seed, config.chains);

    FittedModel fitted;
    fitted.model = config.model();
    fitted.x = data.x[0];
    fitted.theta = summarize_theta(chains);

    const fs::path dir = resolve_output(config, "run");
    write_run_directory(dir, config, data, chains, fitted);
    std::cout << "wrote " << dir.string() << "\n";
    return 0;
}

int cmd_gof(const RunConfig& config) {
    if (config.input.empty()) throw ConfigError("gof requires --input (data CSV)");
    if (config.model_file.empty()) throw ConfigError("gof requires --model");
    const FittedModel fitted = read_model(config.model_file);
    const Dataset data = dataset_from_table(read_csv(config.input));
    if (data.n() != fitted.theta.mean.size())
        throw DataError("model and data sizes differ");

    const Rng base(config.seed);
    std::vector<double> p_cramer, p_ff;
    for (int rep = 0; rep < config.gof_replicates; ++rep) {
        const Rng rep_rng = base.substream(static_cast<std::uint64_t>(rep));
        p_cramer.push_back(gof_test(fitted.model, data, fitted.theta.mean, GofStat::cramer,
                                    config.gof_permutations, rep_rng.substream(0))
                               .p_value);
        p_ff.push_back(gof_test(fitted.model, data, fitted.theta.mean, GofStat::ff,
                                config.gof_permutations, rep_rng.substream(1))
                           .p_value);
    }

    auto mean_of = [](const std::vector<double>& v) {
        return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    };
    auto sd_of = [&](const std::vector<double>& v) {
        if (v.size() < 2) return 0.0;
        const double m = mean_of(v);
        double ss = 0.0;
        for (double p : v) ss += (p - m) * (p - m);
        return std::sqrt(ss / static_cast<double>(v.size() - 1));
    };

    const fs::path path = resolve_output(config, "gof.csv");
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << "test,mean,median,sd\n";
    out << "cramer," << format_double(mean_of(p_cramer)) << ','
        << format_double(quantile(p_cramer, 0.5)) << ',' << format_double(sd_of(p_cramer))
        << '\n';
    out << "ff," << format_double(mean_of(p_ff)) << ',' << format_double(quantile(p_ff, 0.5))
        << ',' << format_double(sd_of(p_ff)) << '\n';
    std::cout << "wrote " << path.string() << "\n";
    return 0;
}

int cmd_metrics(const RunConfig& config) {
    if (config.model_file.empty()) throw ConfigError("metrics requires --model");
    if (config.truth_file.empty()) throw ConfigError("metrics requires --truth");
    const FittedModel fitted = read_model(config.model_file);
    const Table truth_table = read_csv(config.truth_file);
    const auto truth = truth_table.column_values("theta_true");
    if (truth.size() != fitted.theta.mean.size())
        throw DataError("truth file length does not match the fitted model");

    Table out;
    out.columns = {"rmse", "rmse_rooted", "ci_length", "ci_cov"};
    out.rows.push_back({rmse_printed(fitted.theta.mean, truth),
                        rmse_rooted(fitted.theta.mean, truth),
                        mean_ci_length(fitted.theta.lo, fitted.theta.hi),
                        ci_coverage(fitted.theta.lo, fitted.theta.hi, truth)});
    const fs::path path = resolve_output(config, "metrics.csv");
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    write_csv(path, out);
    std::cout << "wrote " << path.string() << "\n";
    return 0;
}

int cmd_plotdata(const RunConfig& config) {
    if (config.model_file.empty()) throw ConfigError("plotdata requires --model");
    const FittedModel fitted = read_model(config.model_file);

    std::vector<std::size_t> order(fitted.x.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fitted.x[a] < fitted.x[b]; });

    Table out;
    out.columns = {"x", "tau", "tau_lo", "tau_hi"};
    for (std::size_t i : order)
        out.rows.push_back({fitted.x[i], tau_from_theta(fitted.model, fitted.theta.mean[i]),
                            tau_from_theta(fitted.model, fitted.theta.lo[i]),
                            tau_from_theta(fitted.model, fitted.theta.hi[i])});
    const fs::path path = resolve_output(config, "plotdata.csv");
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    write_csv(path, out);
    std::cout << "wrote " << path.string() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"conditional copula regression-tree sampler"};
    app.require_subcommand(1);

    RunConfig config;
    std::string config_file;

    auto* simulate = app.add_subcommand("simulate", "draw a synthetic dataset");
    auto* fit = app.add_subcommand("fit", "run the sampler on a dataset");
    auto* gof = app.add_subcommand("gof", "goodness-of-fit permutation tests");
    auto* metrics = app.add_subcommand("metrics", "score a fit against a truth file");
    auto* plotdata = app.add_subcommand("plotdata", "emit tau(x) curve data from a fit");
    for (auto* cmd : {simulate, fit, gof, metrics, plotdata})
        add_run_options(cmd, config, config_file);

    try {
        app.parse(argc, argv);
        CLI::App* active = app.get_subcommands().front();
        merge_config_file(active, config, config_file);
        config.validate();
        if (active == simulate) return cmd_simulate(config);
        if (active == fit) return cmd_fit(config);
        if (active == gof) return cmd_gof(config);
        if (active == metrics) return cmd_metrics(config);
        return cmd_plotdata(config);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
