#include "ccbart/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace ccbart {

using json = nlohmann::ordered_json;

std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

std::vector<double> pseudo_observations(const std::vector<double>& y) {
    const std::size_t n = y.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return y[a] < y[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && y[order[j + 1]] == y[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0; // average rank, 1-based
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    for (auto& r : ranks) r /= static_cast<double>(n + 1);
    return ranks;
}

int Table::column(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    return it == columns.end() ? -1 : static_cast<int>(it - columns.begin());
}

int Table::require_column(const std::string& name) const {
    const int c = column(name);
    if (c < 0) throw DataError("missing column: " + name);
    return c;
}

std::vector<double> Table::column_values(const std::string& name) const {
    const int c = require_column(name);
    std::vector<double> out(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) out[i] = rows[i][c];
    return out;
}

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(trim(field));
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

double parse_double(const std::string& text, const std::string& where) {
    double value;
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc{} || res.ptr != end)
        throw DataError("non-numeric cell '" + text + "' at " + where);
    return value;
}

} // namespace

Table read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    Table table;
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty file: " + path.string());
    table.columns = split_csv_line(line);
    if (table.columns.empty()) throw DataError("missing header row: " + path.string());

    std::size_t row_no = 1;
    while (std::getline(in, line)) {
        ++row_no;
        if (trim(line).empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != table.columns.size())
            throw DataError(path.string() + " row " + std::to_string(row_no) + ": expected " +
                            std::to_string(table.columns.size()) + " fields, got " +
                            std::to_string(fields.size()));
        std::vector<double> row(fields.size());
        for (std::size_t c = 0; c < fields.size(); ++c)
            row[c] = parse_double(fields[c], path.string() + " row " + std::to_string(row_no) +
                                                 " column " + table.columns[c]);
        table.rows.push_back(std::move(row));
    }
    return table;
}

void write_csv(const std::filesystem::path& path, const Table& table) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    for (std::size_t c = 0; c < table.columns.size(); ++c)
        out << (c ? "," : "") << table.columns[c];
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c)
            out << (c ? "," : "") << format_double(row[c]);
        out << '\n';
    }
}

Dataset dataset_from_table(const Table& table) {
    if (table.rows.size() < 2) throw DataError("need at least 2 data rows");
    Dataset data;
    if (table.column("u1") >= 0 || table.column("u2") >= 0) {
        data.u1 = table.column_values("u1");
        data.u2 = table.column_values("u2");
    } else if (table.column("y1") >= 0 || table.column("y2") >= 0) {
        data.u1 = pseudo_observations(table.column_values("y1"));
        data.u2 = pseudo_observations(table.column_values("y2"));
    } else {
        throw DataError("missing column: u1 (or y1 for raw data)");
    }

    if (table.column("x") >= 0) {
        data.x.push_back(table.column_values("x"));
    } else {
        for (int j = 1; table.column("x" + std::to_string(j)) >= 0; ++j)
            data.x.push_back(table.column_values("x" + std::to_string(j)));
    }
    if (data.x.empty()) throw DataError("missing column: x");
    try {
        data.validate();
    } catch (const std::invalid_argument& e) {
        throw DataError(e.what());
    }
    return data;
}

std::map<std::string, std::string> read_key_values(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path.string() + " line " + std::to_string(line_no) +
                              ": expected key=value");
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

namespace {

int parse_int(const std::string& text, const std::string& key) {
    int value;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
        throw ConfigError("bad integer for " + key + ": '" + text + "'");
    return value;
}

std::uint64_t parse_u64(const std::string& text, const std::string& key) {
    std::uint64_t value;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
        throw ConfigError("bad seed for " + key + ": '" + text + "'");
    return value;
}

double parse_real(const std::string& text, const std::string& key) {
    double value;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
        throw ConfigError("bad number for " + key + ": '" + text + "'");
    return value;
}

bool parse_bool(const std::string& text, const std::string& key) {
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    throw ConfigError("bad boolean for " + key + ": '" + text + "'");
}

} // namespace

void RunConfig::apply(const std::map<std::string, std::string>& kv) {
    for (const auto& [key, value] : kv) {
        if (key == "family") family = value;
        else if (key == "df") df = parse_real(value, key);
        else if (key == "num_trees") num_trees = parse_int(value, key);
        else if (key == "iterations") iterations = parse_int(value, key);
        else if (key == "burn_in") burn_in = parse_int(value, key);
        else if (key == "chains") chains = parse_int(value, key);
        else if (key == "adapt_start") adapt_start = parse_int(value, key);
        else if (key == "init_prop_var") init_prop_var = parse_real(value, key);
        else if (key == "adaptive") adaptive = parse_bool(value, key);
        else if (key == "omega") omega = parse_real(value, key);
        else if (key == "zeta") zeta = parse_real(value, key);
        else if (key == "prior_sign") prior_sign = value;
        else if (key == "a") a = parse_real(value, key);
        else if (key == "b") b = parse_real(value, key);
        else if (key == "p_grow") p_grow = parse_real(value, key);
        else if (key == "p_prune") p_prune = parse_real(value, key);
        else if (key == "p_change") p_change = parse_real(value, key);
        else if (key == "p_swap") p_swap = parse_real(value, key);
        else if (key == "seed") seed = parse_u64(value, key);
        else if (key == "tau_shape") tau_shape = value;
        else if (key == "n") n = parse_int(value, key);
        else if (key == "gof_replicates") gof_replicates = parse_int(value, key);
        else if (key == "gof_permutations") gof_permutations = parse_int(value, key);
        else if (key == "input") input = value;
        else if (key == "output") output = value;
        else if (key == "model_file") model_file = value;
        else if (key == "truth_file") truth_file = value;
        else throw ConfigError("unknown config key: " + key);
    }
}

std::map<std::string, std::string> RunConfig::to_key_values() const {
    return {
        {"family", family},
        {"df", format_double(df)},
        {"num_trees", std::to_string(num_trees)},
        {"iterations", std::to_string(iterations)},
        {"burn_in", std::to_string(burn_in)},
        {"chains", std::to_string(chains)},
        {"adapt_start", std::to_string(adapt_start)},
        {"init_prop_var", format_double(init_prop_var)},
        {"adaptive", adaptive ? "true" : "false"},
        {"omega", format_double(omega)},
        {"zeta", format_double(zeta)},
        {"prior_sign", prior_sign},
        {"a", format_double(a)},
        {"b", format_double(b)},
        {"p_grow", format_double(p_grow)},
        {"p_prune", format_double(p_prune)},
        {"p_change", format_double(p_change)},
        {"p_swap", format_double(p_swap)},
        {"seed", std::to_string(seed)},
        {"tau_shape", tau_shape},
        {"n", std::to_string(n)},
        {"gof_replicates", std::to_string(gof_replicates)},
        {"gof_permutations", std::to_string(gof_permutations)},
        {"input", input},
        {"output", output},
        {"model_file", model_file},
        {"truth_file", truth_file},
    };
}

void RunConfig::validate() const {
    try {
        model().validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (prior_sign != "as_printed" && prior_sign != "penalizing" &&
        prior_sign != "penalizing_abs")
        throw ConfigError("prior_sign must be as_printed, penalizing, or penalizing_abs");
    if (tau_shape != "step" && tau_shape != "sine")
        throw ConfigError("tau_shape must be step or sine");
    if (num_trees < 1) throw ConfigError("num_trees must be positive");
    if (iterations < 1) throw ConfigError("iterations must be positive");
    if (chains < 1) throw ConfigError("chains must be positive");
    if (n < 2) throw ConfigError("n must be at least 2");
    if (adapt_start < 0) throw ConfigError("adapt_start must be nonnegative");
    if (burn_in >= iterations) throw ConfigError("burn_in must be below iterations");
    if (!(init_prop_var > 0.0)) throw ConfigError("init_prop_var must be positive");
    if (omega < 0.0) throw ConfigError("omega must be nonnegative");
    if (!(a > 0.0) || !(b > 0.0)) throw ConfigError("a and b must be positive");
    if (p_grow < 0 || p_prune < 0 || p_change < 0 || p_swap < 0 ||
        std::abs(p_grow + p_prune + p_change + p_swap - 1.0) > 1e-12)
        throw ConfigError("move probabilities must be nonnegative and sum to 1");
    if (gof_replicates < 1 || gof_permutations < 1)
        throw ConfigError("gof_replicates and gof_permutations must be positive");
}

CopulaModel RunConfig::model() const {
    CopulaModel m;
    try {
        m.family = family_from_name(family);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    m.df = df;
    return m;
}

SamplerConfig RunConfig::sampler_config() const {
    SamplerConfig c;
    c.num_trees = num_trees;
    c.iterations = iterations;
    c.burn_in = burn_in;
    c.adapt_start = adapt_start;
    c.adaptive = adaptive;
    c.init_prop_var = init_prop_var;
    c.sigma_a = a;
    c.sigma_b = b;
    c.tree_prior.omega = omega;
    c.tree_prior.zeta = zeta;
    c.tree_prior.sign = prior_sign == "penalizing"       ? PriorSign::penalizing
                        : prior_sign == "penalizing_abs" ? PriorSign::penalizing_abs
                                                         : PriorSign::as_printed;
    c.moves = {p_grow, p_prune, p_change, p_swap};
    return c;
}

void write_model(const std::filesystem::path& path, const FittedModel& fitted) {
    json doc;
    doc["family"] = family_name(fitted.model.family);
    doc["df"] = fitted.model.df;
    doc["x"] = fitted.x;
    doc["theta_mean"] = fitted.theta.mean;
    doc["theta_lo"] = fitted.theta.lo;
    doc["theta_hi"] = fitted.theta.hi;
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << doc.dump(2) << '\n';
}

FittedModel read_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("missing model file: " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw DataError("malformed model file " + path.string() + ": " + e.what());
    }
    FittedModel fitted;
    try {
        fitted.model.family = family_from_name(doc.at("family").get<std::string>());
        fitted.model.df = doc.at("df").get<double>();
        fitted.x = doc.at("x").get<std::vector<double>>();
        fitted.theta.mean = doc.at("theta_mean").get<std::vector<double>>();
        fitted.theta.lo = doc.at("theta_lo").get<std::vector<double>>();
        fitted.theta.hi = doc.at("theta_hi").get<std::vector<double>>();
    } catch (const std::exception& e) {
        throw DataError("malformed model file " + path.string() + ": " + e.what());
    }
    return fitted;
}

void write_run_directory(const std::filesystem::path& dir, const RunConfig& config,
                         const Dataset& data, const std::vector<ChainTrace>& chains,
                         const FittedModel& fitted) {
    std::filesystem::create_directories(dir);

    {
        std::ofstream out(dir / "config.cfg");
        for (const auto& [key, value] : config.to_key_values()) out << key << '=' << value << '\n';
    }
    {
        json manifest;
        manifest["seed"] = config.seed;
        json seeds = json::array();
        for (const auto& chain : chains) seeds.push_back(chain.seed);
        manifest["chain_seeds"] = seeds;
        manifest["n"] = data.n();
        manifest["chains"] = chains.size();
        std::ofstream out(dir / "manifest.json");
        out << manifest.dump(2) << '\n';
    }

    for (std::size_t c = 0; c < chains.size(); ++c) {
        const auto& chain = chains[c];
        Table trace;
        trace.columns = {"iteration", "log_lik", "mean_n_leaves", "mean_depth",
                         "accepted_moves"};
        for (std::size_t t = 0; t < chain.log_lik.size(); ++t)
            trace.rows.push_back({static_cast<double>(t + 1), chain.log_lik[t],
                                  chain.mean_n_leaves[t], chain.mean_depth[t],
                                  static_cast<double>(chain.accepted_moves[t])});
        write_csv(dir / ("chain_" + std::to_string(c) + ".csv"), trace);

        Table theta;
        for (std::size_t i = 0; i < data.n(); ++i)
            theta.columns.push_back("theta_" + std::to_string(i));
        theta.rows = chain.theta;
        write_csv(dir / ("theta_" + std::to_string(c) + ".csv"), theta);
    }

    {
        const CopulaModel model = fitted.model;
        json summary;
        summary["family"] = family_name(model.family);
        json obs = json::array();
        for (std::size_t i = 0; i < data.n(); ++i) {
            json row;
            row["x"] = fitted.x[i];
            row["theta_mean"] = fitted.theta.mean[i];
            row["theta_lo"] = fitted.theta.lo[i];
            row["theta_hi"] = fitted.theta.hi[i];
            row["tau_mean"] = tau_from_theta(model, fitted.theta.mean[i]);
            row["tau_lo"] = tau_from_theta(model, fitted.theta.lo[i]);
            row["tau_hi"] = tau_from_theta(model, fitted.theta.hi[i]);
            obs.push_back(row);
        }
        summary["observations"] = obs;
        std::ofstream out(dir / "summary.json");
        out << summary.dump(2) << '\n';
    }

    write_model(dir / "model.json", fitted);
}

} // namespace ccbart
