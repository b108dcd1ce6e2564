#include "config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "predrec/csv.hpp"
#include "predrec/errors.hpp"

namespace predrec::cli {

namespace {

[[noreturn]] void toml_fail(long line, const std::string& why) {
    throw ConfigError("TOML parse error at line " + std::to_string(line) + ": " + why);
}

bool is_bare_key_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

std::string strip_comment(const std::string& line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_string = !in_string;
        if (line[i] == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

nlohmann::json parse_scalar(const std::string& token, long line) {
    if (token.empty()) toml_fail(line, "empty value");
    if (token.front() == '"') {
        if (token.size() < 2 || token.back() != '"') toml_fail(line, "unterminated string");
        return token.substr(1, token.size() - 2);
    }
    if (token == "true") return true;
    if (token == "false") return false;
    errno = 0;
    char* end = nullptr;
    const double value = std::strtod(token.c_str(), &end);
    if (end != token.c_str() + token.size() || errno == ERANGE)
        toml_fail(line, "cannot parse value '" + token + "'");
    if (value == std::floor(value) && std::abs(value) < 9.0e15 &&
        token.find_first_of(".eE") == std::string::npos)
        return static_cast<long long>(value);
    return value;
}

nlohmann::json parse_value(const std::string& token, long line) {
    if (!token.empty() && token.front() == '[') {
        if (token.back() != ']') toml_fail(line, "unterminated array");
        nlohmann::json array = nlohmann::json::array();
        const std::string inner = trim(token.substr(1, token.size() - 2));
        if (inner.empty()) return array;
        for (const std::string& piece : split(inner, ','))
            array.push_back(parse_scalar(trim(piece), line));
        return array;
    }
    return parse_scalar(token, line);
}

nlohmann::json* descend(nlohmann::json& root, const std::string& dotted, long line) {
    nlohmann::json* node = &root;
    for (const std::string& part : split(dotted, '.')) {
        const std::string key = trim(part);
        if (key.empty()) toml_fail(line, "empty table name component");
        node = &(*node)[key];
        if (!node->is_object() && !node->is_null()) toml_fail(line, "table redefines a value");
        if (node->is_null()) *node = nlohmann::json::object();
    }
    return node;
}

}  // namespace

nlohmann::json toml_to_json(const std::string& text) {
    nlohmann::json root = nlohmann::json::object();
    nlohmann::json* current = &root;
    std::istringstream in(text);
    std::string raw;
    long line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') toml_fail(line_no, "unterminated table header");
            current = descend(root, line.substr(1, line.size() - 2), line_no);
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) toml_fail(line_no, "expected key = value");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) toml_fail(line_no, "empty key");
        for (char c : key)
            if (!is_bare_key_char(c)) toml_fail(line_no, "unsupported key character in '" + key + "'");
        (*current)[key] = parse_value(trim(line.substr(eq + 1)), line_no);
    }
    return root;
}

nlohmann::json load_config_file(const std::string& path) {
    const std::string text = read_file(path);
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
        try {
            return nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError(std::string("JSON parse error in ") + path + ": " + e.what());
        }
    }
    return toml_to_json(text);
}

namespace {

const nlohmann::json& require_field(const nlohmann::json& obj, const std::string& key,
                                    const std::string& path) {
    if (!obj.is_object() || !obj.contains(key))
        throw ConfigError("missing required field '" + path + "." + key + "'");
    return obj.at(key);
}

}  // namespace

double require_double(const nlohmann::json& obj, const std::string& key, const std::string& path) {
    const auto& value = require_field(obj, key, path);
    if (!value.is_number()) throw ConfigError("field '" + path + "." + key + "' must be a number");
    return value.get<double>();
}

long require_long(const nlohmann::json& obj, const std::string& key, const std::string& path) {
    const auto& value = require_field(obj, key, path);
    if (!value.is_number_integer())
        throw ConfigError("field '" + path + "." + key + "' must be an integer");
    return value.get<long>();
}

std::string require_string(const nlohmann::json& obj, const std::string& key,
                           const std::string& path) {
    const auto& value = require_field(obj, key, path);
    if (!value.is_string()) throw ConfigError("field '" + path + "." + key + "' must be a string");
    return value.get<std::string>();
}

double get_double(const nlohmann::json& obj, const std::string& key, double fallback) {
    if (!obj.is_object() || !obj.contains(key)) return fallback;
    return obj.at(key).get<double>();
}

long get_long(const nlohmann::json& obj, const std::string& key, long fallback) {
    if (!obj.is_object() || !obj.contains(key)) return fallback;
    return obj.at(key).get<long>();
}

std::string get_string(const nlohmann::json& obj, const std::string& key,
                       const std::string& fallback) {
    if (!obj.is_object() || !obj.contains(key)) return fallback;
    return obj.at(key).get<std::string>();
}

KernelConfig kernel_from_json(const nlohmann::json& kernel, const Interval& theta_bounds) {
    const std::string family = require_string(kernel, "family", "kernel");
    const nlohmann::json params =
        kernel.contains("params") ? kernel.at("params") : nlohmann::json::object();
    if (family == "normal") {
        return KernelConfig{KernelModel::normal_location(theta_bounds),
                            get_double(params, "variance", 1.0), kernel};
    }
    if (family == "binomial") {
        KernelConfig config{KernelModel::binomial(theta_bounds), get_double(params, "m", 1.0),
                            kernel};
        if (!(config.default_obs_param >= 0.0))
            throw ConfigError("kernel.params.m must be a nonnegative trial count");
        return config;
    }
    if (family == "poisson") {
        return KernelConfig{KernelModel::poisson(theta_bounds), 0.0, kernel};
    }
    throw ConfigError("kernel.family: unknown kernel '" + family +
                      "' (expected normal, binomial, or poisson)");
}

GridSpec grid_from_json(const nlohmann::json& grid, const std::string& family) {
    GridSpec spec;
    const bool bounded_family = family == "binomial";
    spec.bounds.lo = bounded_family ? get_double(grid, "lo", kBinomialEps)
                                    : require_double(grid, "lo", "grid");
    spec.bounds.hi = bounded_family ? get_double(grid, "hi", 1.0 - kBinomialEps)
                                    : require_double(grid, "hi", "grid");
    spec.node_count = static_cast<int>(get_long(grid, "nodes", 2000));
    const std::string rule = get_string(grid, "rule", "midpoint");
    if (rule == "midpoint")
        spec.rule = GridRule::Midpoint;
    else if (rule == "trapezoid")
        spec.rule = GridRule::Trapezoid;
    else
        throw ConfigError("grid.rule: unknown rule '" + rule + "' (expected midpoint or trapezoid)");
    spec.validate();
    return spec;
}

MixingMeasure measure_from_json(const nlohmann::json& spec, const GridSpec& grid,
                                const std::string& path) {
    const std::string type = require_string(spec, "type", path);
    if (type == "uniform") return init_uniform(grid);
    if (type == "beta")
        return init_beta(grid, require_double(spec, "a", path), require_double(spec, "b", path));
    if (type == "gaussian")
        return init_gaussian(grid, require_double(spec, "mean", path),
                             require_double(spec, "variance", path));
    if (type == "point") return point_mass(require_double(spec, "at", path));
    if (type == "spike_and_slab") {
        const double at = require_double(spec, "at", path);
        const double pi0 = require_double(spec, "pi0", path);
        const MixingMeasure slab =
            measure_from_json(require_field(spec, "slab", path), grid, path + ".slab");
        return with_atom(slab, at, pi0);
    }
    throw ConfigError(path + ".type: unknown measure type '" + type +
                      "' (expected uniform, beta, gaussian, point, or spike_and_slab)");
}

DecisionProblem problem_from_json(const nlohmann::json& problem) {
    const std::string kind = require_string(problem, "kind", "problem");
    if (kind == "estimate") return DecisionProblem::estimate();
    if (kind != "test")
        throw ConfigError("problem.kind: unknown kind '" + kind + "' (expected estimate or test)");
    const double kappa1 = require_double(problem, "kappa1", "problem");
    const double kappa2 = require_double(problem, "kappa2", "problem");
    const auto& theta0 = require_field(problem, "theta0", "problem");
    if (theta0.contains("atoms")) {
        std::vector<double> atoms;
        for (const auto& value : theta0.at("atoms")) atoms.push_back(value.get<double>());
        return DecisionProblem::test(kappa1, kappa2, atoms);
    }
    return DecisionProblem::test(kappa1, kappa2,
                                 Interval{require_double(theta0, "lo", "problem.theta0"),
                                          require_double(theta0, "hi", "problem.theta0")});
}

void require_a3_gamma(double gamma) {
    if (!(gamma > 0.5) || gamma > 1.0)
        throw ConfigError(
            "pr.gamma = " + std::to_string(gamma) +
            " violates the weight-series condition (sum w = inf, sum w^2 < inf); "
            "admissible interval is (0.5, 1]");
}

SimScenario scenario_from_json(const nlohmann::json& scenario) {
    const std::string family =
        require_string(require_field(scenario, "kernel", "scenario"), "family", "kernel");
    const GridSpec grid =
        grid_from_json(scenario.contains("grid") ? scenario.at("grid") : nlohmann::json::object(),
                       family);
    const KernelConfig kernel = kernel_from_json(scenario.at("kernel"), grid.bounds);

    const nlohmann::json pr = scenario.contains("pr") ? scenario.at("pr") : nlohmann::json::object();
    PrConfig pr_config;
    pr_config.gamma = get_double(pr, "gamma", 0.75);
    require_a3_gamma(pr_config.gamma);
    pr_config.n_permutations = static_cast<int>(get_long(pr, "permutations", 1));
    pr_config.grid = grid;

    SimScenario out{
        get_string(scenario, "name", "scenario"),
        measure_from_json(require_field(scenario, "true_f", "scenario"), grid, "true_f"),
        kernel.model,
        scenario.contains("obs_param") ? scenario.at("obs_param").get<double>()
                                       : kernel.default_obs_param,
        scenario.contains("problem") ? problem_from_json(scenario.at("problem"))
                                     : DecisionProblem::estimate(),
        measure_from_json(require_field(scenario, "f0", "scenario"), grid, "f0"),
        pr_config,
        {},
        static_cast<int>(get_long(scenario, "replications", 1)),
        static_cast<std::uint64_t>(require_long(scenario, "seed", "scenario")),
        {}};

    for (const auto& n : require_field(scenario, "sample_sizes", "scenario")) {
        if (!n.is_number_integer())
            throw ConfigError("scenario.sample_sizes must be a list of integers");
        out.sample_sizes.push_back(n.get<long>());
    }

    const nlohmann::json y_grid =
        scenario.contains("y_grid") ? scenario.at("y_grid") : nlohmann::json::object();
    out.y_quad = make_y_quadrature(out.model, out.obs_param,
                                   static_cast<int>(get_long(y_grid, "points", 4001)),
                                   get_double(y_grid, "span_sd", 8.0));
    out.validate();
    return out;
}

}  // namespace predrec::cli
