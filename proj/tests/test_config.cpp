#include <doctest.h>

#include <string>

#include "config.hpp"
#include "predrec/errors.hpp"

using namespace predrec;
using predrec::cli::toml_to_json;

TEST_CASE("toml subset: tables, scalars, arrays, comments") {
    const std::string text =
        "# study configuration\n"
        "seed = 42\n"
        "label = \"pilot run\"\n"
        "ratio = 1e-4\n"
        "flag = true\n"
        "sizes = [50, 500, 5000]\n"
        "\n"
        "[grid]\n"
        "nodes = 2000   # resolution\n"
        "lo = 0.0001\n"
        "\n"
        "[pr.inner]\n"
        "gamma = 0.9\n";
    const auto json = toml_to_json(text);
    CHECK(json.at("seed").get<long>() == 42);
    CHECK(json.at("label").get<std::string>() == "pilot run");
    CHECK(json.at("ratio").get<double>() == doctest::Approx(1e-4));
    CHECK(json.at("flag").get<bool>());
    CHECK(json.at("sizes").size() == 3);
    CHECK(json.at("sizes")[2].get<long>() == 5000);
    CHECK(json.at("grid").at("nodes").get<long>() == 2000);
    CHECK(json.at("pr").at("inner").at("gamma").get<double>() == doctest::Approx(0.9));
}

TEST_CASE("toml subset: parse errors carry line numbers") {
    try {
        toml_to_json("good = 1\nbad line without equals\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    CHECK_THROWS_AS(toml_to_json("x = \"unterminated\n"), ConfigError);
    CHECK_THROWS_AS(toml_to_json("[broken\nx = 1\n"), ConfigError);
}

TEST_CASE("unknown kernel family names the field") {
    const nlohmann::json kernel{{"family", "cauchy"}};
    try {
        cli::kernel_from_json(kernel, Interval{0.0, 1.0});
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string what = e.what();
        CHECK(what.find("kernel.family") != std::string::npos);
        CHECK(what.find("cauchy") != std::string::npos);
    }
}

TEST_CASE("gamma outside the square-summable interval is rejected") {
    try {
        cli::require_a3_gamma(1.2);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("(0.5, 1]") != std::string::npos);
    }
    CHECK_THROWS_AS(cli::require_a3_gamma(0.5), ConfigError);
    CHECK_NOTHROW(cli::require_a3_gamma(0.75));
    CHECK_NOTHROW(cli::require_a3_gamma(1.0));
}

TEST_CASE("scenario json builds a valid scenario") {
    const nlohmann::json scenario_json{
        {"name", "smoke"},
        {"seed", 7},
        {"replications", 2},
        {"sample_sizes", {50, 100}},
        {"kernel", {{"family", "binomial"}, {"params", {{"m", 25}}}}},
        {"grid", {{"nodes", 200}}},
        {"true_f", {{"type", "beta"}, {"a", 30.0}, {"b", 120.0}}},
        {"f0", {{"type", "uniform"}}},
        {"pr", {{"gamma", 0.75}, {"permutations", 1}}}};
    const SimScenario scenario = cli::scenario_from_json(scenario_json);
    CHECK(scenario.name == "smoke");
    CHECK(scenario.obs_param == 25.0);
    CHECK(scenario.y_quad.discrete);
    CHECK(scenario.y_quad.y.size() == 26);
    CHECK(scenario.sample_sizes == std::vector<long>{50, 100});
    CHECK(scenario.problem.kind == ProblemKind::Estimate);
}

TEST_CASE("scenario json: missing fields and bad measure types are named") {
    nlohmann::json scenario{{"seed", 1},
                            {"sample_sizes", {10}},
                            {"kernel", {{"family", "binomial"}}},
                            {"true_f", {{"type", "beta"}, {"a", 2.0}, {"b", 2.0}}}};
    try {
        cli::scenario_from_json(scenario);  // no f0
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("scenario.f0") != std::string::npos);
    }
    scenario["f0"] = {{"type", "triangular"}};
    try {
        cli::scenario_from_json(scenario);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("f0.type") != std::string::npos);
    }
}

TEST_CASE("spike-and-slab measures carry the atom") {
    const GridSpec grid{100, Interval{-3.0, 3.0}, GridRule::Midpoint};
    const nlohmann::json spec{{"type", "spike_and_slab"},
                              {"at", 0.0},
                              {"pi0", 0.8},
                              {"slab", {{"type", "gaussian"}, {"mean", 0.0}, {"variance", 1.0}}}};
    const MixingMeasure f = cli::measure_from_json(spec, grid, "true_f");
    REQUIRE(f.atoms().size() == 1);
    CHECK(f.atoms()[0].location == 0.0);
    CHECK(f.atoms()[0].mass == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(f.total_mass() == doctest::Approx(1.0).epsilon(1e-10));
}
