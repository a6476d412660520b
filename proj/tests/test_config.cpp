#include <catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>

#include "lbl/config.hpp"

using namespace lbl;
using nlohmann::json;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

json minimal()
{
    return json::parse(R"({
        "model": {"premium": 2.0, "sigma": 0.0, "jumps": [{"rate": 1.0, "mean": 1.0, "weight": 1.0}]},
        "params": {"q": 0.1, "r": 0.5, "alpha": 0.1, "beta": 1.5}
    })");
}

std::string error_of(const json& j)
{
    try {
        parse_config(j);
    } catch (const validation_error& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST_CASE("defaults", "[config]")
{
    auto c = parse_config(minimal());
    CHECK(c.model.premium == 2.0);
    REQUIRE(c.model.jumps.size() == 1);
    CHECK(c.model.jumps[0].phase == 1.0);
    CHECK(c.params.beta == 1.5);
    CHECK_FALSE(c.barrier.has_value());
    CHECK(c.grid.n == 0);
    CHECK(c.theta == 0.0);
    CHECK(c.simulation.dt == SimulationConfig{}.dt);
    CHECK(c.simulation.n_paths == SimulationConfig{}.n_paths);
    CHECK(c.x0.empty());
    CHECK(c.tolerance == 0.0);
}

TEST_CASE("all sections", "[config]")
{
    auto j = minimal();
    j["barrier"] = {{"b1", 0.3}, {"b2", 1.8}};
    j["grid"] = {{"min", 0.0}, {"max", 6.0}, {"n", 61}};
    j["scale"] = {{"theta", 0.5}};
    j["simulation"] = {{"dt", 5e-4}, {"n_paths", 500}, {"seed", 9}, {"x0", {0.0, 1.0}}};
    j["tolerance"] = 1e-6;
    auto c = parse_config(j);
    REQUIRE(c.barrier.has_value());
    CHECK(c.barrier->b2 == 1.8);
    CHECK(c.grid.n == 61);
    CHECK(c.grid.hi == 6.0);
    CHECK(c.theta == 0.5);
    CHECK(c.simulation.dt == 5e-4);
    CHECK(c.simulation.n_paths == 500);
    CHECK(c.simulation.seed == 9);
    CHECK(c.x0 == std::vector<double>{0.0, 1.0});
    CHECK(c.tolerance == 1e-6);
}

TEST_CASE("premium and drift", "[config]")
{
    auto j = minimal();
    j["model"].erase("premium");
    j["model"]["drift"] = 2.0;
    auto c = parse_config(j);
    CHECK_THAT(c.model.premium, WithinAbs(2.0 - small_jump_first_moment(c.model.jumps), 1e-15));
    j["model"]["premium"] = 2.0;
    CHECK_THAT(error_of(j), ContainsSubstring("exactly one"));
    j["model"].erase("premium");
    j["model"].erase("drift");
    CHECK_THAT(error_of(j), ContainsSubstring("exactly one"));
}

TEST_CASE("field-level messages", "[config]")
{
    auto j = minimal();
    j["model"]["jumps"][0]["mean"] = -1.0;
    CHECK_THAT(error_of(j), ContainsSubstring("model.jumps[0].mean"));

    j = minimal();
    j["foo"] = 1;
    CHECK_THAT(error_of(j), ContainsSubstring("config.foo: unknown key"));

    j = minimal();
    j["model"]["jumps"][0]["shape"] = 2;
    CHECK_THAT(error_of(j), ContainsSubstring("model.jumps[0].shape"));

    j = minimal();
    j["params"]["beta"] = 0.9;
    CHECK_THAT(error_of(j), ContainsSubstring("params.beta"));

    j = minimal();
    j["params"].erase("q");
    CHECK_THAT(error_of(j), ContainsSubstring("params.q: missing"));

    j = minimal();
    j["params"]["r"] = "fast";
    CHECK_THAT(error_of(j), ContainsSubstring("params.r: expected a number"));

    j = minimal();
    j["barrier"] = {{"b1", 1.0}, {"b2", 0.5}};
    CHECK_THAT(error_of(j), ContainsSubstring("barrier.b2"));

    j = minimal();
    j["simulation"] = {{"dt", 0.05}};
    CHECK_THAT(error_of(j), ContainsSubstring("simulation"));

    j = minimal();
    j["simulation"] = {{"n_paths", 10}};
    CHECK_THAT(error_of(j), ContainsSubstring("simulation"));

    j = minimal();
    j["model"]["jumps"][0]["weight"] = 0.5;
    CHECK_THAT(error_of(j), ContainsSubstring("weights not normalized"));

    j = minimal();
    j["model"]["premium"] = -1.0;
    j["model"]["jumps"] = json::array();
    CHECK_THAT(error_of(j), ContainsSubstring("monotone"));

    j = minimal();
    j.erase("model");
    CHECK_THAT(error_of(j), ContainsSubstring("config.model"));
}

TEST_CASE("loading files", "[config]")
{
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), validation_error);
    std::string path = "lbl_test_config_bad.json";
    {
        std::ofstream out(path);
        out << "{ not json";
    }
    CHECK_THROWS_WITH(load_config(path), ContainsSubstring("malformed JSON"));
    {
        std::ofstream out(path);
        out << minimal().dump();
    }
    CHECK(load_config(path).params.q == 0.1);
    std::remove(path.c_str());
}
