#ifndef LBL_CONFIG_HPP
#define LBL_CONFIG_HPP

#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "barriers.hpp"
#include "error.hpp"
#include "levy_model.hpp"
#include "simulator.hpp"

namespace lbl {

struct GridSpec {
    double lo = 0.0;
    double hi = 0.0; ///< 0 selects 5 b2*
    std::size_t n = 0; ///< 0 selects the clustered default grid
};

/**
 * \brief Parsed and validated run configuration.
 *
 * Schema (all sections but "model" and "params" optional):
 *
 *     {
 *       "model":      {"premium" | "drift": c, "sigma": s, "jumps": [{"rate", "mean", "weight"}]},
 *       "params":     {"q", "r", "alpha", "beta"},
 *       "barrier":    {"b1", "b2"},
 *       "grid":       {"min", "max", "n"},
 *       "scale":      {"theta"},
 *       "simulation": {"dt", "horizon", "n_paths", "seed", "tail_tol", "x0": [..]},
 *       "tolerance":  t
 *     }
 *
 * "premium" is the bounded-variation drift c; "drift" is the Levy-Khintchine
 * drift mu. Each jump entry contributes intensity rate * weight with
 * exponential sizes of the given mean.
 */
struct RunConfig {
    LevyModel model;
    ProblemParams params;
    std::optional<Barriers> barrier;
    GridSpec grid;
    double theta = 0.0;
    SimulationConfig simulation;
    std::vector<double> x0;
    double tolerance = 0.0; ///< 0 keeps the per-check defaults
};

namespace detail {

using nlohmann::json;

inline void reject_unknown(const json& j, const std::string& where, std::initializer_list<const char*> keys)
{
    if (!j.is_object()) throw validation_error(where + ": expected an object");
    std::set<std::string> ok(keys.begin(), keys.end());
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!ok.count(it.key())) throw validation_error(where + "." + it.key() + ": unknown key");
}

inline double number(const json& j, const std::string& where, const char* key)
{
    if (!j.contains(key)) throw validation_error(where + "." + key + ": missing");
    const json& v = j.at(key);
    if (!v.is_number()) throw validation_error(where + "." + key + ": expected a number");
    return v.get<double>();
}

inline double number_or(const json& j, const std::string& where, const char* key, double dflt)
{
    return j.contains(key) ? number(j, where, key) : dflt;
}

inline void require(bool ok, const std::string& field, const char* msg)
{
    if (!ok) throw validation_error(field + ": " + msg);
}

/// Field-level checks only; model invariants are left to validate().
inline LevyModel parse_model(const json& j)
{
    reject_unknown(j, "model", {"drift", "premium", "sigma", "jumps"});
    bool has_c = j.contains("premium"), has_mu = j.contains("drift");
    require(has_c != has_mu, "model", "exactly one of 'premium' and 'drift' is required");
    double sigma = number_or(j, "model", "sigma", 0.0);
    require(sigma >= 0.0, "model.sigma", "must be >= 0");
    std::vector<JumpComponent> jumps;
    if (j.contains("jumps")) {
        require(j.at("jumps").is_array(), "model.jumps", "expected an array");
        for (std::size_t i = 0; i < j.at("jumps").size(); ++i) {
            std::string w = "model.jumps[" + std::to_string(i) + "]";
            const json& e = j.at("jumps")[i];
            reject_unknown(e, w, {"rate", "mean", "weight"});
            double rate = number(e, w, "rate"), mean = number(e, w, "mean"), weight = number_or(e, w, "weight", 1.0);
            require(rate > 0.0, w + ".rate", "must be > 0");
            require(mean > 0.0, w + ".mean", "must be > 0");
            require(weight > 0.0, w + ".weight", "must be > 0");
            jumps.push_back({rate, 1.0 / mean, weight});
        }
    }
    double c = has_c ? number(j, "model", "premium") : number(j, "model", "drift") - small_jump_first_moment(jumps);
    return LevyModel{c, sigma, jumps};
}

inline ProblemParams parse_params(const json& j)
{
    reject_unknown(j, "params", {"q", "r", "alpha", "beta"});
    ProblemParams p{number(j, "params", "q"), number(j, "params", "r"), number(j, "params", "alpha"),
                    number(j, "params", "beta")};
    require(p.q > 0.0, "params.q", "must be > 0");
    require(p.r > 0.0, "params.r", "must be > 0");
    require(p.alpha > 0.0, "params.alpha", "must be > 0");
    require(p.beta > 1.0, "params.beta", "must be > 1");
    return p;
}

} // namespace detail

/// Parses a configuration document; every problem is reported as a validation_error naming the field.
inline RunConfig parse_config(const nlohmann::json& j)
{
    using detail::number;
    using detail::number_or;
    using detail::require;
    detail::reject_unknown(j, "config", {"model", "params", "barrier", "grid", "scale", "simulation", "tolerance"});
    require(j.contains("model"), "config.model", "missing");
    require(j.contains("params"), "config.params", "missing");
    RunConfig c;
    c.model = detail::parse_model(j.at("model"));
    for (const auto& msg : validate(c.model)) throw validation_error("model: " + msg);
    c.params = detail::parse_params(j.at("params"));

    if (j.contains("barrier")) {
        const auto& b = j.at("barrier");
        detail::reject_unknown(b, "barrier", {"b1", "b2"});
        Barriers bb{number(b, "barrier", "b1"), number(b, "barrier", "b2")};
        require(bb.b1 >= 0.0, "barrier.b1", "must be >= 0");
        require(bb.b2 > bb.b1, "barrier.b2", "must exceed b1");
        c.barrier = bb;
    }
    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        detail::reject_unknown(g, "grid", {"min", "max", "n"});
        c.grid.lo = number_or(g, "grid", "min", 0.0);
        c.grid.hi = number_or(g, "grid", "max", 0.0);
        double n = number_or(g, "grid", "n", 0.0);
        require(n >= 0.0 && n == std::floor(n), "grid.n", "must be a nonnegative integer");
        c.grid.n = std::size_t(n);
        require(c.grid.hi == 0.0 || c.grid.hi > c.grid.lo, "grid.max", "must exceed grid.min");
    }
    if (j.contains("scale")) {
        detail::reject_unknown(j.at("scale"), "scale", {"theta"});
        c.theta = number_or(j.at("scale"), "scale", "theta", 0.0);
        require(c.theta >= 0.0, "scale.theta", "must be >= 0");
    }
    if (j.contains("simulation")) {
        const auto& s = j.at("simulation");
        detail::reject_unknown(s, "simulation", {"dt", "horizon", "n_paths", "seed", "tail_tol", "x0"});
        auto& sc = c.simulation;
        sc.dt = number_or(s, "simulation", "dt", sc.dt);
        sc.horizon = number_or(s, "simulation", "horizon", sc.horizon);
        double n = number_or(s, "simulation", "n_paths", double(sc.n_paths));
        require(n == std::floor(n), "simulation.n_paths", "must be an integer");
        sc.n_paths = long(n);
        if (s.contains("seed")) {
            require(s.at("seed").is_number_integer() && s.at("seed").get<long long>() >= 0, "simulation.seed", "must be a nonnegative integer");
            sc.seed = s.at("seed").get<std::uint64_t>();
        }
        sc.tail_tol = number_or(s, "simulation", "tail_tol", sc.tail_tol);
        if (s.contains("x0")) {
            require(s.at("x0").is_array(), "simulation.x0", "expected an array");
            for (const auto& v : s.at("x0")) {
                require(v.is_number(), "simulation.x0", "expected numbers");
                c.x0.push_back(v.get<double>());
            }
        }
        require_valid(sc, c.params.q);
    }
    if (j.contains("tolerance")) {
        c.tolerance = number(j, "config", "tolerance");
        require(c.tolerance > 0.0, "config.tolerance", "must be > 0");
    }
    return c;
}

inline RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw validation_error("config: cannot read '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw validation_error(std::string("config: malformed JSON: ") + e.what());
    }
    return parse_config(j);
}

} // namespace lbl

#endif
