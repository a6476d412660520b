// lbl: command-line front end for the periodic barrier toolkit.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lbl/barrier_solver.hpp"
#include "lbl/config.hpp"
#include "lbl/fluctuation.hpp"
#include "lbl/simulator.hpp"
#include "lbl/value_function.hpp"
#include "lbl/verification.hpp"

using nlohmann::json;
using namespace lbl;

namespace {

enum Exit { Ok = 0, Invalid = 1, NoConvergence = 2, Violation = 3 };

struct Flags {
    std::string config;
    std::string out;
    std::string grid;
    std::uint64_t seed = 0;
    long paths = 0;
    double tol = 0.0;
    bool has_seed = false;
};

std::string fmt(double v)
{
    if (std::isnan(v)) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void emit(const Flags& f, const std::string& name, const std::string& body)
{
    if (f.out.empty()) {
        std::cout << body;
        return;
    }
    std::filesystem::create_directories(f.out);
    auto path = std::filesystem::path(f.out) / name;
    std::ofstream o(path);
    if (!o) throw validation_error("--out: cannot write " + path.string());
    o << body;
    std::cerr << "wrote " << path.string() << "\n";
}

void emit_json(const Flags& f, const std::string& name, const json& j) { emit(f, name, j.dump(2) + "\n"); }

json load_json(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw validation_error("config: cannot read '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw validation_error(std::string("config: malformed JSON: ") + e.what());
    }
}

RunConfig load(const Flags& f)
{
    RunConfig c = parse_config(load_json(f.config));
    if (f.paths > 0) c.simulation.n_paths = f.paths;
    if (f.has_seed) c.simulation.seed = f.seed;
    if (!f.grid.empty()) {
        std::vector<std::string> parts;
        std::stringstream ss(f.grid);
        for (std::string t; std::getline(ss, t, ':');) parts.push_back(t);
        if (parts.size() != 3) throw validation_error("--grid: expected a:b:n");
        try {
            c.grid.lo = std::stod(parts[0]);
            c.grid.hi = std::stod(parts[1]);
            long n = std::stol(parts[2]);
            if (n < 2) throw validation_error("--grid: n must be >= 2");
            c.grid.n = std::size_t(n);
        } catch (const std::logic_error&) {
            throw validation_error("--grid: expected numbers a:b:n");
        }
        if (!(c.grid.hi > c.grid.lo)) throw validation_error("--grid: b must exceed a");
    }
    require_valid(c.simulation, c.params.q);
    return c;
}

std::vector<double> grid_or(const RunConfig& c, double lo, double hi, std::size_t n)
{
    if (c.grid.n >= 2) return linspace(c.grid.lo, c.grid.hi > 0.0 ? c.grid.hi : hi, c.grid.n);
    return linspace(lo, hi, n);
}

json candidate_json(const BarrierCandidate& c)
{
    return {{"b1_star", c.b1_star},
            {"b2_star", c.b2_star},
            {"case", to_string(c.kind)},
            {"b_star_r", c.b_star_r},
            {"a_star", c.a_star},
            {"u_star", c.u_star},
            {"residuals", {{"smooth_fit", c.smooth_fit_residual}, {"first_order", c.first_order_residual}}}};
}

int cmd_model_validate(const Flags& f)
{
    json j = load_json(f.config);
    if (!j.contains("model")) throw validation_error("config.model: missing");
    LevyModel m = detail::parse_model(j.at("model"));
    auto diag = validate(m);
    json out = {{"valid", diag.empty()}, {"diagnostics", diag}};
    if (diag.empty()) {
        out["variation"] = m.variation() == Variation::Bounded ? "BoundedVariation" : "UnboundedVariation";
        out["premium"] = m.premium;
        out["drift"] = m.drift();
        out["sigma"] = m.sigma;
        out["jump_intensity"] = m.jump_intensity();
        out["mean_increment"] = mean_increment(m);
    }
    emit_json(f, "model.json", out);
    for (const auto& d : diag) std::cerr << "model: " << d << "\n";
    return diag.empty() ? Ok : Invalid;
}

int cmd_scale_eval(const Flags& f)
{
    RunConfig c = load(f);
    ScaleContext s(c.model, c.params.q);
    std::string csv = "x,W,W_prime,Wbar,Wbarbar,Z,Zbar,Z_theta\n";
    for (double x : grid_or(c, 0.0, 5.0, 51)) {
        csv += fmt(x) + "," + fmt(s.w(x)) + "," + fmt(x < 0.0 ? 0.0 : s.w_prime(x)) + "," + fmt(s.wbar(x)) + "," +
               fmt(s.wbarbar(x)) + "," + fmt(s.z(x)) + "," + fmt(s.zbar(x)) + "," + fmt(s.z_theta(x, c.theta)) + "\n";
    }
    emit(f, "scale.csv", csv);
    return Ok;
}

int cmd_solve(const Flags& f)
{
    RunConfig c = load(f);
    ScalePair pair(c.model, c.params.q, c.params.r);
    auto cand = candidate(pair, c.params);
    json out = candidate_json(cand);
    out["phi_q"] = pair.q().phi();
    out["phi_q_plus_r"] = pair.phi_qr();
    out["value_at_zero"] = v_alpha(pair, c.params, cand.barriers(), 0.0);
    emit_json(f, "solve.json", out);
    return Ok;
}

Barriers barriers_for(const RunConfig& c, const ScalePair& pair)
{
    return c.barrier ? *c.barrier : candidate(pair, c.params).barriers();
}

int cmd_value_eval(const Flags& f)
{
    RunConfig c = load(f);
    ScalePair pair(c.model, c.params.q, c.params.r);
    Barriers b = barriers_for(c, pair);
    auto grid = c.grid.n >= 2 ? grid_or(c, 0.0, 5.0 * b.b2, 0) : default_grid(b, 5.0 * b.b2);
    auto prof = hjb_check(pair, c.params, b, grid, c.tolerance > 0.0 ? c.tolerance : 1e-5);
    std::string csv = "x,v,v_prime,v_second,hjb_residual\n";
    for (std::size_t i = 0; i < prof.grid.size(); ++i) {
        double v2 = prof.v_second.empty() ? std::nan("") : prof.v_second[i];
        csv += fmt(prof.grid[i]) + "," + fmt(prof.v[i]) + "," + fmt(prof.v_prime[i]) + "," + fmt(v2) + "," +
               fmt(prof.hjb_residual[i]) + "\n";
    }
    emit(f, "value.csv", csv);
    return Ok;
}

int cmd_verify_hjb(const Flags& f)
{
    RunConfig c = load(f);
    double tol = f.tol > 0.0 ? f.tol : c.tolerance > 0.0 ? c.tolerance : 1e-5;
    ScalePair pair(c.model, c.params.q, c.params.r);
    auto cand = candidate(pair, c.params);
    Barriers b = cand.barriers();
    auto grid = c.grid.n >= 2 ? grid_or(c, 0.0, 5.0 * b.b2, 0) : default_grid(b, 5.0 * b.b2);
    auto prof = hjb_check(pair, c.params, b, grid, tol);
    auto bands = p2_bands(pair, c.params, cand, linspace(1e-3, 5.0 * b.b2, 200));
    auto diag = proof_diagnostics(pair, c.params, cand, b.b2 + 40.0);

    bool eq16 = cand.kind != BarrierCase::InteriorFirstOrder || bands.max_eq16_gap <= 1e-8;
    bool diag_ok = diag.monotone_ok && diag.gap_at_xmax <= 1e-3 && diag.limit_gap <= 1e-4;
    bool ok = prof.passed && bands.ok() && eq16 && diag_ok;
    json out = {{"candidate", candidate_json(cand)},
                {"tolerance", tol},
                {"grid_points", prof.grid.size()},
                {"max_abs_residual_below_b2", prof.max_below_b2},
                {"max_residual_above_b2", prof.max_above_b2},
                {"max_closed_form_gap", prof.max_closed_form_gap},
                {"worst_x", prof.worst_x},
                {"max_v_prime", prof.max_v_prime},
                {"v_prime_le_beta", prof.v_prime_bounded},
                {"nondecreasing", prof.nondecreasing},
                {"bands", {{"lower_ok", bands.lower_band_ok}, {"upper_ok", bands.upper_band_ok}, {"max_eq16_gap", bands.max_eq16_gap}}},
                {"proof_diagnostics",
                 {{"monotone", diag.monotone_ok}, {"gap_at_xmax", diag.gap_at_xmax}, {"limit_gap", diag.limit_gap}, {"a1", diag.a1}, {"a2", diag.a2}}},
                {"passed", ok}};
    emit_json(f, "verify_hjb.json", out);
    if (!ok) std::cerr << "verify-hjb: violation (worst at x=" << prof.worst_x << ")\n";
    return ok ? Ok : Violation;
}

int cmd_verify_identities(const Flags& f)
{
    RunConfig c = load(f);
    ScalePair pair(c.model, c.params.q, c.params.r);
    auto cand = candidate(pair, c.params);
    auto rep = identity_suite(pair, c.params, cand, f.tol > 0.0 ? f.tol : 1.0);
    json checks = json::object();
    for (const auto& k : rep.checks) {
        checks[k.name] = {{"max_residual", k.residual}, {"tolerance", k.tolerance}, {"passed", k.passed()}};
        if (!k.passed()) std::cerr << "verify-identities: " << k.name << " residual " << k.residual << "\n";
    }
    emit_json(f, "verify_identities.json", {{"candidate", candidate_json(cand)}, {"identities", checks}, {"passed", rep.ok()}});
    return rep.ok() ? Ok : Violation;
}

int cmd_simulate(const Flags& f)
{
    RunConfig c = load(f);
    ScalePair pair(c.model, c.params.q, c.params.r);
    Barriers b = barriers_for(c, pair);
    PeriodicValue v(pair, c.params, b);
    auto starts = c.x0.empty() ? std::vector<double>{0.0, b.b1, b.b2, b.b2 + 1.0} : c.x0;
    json est = json::array();
    for (double x0 : starts) {
        auto e = simulate_npv(c.model, c.params, b, x0, c.simulation);
        json comp = json::object();
        for (const auto& [k, val] : e.components) comp[k] = {{"mean", val.mean}, {"std_error", val.std_error}};
        double an = v.value(x0);
        est.push_back({{"x0", x0},
                       {"mean", e.mean},
                       {"std_error", e.std_error},
                       {"analytic", an},
                       {"z_score", e.std_error > 0.0 ? (e.mean - an) / e.std_error : 0.0},
                       {"components", comp}});
    }
    const auto& s = c.simulation;
    json cfg = {{"dt", s.dt}, {"horizon", effective_horizon(s, c.params.q)}, {"n_paths", s.n_paths}, {"seed", s.seed},
                {"tail_tol", s.tail_tol}};
    emit_json(f, "simulate.json", {{"barrier", {{"b1", b.b1}, {"b2", b.b2}}}, {"config", cfg}, {"estimates", est}});
    return Ok;
}

/// Accepts "scale eval" as well as "scale-eval".
std::vector<std::string> join_two_word(int argc, char** argv)
{
    std::vector<std::string> a(argv, argv + argc);
    static const std::vector<std::pair<std::string, std::string>> pairs = {
        {"model", "validate"}, {"scale", "eval"}, {"value", "eval"}, {"verify", "hjb"}, {"verify", "identities"}};
    if (a.size() >= 3)
        for (const auto& [x, y] : pairs)
            if (a[1] == x && a[2] == y) {
                a[1] = x + "-" + y;
                a.erase(a.begin() + 2);
                break;
            }
    return a;
}

} // namespace

int main(int argc, char** argv)
{
    auto args = join_two_word(argc, argv);
    std::vector<char*> av;
    for (auto& s : args) av.push_back(s.data());

    CLI::App app{"Optimal periodic barrier dividends with capital injection"};
    app.require_subcommand(1);
    Flags f;
    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", f.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", f.out, "Output directory (stdout if omitted)");
        sub->add_option("--grid", f.grid, "Evaluation grid a:b:n");
        sub->add_option("--tol", f.tol, "Verification tolerance");
        sub->add_option("--seed", f.seed, "RNG seed")->each([&](const std::string&) { f.has_seed = true; });
        sub->add_option("--paths", f.paths, "Monte Carlo paths");
    };
    struct Cmd {
        const char* name;
        const char* help;
        int (*run)(const Flags&);
    };
    const Cmd cmds[] = {{"model-validate", "Check model invariants", cmd_model_validate},
                        {"scale-eval", "Tabulate the scale functions (CSV)", cmd_scale_eval},
                        {"solve", "Optimal barrier pair (JSON)", cmd_solve},
                        {"value-eval", "Value function profile (CSV)", cmd_value_eval},
                        {"verify-hjb", "Variational inequality and derivative bands", cmd_verify_hjb},
                        {"verify-identities", "Closed forms against independent oracles", cmd_verify_identities},
                        {"simulate", "Monte Carlo NPV against the closed form", cmd_simulate}};
    std::vector<CLI::App*> subs;
    for (const auto& c : cmds) {
        subs.push_back(app.add_subcommand(c.name, c.help));
        common(subs.back());
    }
    try {
        app.parse(int(av.size()), av.data());
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? Ok : Invalid;
    }
    try {
        for (std::size_t i = 0; i < subs.size(); ++i)
            if (subs[i]->parsed()) return cmds[i].run(f);
    } catch (const validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return Invalid;
    } catch (const lbl::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return Invalid;
    } catch (const convergence_error& e) {
        std::cerr << "non-convergence: " << e.what() << "\n";
        return NoConvergence;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return NoConvergence;
    }
    return Invalid;
}
