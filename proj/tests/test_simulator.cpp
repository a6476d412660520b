#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>

#include "lbl/barrier_solver.hpp"
#include "lbl/fluctuation.hpp"
#include "lbl/simulator.hpp"
#include "lbl/value_function.hpp"

using namespace lbl;
using Catch::Matchers::WithinAbs;

namespace {

LevyModel bm() { return LevyModel::from_premium(0.5, std::sqrt(2.0), {}); }
LevyModel cl() { return LevyModel::from_premium(2.0, 0.0, {{1.0, 1.0, 1.0}}); }
LevyModel jd() { return LevyModel::from_premium(1.0, 1.0, {{0.5, 2.0, 1.0}}); }

const ProblemParams base{0.1, 0.5, 0.1, 1.5};

SimulationConfig cfg(long n, std::uint64_t seed = 11)
{
    SimulationConfig c;
    c.n_paths = n;
    c.seed = seed;
    return c;
}

void within_3se(double mc, double se, double exact)
{
    INFO("mc " << mc << " se " << se << " exact " << exact);
    if (se == 0.0) CHECK_THAT(mc, WithinAbs(exact, 1e-10));
    else CHECK(std::abs(mc - exact) <= 3.0 * se);
}

} // namespace

TEST_CASE("configuration checks", "[sim]")
{
    auto c = cfg(1000);
    CHECK_NOTHROW(require_valid(c, 0.1));
    c.dt = 0.02;
    CHECK_THROWS_AS(require_valid(c, 0.1), validation_error);
    c = cfg(50);
    CHECK_THROWS_AS(require_valid(c, 0.1), validation_error);
    c = cfg(1000);
    c.horizon = 10.0;
    CHECK_THROWS_AS(require_valid(c, 0.1), validation_error);
    CHECK_THAT(effective_horizon(cfg(1000), 0.1), WithinAbs(-std::log(1e-6) / 0.1, 1e-12));
    CHECK_THROWS_AS(simulate_npv(bm(), base, {1.0, 0.5}, 0.0, cfg(1000)), validation_error);
}

TEST_CASE("reproducible and independent of the thread count", "[sim]")
{
    auto run = [] { return simulate_npv(jd(), base, {0.7, 1.7}, 0.5, cfg(2000, 99)); };
    setenv("LBL_THREADS", "1", 1);
    auto a = run();
    setenv("LBL_THREADS", "4", 1);
    auto b = run();
    unsetenv("LBL_THREADS");
    auto c = run();
    CHECK(a.mean == b.mean);
    CHECK(a.std_error == b.std_error);
    CHECK(a.mean == c.mean);
    auto d = simulate_npv(jd(), base, {0.7, 1.7}, 0.5, cfg(2000, 100));
    CHECK(a.mean != d.mean);
}

TEST_CASE("NPV components add up and match the closed form", "[sim]")
{
    for (const auto& m : {bm(), cl(), jd()}) {
        ScalePair pair(m, base.q, base.r);
        Barriers b = candidate(pair, base).barriers();
        PeriodicValue v(pair, base, b);
        ParisianIdentities par(pair, base, b);
        for (double x0 : {0.0, b.b2 + 1.0}) {
            auto e = simulate_npv(m, base, b, x0, cfg(20000));
            const auto& cp = e.components;
            CHECK(e.std_error > 0.0);
            CHECK_THAT(e.mean, WithinAbs(cp.at("dividends").mean - base.alpha * cp.at("fixed_costs").mean -
                                             base.beta * cp.at("injections").mean,
                                         1e-9));
            within_3se(e.mean, e.std_error, v.value(x0));
            within_3se(cp.at("injections").mean, cp.at("injections").std_error, par.injection_part(x0));
            double div = cp.at("dividends").mean - base.alpha * cp.at("fixed_costs").mean;
            double div_se = std::hypot(cp.at("dividends").std_error, base.alpha * cp.at("fixed_costs").std_error);
            within_3se(div, div_se, par.dividend_part(x0));
        }
    }
}

TEST_CASE("zero-cost strategy", "[sim]")
{
    ProblemParams p{0.1, 0.5, 1e-12, 1.5};
    ScalePair pair(jd(), p.q, p.r);
    double b2 = 1.5;
    auto e = simulate_npv(jd(), p, {b2 * (1.0 - 1e-12), b2}, 0.5, cfg(20000));
    within_3se(e.mean, e.std_error, v_zero(pair, p, b2, 0.5));
}

TEST_CASE("standard error scaling", "[sim]")
{
    auto s1 = simulate_npv(cl(), base, {0.3, 1.8}, 1.0, cfg(10000, 5)).std_error;
    auto s2 = simulate_npv(cl(), base, {0.3, 1.8}, 1.0, cfg(20000, 5)).std_error;
    auto s4 = simulate_npv(cl(), base, {0.3, 1.8}, 1.0, cfg(40000, 5)).std_error;
    CHECK(std::abs(s1 / s4 - 2.0) <= 0.2 * 2.0);
    CHECK(std::abs(s1 / s2 - std::sqrt(2.0)) <= 0.2 * std::sqrt(2.0));
}

TEST_CASE("grid step has no visible effect on the reflected NPV", "[sim]")
{
    ScalePair pair(bm(), base.q, base.r);
    Barriers b = candidate(pair, base).barriers();
    auto c1 = cfg(20000, 3), c2 = cfg(20000, 3);
    c2.dt = 5e-4;
    auto e1 = simulate_npv(bm(), base, b, 0.0, c1), e2 = simulate_npv(bm(), base, b, 0.0, c2);
    CHECK(std::abs(e1.mean - e2.mean) < e1.std_error);
}

TEST_CASE("Parisian down-crossing", "[sim]")
{
    for (const auto& m : {bm(), cl(), jd()}) {
        ScalePair pair(m, base.q, base.r);
        Barriers b = candidate(pair, base).barriers();
        ParisianIdentities par(pair, base, b);
        for (double x0 : {0.5 * b.b1 + 0.1, b.b2 + 1.0}) {
            auto e = simulate_parisian_down_crossing(m, base, b, x0, 0.0, cfg(20000));
            CHECK(e.mean >= 0.0);
            CHECK(e.mean <= 1.0);
            within_3se(e.mean, e.std_error, par.down_laplace_zero(x0));
            const auto& pos = e.components.at("position_at_crossing");
            within_3se(pos.mean, pos.std_error, par.position_at_crossing(x0));
            auto t = simulate_parisian_down_crossing(m, base, b, x0, 0.6, cfg(20000));
            within_3se(t.mean, t.std_error, par.down_laplace(x0, 0.6));
        }
    }
    auto far = simulate_parisian_down_crossing(LevyModel::from_premium(5.0, 0.3, {}), base, {20.0, 30.0}, 40.0, 0.0, cfg(1000));
    CHECK(far.mean < 1e-6);
}

TEST_CASE("two-sided exit", "[sim]")
{
    for (const auto& m : {bm(), cl(), jd()}) {
        ScaleContext s(m, base.q);
        auto top = simulate_exit_times(m, base, 3.0, 3.0, 0.5, 0.0, cfg(200));
        CHECK(top.mean == 1.0);
        CHECK(top.std_error == 0.0);
        auto e = simulate_exit_times(m, base, 1.5, 3.0, 0.5, 0.7, cfg(20000));
        auto ex = two_sided_exit(s, 1.5, 3.0, 0.5, 0.7);
        within_3se(e.mean, e.std_error, ex.up);
        within_3se(e.components.at("down").mean, e.components.at("down").std_error, ex.down);
    }
    CHECK_THROWS_AS(simulate_exit_times(cl(), base, 4.0, 3.0, 0.5, 0.0, cfg(200)), validation_error);
}

TEST_CASE("bounded variation crosses by a jump with a spread of overshoots", "[sim]")
{
    PathPolicy pol;
    pol.kill_below = true;
    pol.lower = 0.5;
    pol.stop_above = true;
    pol.upper = 3.0;
    auto r = simulate_functional<3>(cl(), pol, base.q, 1.0, cfg(20000), [](const PathOutcome& o) {
        bool down = o.stop == StopKind::Lower;
        double under = down ? 0.5 - o.stop_position : 0.0;
        return std::array<double, 3>{down ? 1.0 : 0.0, under, under * under};
    });
    REQUIRE(r[0].mean > 0.05);
    double mean = r[1].mean / r[0].mean, second = r[2].mean / r[0].mean;
    CHECK(mean > 0.1);
    CHECK(second - mean * mean > 0.1);
    // overshoot of an exponential jump is exponential with the same mean
    CHECK_THAT(mean, WithinAbs(1.0, 0.05));
}

TEST_CASE("reflected process up to a level", "[sim]")
{
    for (const auto& m : {bm(), cl(), jd()}) {
        ScaleContext s(m, base.q);
        double b = 2.0, x0 = 0.8;
        PathPolicy pol;
        pol.reflect_at_zero = true;
        pol.stop_above = true;
        pol.upper = b;
        auto r = simulate_functional<2>(m, pol, base.q, x0, cfg(20000), [](const PathOutcome& o) {
            double hit = o.stop == StopKind::Upper ? std::exp(-0.1 * o.stop_time) : 0.0;
            return std::array<double, 2>{hit, o.injections};
        });
        auto id = reflected_identities(s, x0, b);
        within_3se(r[0].mean, r[0].std_error, id.eta_transform);
        within_3se(r[1].mean, r[1].std_error, id.injection);
    }
}

TEST_CASE("first observation before leaving an interval", "[sim]")
{
    for (const auto& m : {bm(), cl(), jd()}) {
        ScalePair pair(m, base.q, base.r);
        double lo = 0.5, hi = 3.0, x0 = 1.4;
        PathPolicy pol;
        pol.kill_below = true;
        pol.lower = lo;
        pol.stop_above = true;
        pol.upper = hi;
        pol.stop_at_observation = true;
        pol.observation_rate = base.r;
        auto r = simulate_functional<2>(m, pol, base.q, x0, cfg(20000), [](const PathOutcome& o) {
            if (o.stop != StopKind::Observation) return std::array<double, 2>{0.0, 0.0};
            double d = std::exp(-0.1 * o.stop_time);
            return std::array<double, 2>{d, d * o.stop_position};
        });
        auto id = poisson_time_identities(pair, x0, lo, hi);
        within_3se(r[0].mean, r[0].std_error, id.p0);
        within_3se(r[1].mean, r[1].std_error, id.p1);
    }
}

TEST_CASE("resolvent of a window function", "[sim]")
{
    for (const auto& m : {bm(), cl(), jd()}) {
        ScaleContext s(m, base.q);
        auto h = [&](double y) { return (y >= 0.5 && y <= 1.5) ? std::exp(-s.phi() * y) : 0.0; };
        SupportedFunction hf{h, 1.5, {0.5}};
        PathPolicy pol;
        pol.reflect_at_zero = true;
        pol.probe_rate = 4.0;
        pol.probe = h;
        auto c = cfg(20000);
        auto r = simulate_functional<1>(m, pol, base.q, 1.0, c, [](const PathOutcome& o) { return std::array<double, 1>{o.occupation}; });
        within_3se(r[0].mean, r[0].std_error, resolvent_reflected(s, 1.0, infinity, hf));
    }
}
