#ifndef LBL_SIMULATOR_HPP
#define LBL_SIMULATOR_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "barriers.hpp"
#include "error.hpp"
#include "levy_model.hpp"
#include "numerics.hpp"
#include "philox.hpp"

namespace lbl {

struct SimulationConfig {
    double dt = 1e-3;
    double horizon = 0.0; ///< 0 selects -ln(tail_tol)/q
    long n_paths = 100000;
    std::uint64_t seed = 20240601;
    double tail_tol = 1e-6;
};

inline double min_horizon(const SimulationConfig& cfg, double q) { return -std::log(cfg.tail_tol) / q; }

inline double effective_horizon(const SimulationConfig& cfg, double q)
{
    return cfg.horizon > 0.0 ? cfg.horizon : min_horizon(cfg, q);
}

inline void require_valid(const SimulationConfig& cfg, double q)
{
    if (!(cfg.dt > 0.0) || cfg.dt > 1e-2) throw validation_error("simulation: dt must lie in (0, 1e-2]");
    if (cfg.n_paths < 100) throw validation_error("simulation: n_paths must be >= 100");
    if (!(cfg.tail_tol > 0.0 && cfg.tail_tol < 1.0)) throw validation_error("simulation: tail_tol must lie in (0,1)");
    if (effective_horizon(cfg, q) < min_horizon(cfg, q) * (1.0 - 1e-12))
        throw validation_error("simulation: horizon too short for tail_tol");
}

struct EstimateComponent {
    double mean = 0.0;
    double std_error = 0.0;
};

struct SimulationEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    long n_paths = 0;
    std::map<std::string, EstimateComponent> components;
    double dt = 0.0;
    double horizon = 0.0;
};

/// What the controlled process does at boundaries and observation times.
struct PathPolicy {
    bool reflect_at_zero = false;
    bool kill_below = false;
    double lower = 0.0;
    bool stop_above = false;
    double upper = 0.0;
    bool pay_down = false;
    Barriers barrier;
    bool stop_at_observation = false;
    double observation_rate = 0.0;
    double probe_rate = 0.0;
    std::function<double(double)> probe;
};

enum class StopKind { None, Lower, Upper, Observation };

struct PathOutcome {
    double dividends = 0.0;
    double fixed_costs = 0.0;
    double injections = 0.0;
    double occupation = 0.0;
    StopKind stop = StopKind::None;
    double stop_time = 0.0;
    double stop_position = 0.0;
};

/**
 * \brief Event-driven path engine.
 *
 * Jumps and observation times are exact exponential clocks. Between events the
 * Gaussian part is an exact Gaussian increment. Reflection at 0 alone is exact
 * per interval. Stopping levels bisect the interval by Brownian-bridge midpoints
 * down to dt, sample the crossing exactly on each leaf and date it at the leaf
 * midpoint.
 */
class PathEngine {
public:
    PathEngine(const LevyModel& m, PathPolicy policy, double discount, double horizon, double dt)
        : m_(m), pol_(std::move(policy)), q_(discount), horizon_(horizon), dt_(dt)
    {
        lambda_ = m.jump_intensity();
        double acc = 0.0;
        for (const auto& j : m.jumps) {
            acc += j.rate * j.weight;
            cum_.push_back(acc / lambda_);
            phase_.push_back(j.phase);
        }
        s2_ = m.sigma * m.sigma;
    }

    PathOutcome run(double x0, PathRng& rng) const
    {
        State st{rng, 0.0, x0, 0.0, {}};
        if (start_checks(st)) return st.out;
        const double inf = std::numeric_limits<double>::infinity();
        double next_jump = lambda_ > 0.0 ? rng.exponential(lambda_) : inf;
        double obs_rate = pol_.observation_rate;
        double next_obs = obs_rate > 0.0 ? rng.exponential(obs_rate) : inf;
        double next_probe = pol_.probe_rate > 0.0 ? rng.exponential(pol_.probe_rate) : inf;
        for (;;) {
            double t1 = std::min({next_jump, next_obs, next_probe, horizon_});
            if (diffuse(st, t1)) return st.out;
            if (t1 >= horizon_) return st.out;
            double disc = std::exp(-q_ * t1);
            if (t1 == next_jump) {
                st.u -= jump_size(rng);
                next_jump = t1 + rng.exponential(lambda_);
                if (pol_.kill_below && st.u < pol_.lower) { stop(st, StopKind::Lower, t1, st.u); return st.out; }
                if (pol_.reflect_at_zero && st.u < 0.0) {
                    st.out.injections += disc * (-st.u);
                    st.u = 0.0;
                }
            } else if (t1 == next_obs) {
                next_obs = t1 + rng.exponential(obs_rate);
                if (pol_.stop_at_observation) { stop(st, StopKind::Observation, t1, st.u); return st.out; }
                if (pol_.pay_down && st.u > pol_.barrier.b2) {
                    st.out.dividends += disc * (st.u - pol_.barrier.b1);
                    st.out.fixed_costs += disc;
                    st.u = pol_.barrier.b1;
                }
            } else {
                next_probe = t1 + rng.exponential(pol_.probe_rate);
                st.out.occupation += disc * pol_.probe(st.u) / pol_.probe_rate;
            }
        }
    }

private:
    struct State {
        PathRng& rng;
        double t = 0.0;
        double u = 0.0;
        double shift = 0.0;
        PathOutcome out;
    };

    static constexpr double negligible = 1e-13;

    bool start_checks(State& st) const
    {
        if (pol_.kill_below && st.u < pol_.lower) { stop(st, StopKind::Lower, 0.0, st.u); return true; }
        if (pol_.stop_above && st.u >= pol_.upper) { stop(st, StopKind::Upper, 0.0, pol_.upper); return true; }
        if (pol_.reflect_at_zero && st.u < 0.0) {
            st.out.injections += -st.u;
            st.u = 0.0;
        }
        return false;
    }

    bool stop(State& st, StopKind k, double t, double pos) const
    {
        st.out.stop = k;
        st.out.stop_time = t;
        st.out.stop_position = pos;
        return true;
    }

    double jump_size(PathRng& rng) const
    {
        std::size_t i = 0;
        if (cum_.size() > 1) {
            double v = rng.uniform();
            while (i + 1 < cum_.size() && v > cum_[i]) ++i;
        }
        return rng.exponential(phase_[i]);
    }

    /// Evolve from st.t to t1; returns true if the path stopped.
    bool diffuse(State& st, double t1) const
    {
        double h = t1 - st.t;
        if (h <= 0.0) return false;
        if (s2_ == 0.0) {
            double c = m_.premium;
            if (pol_.stop_above && st.u + c * h >= pol_.upper) {
                double tau = st.t + (pol_.upper - st.u) / c;
                return stop(st, StopKind::Upper, tau, pol_.upper);
            }
            st.u += c * h;
            st.t = t1;
            return false;
        }
        double y1 = st.u + m_.premium * h + m_.sigma * std::sqrt(h) * st.rng.normal();
        if (pol_.reflect_at_zero && !pol_.stop_above) {
            reflect_exact(st, h, y1);
            st.t = t1;
            return false;
        }
        st.shift = 0.0;
        bool stopped = refine(st, st.t, st.u, t1, y1);
        if (stopped) return true;
        st.u = y1 + st.shift;
        st.t = t1;
        return false;
    }

    /// Minimum of a Brownian bridge from a to b over time h.
    double bridge_min(PathRng& rng, double a, double b, double h) const
    {
        double d = b - a;
        return 0.5 * (a + b - std::sqrt(d * d - 2.0 * s2_ * h * std::log(rng.uniform())));
    }

    /**
     * Reflection at 0 over one inter-event interval. The end state uses the exact
     * bridge minimum; the discounted injection int e^{-qs} dR equals E[R(E ^ h)]
     * for E ~ Exp(q), so the bridge is split at an independent exponential time.
     */
    void reflect_exact(State& st, double h, double y1) const
    {
        const double y0 = st.u, disc = std::exp(-q_ * st.t);
        double e = q_ > 0.0 ? st.rng.exponential(q_) : std::numeric_limits<double>::infinity();
        double total;
        if (e < h) {
            double w = e / h;
            double ym = y0 + (y1 - y0) * w + m_.sigma * std::sqrt(e * (1.0 - w)) * st.rng.normal();
            double early = std::max(0.0, -bridge_min(st.rng, y0, ym, e));
            total = std::max(early, -bridge_min(st.rng, ym, y1, h - e));
            st.out.injections += disc * early;
        } else {
            total = std::max(0.0, -bridge_min(st.rng, y0, y1, h));
            st.out.injections += disc * total;
        }
        st.u = y1 + total;
    }

    bool lower_active() const { return pol_.reflect_at_zero || pol_.kill_below; }
    double lower_level() const { return pol_.kill_below ? pol_.lower : 0.0; }

    /// Bridge from (t0,y0) to (t1,y1) in unshifted coordinates.
    bool refine(State& st, double t0, double y0, double t1, double y1) const
    {
        const double h = t1 - t0;
        const double u0 = y0 + st.shift, u1 = y1 + st.shift;
        double p_low = 0.0, p_up = 0.0;
        if (lower_active()) {
            double a = u0 - lower_level(), b = u1 - lower_level();
            p_low = (a <= 0.0 || b <= 0.0) ? 1.0 : std::exp(-2.0 * a * b / (s2_ * h));
        }
        if (pol_.stop_above) {
            double a = pol_.upper - u0, b = pol_.upper - u1;
            p_up = (a <= 0.0 || b <= 0.0) ? 1.0 : std::exp(-2.0 * a * b / (s2_ * h));
        }
        if (p_low < negligible && p_up < negligible) return false;
        if (h > dt_ * (1.0 + 1e-9)) {
            double tm = t0 + 0.5 * h;
            double ym = 0.5 * (y0 + y1) + 0.5 * m_.sigma * std::sqrt(h) * st.rng.normal();
            if (refine(st, t0, y0, tm, ym)) return true;
            return refine(st, tm, ym, t1, y1);
        }
        const double tmid = t0 + 0.5 * h;
        if (pol_.kill_below) {
            if (u1 < pol_.lower || st.rng.uniform() < p_low) return stop(st, StopKind::Lower, tmid, pol_.lower);
        } else if (pol_.reflect_at_zero && p_low >= negligible) {
            double mn = bridge_min(st.rng, u0, u1, h);
            if (mn < 0.0) {
                st.out.injections += std::exp(-q_ * tmid) * (-mn);
                st.shift += -mn;
            }
        }
        if (pol_.stop_above && p_up >= negligible) {
            double u1s = y1 + st.shift;
            if (u1s >= pol_.upper || st.rng.uniform() < p_up) return stop(st, StopKind::Upper, tmid, pol_.upper);
        }
        return false;
    }

    LevyModel m_;
    PathPolicy pol_;
    double q_;
    double horizon_;
    double dt_;
    double lambda_ = 0.0;
    double s2_ = 0.0;
    std::vector<double> cum_;
    std::vector<double> phase_;
};

/// Worker count from LBL_THREADS, else the hardware concurrency.
inline unsigned worker_count()
{
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("LBL_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v > 0) return unsigned(std::min<long>(v, 1024));
    }
    return hw;
}

/**
 * \brief Runs n paths and reduces K per-path outputs to means and standard errors.
 *
 * Per-path outputs are stored by index and summed pairwise, so results do not
 * depend on the thread count.
 */
template <std::size_t K, class PathFn>
std::array<EstimateComponent, K> monte_carlo(long n, std::uint64_t seed, PathFn&& fn)
{
    std::vector<std::array<double, K>> vals(static_cast<std::size_t>(n));
    unsigned nt = std::min<unsigned>(worker_count(), unsigned(std::max<long>(1, n / 64)));
    auto work = [&](unsigned w) {
        for (long i = w; i < n; i += nt) {
            PathRng rng(seed, std::uint64_t(i));
            vals[std::size_t(i)] = fn(rng);
        }
    };
    if (nt <= 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < nt; ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
    }
    std::array<EstimateComponent, K> out{};
    std::vector<double> col(static_cast<std::size_t>(n));
    for (std::size_t k = 0; k < K; ++k) {
        for (long i = 0; i < n; ++i) col[std::size_t(i)] = vals[std::size_t(i)][k];
        double mean = pairwise_sum(col) / double(n);
        for (auto& v : col) v = (v - mean) * (v - mean);
        double var = n > 1 ? pairwise_sum(col) / double(n - 1) : 0.0;
        out[k] = {mean, std::sqrt(var / double(n))};
    }
    return out;
}

inline SimulationEstimate make_estimate(const EstimateComponent& main, const SimulationConfig& cfg, double q)
{
    SimulationEstimate e;
    e.mean = main.mean;
    e.std_error = main.std_error;
    e.n_paths = cfg.n_paths;
    e.dt = cfg.dt;
    e.horizon = effective_horizon(cfg, q);
    return e;
}

/// NPV of the periodic barrier strategy with classical reflection at 0.
inline SimulationEstimate simulate_npv(const LevyModel& m, const ProblemParams& p, Barriers b, double x0,
                                       const SimulationConfig& cfg)
{
    require_ordered(b);
    require_valid(cfg, p.q);
    PathPolicy pol;
    pol.reflect_at_zero = true;
    pol.pay_down = true;
    pol.barrier = b;
    pol.observation_rate = p.r;
    PathEngine eng(m, pol, p.q, effective_horizon(cfg, p.q), cfg.dt);
    auto res = monte_carlo<4>(cfg.n_paths, cfg.seed, [&](PathRng& rng) {
        PathOutcome o = eng.run(x0, rng);
        double npv = o.dividends - p.alpha * o.fixed_costs - p.beta * o.injections;
        return std::array<double, 4>{npv, o.dividends, o.fixed_costs, o.injections};
    });
    auto e = make_estimate(res[0], cfg, p.q);
    e.components["dividends"] = res[1];
    e.components["fixed_costs"] = res[2];
    e.components["injections"] = res[3];
    e.components["dividend_part"] = {res[1].mean - p.alpha * res[2].mean, 0.0};
    return e;
}

/// E[e^{-q tau + theta U(tau)}] for the process pushed to b1 above b2, without reflection.
inline SimulationEstimate simulate_parisian_down_crossing(const LevyModel& m, const ProblemParams& p, Barriers b,
                                                          double x0, double theta, const SimulationConfig& cfg)
{
    require_ordered(b);
    require_valid(cfg, p.q);
    PathPolicy pol;
    pol.kill_below = true;
    pol.lower = 0.0;
    pol.pay_down = true;
    pol.barrier = b;
    pol.observation_rate = p.r;
    PathEngine eng(m, pol, p.q, effective_horizon(cfg, p.q), cfg.dt);
    auto res = monte_carlo<2>(cfg.n_paths, cfg.seed, [&](PathRng& rng) {
        PathOutcome o = eng.run(x0, rng);
        if (o.stop != StopKind::Lower) return std::array<double, 2>{0.0, 0.0};
        double d = std::exp(-p.q * o.stop_time);
        return std::array<double, 2>{d * std::exp(theta * o.stop_position), d * o.stop_position};
    });
    auto e = make_estimate(res[0], cfg, p.q);
    e.components["position_at_crossing"] = res[1];
    return e;
}

/// Two-sided exit of X from (b, a): mean is the upward transform, "down" the weighted downward one.
inline SimulationEstimate simulate_exit_times(const LevyModel& m, const ProblemParams& p, double x0, double a, double b,
                                              double theta, const SimulationConfig& cfg)
{
    if (!(a > b) || x0 < b || x0 > a) throw validation_error("simulate_exit_times: need b <= x0 <= a");
    require_valid(cfg, p.q);
    PathPolicy pol;
    pol.kill_below = true;
    pol.lower = b;
    pol.stop_above = true;
    pol.upper = a;
    PathEngine eng(m, pol, p.q, effective_horizon(cfg, p.q), cfg.dt);
    auto res = monte_carlo<2>(cfg.n_paths, cfg.seed, [&](PathRng& rng) {
        PathOutcome o = eng.run(x0, rng);
        double d = std::exp(-p.q * o.stop_time);
        if (o.stop == StopKind::Upper) return std::array<double, 2>{d, 0.0};
        if (o.stop == StopKind::Lower) return std::array<double, 2>{0.0, d * std::exp(-theta * (b - o.stop_position))};
        return std::array<double, 2>{0.0, 0.0};
    });
    auto e = make_estimate(res[0], cfg, p.q);
    e.components["down"] = res[1];
    return e;
}

/// Run an arbitrary policy and map each outcome to K numbers.
template <std::size_t K, class Map>
std::array<EstimateComponent, K> simulate_functional(const LevyModel& m, const PathPolicy& pol, double discount,
                                                     double x0, const SimulationConfig& cfg, Map&& map)
{
    require_valid(cfg, discount);
    PathEngine eng(m, pol, discount, effective_horizon(cfg, discount), cfg.dt);
    return monte_carlo<K>(cfg.n_paths, cfg.seed, [&](PathRng& rng) { return map(eng.run(x0, rng)); });
}

} // namespace lbl

#endif
