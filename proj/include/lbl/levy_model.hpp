#ifndef LBL_LEVY_MODEL_HPP
#define LBL_LEVY_MODEL_HPP

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "error.hpp"
#include "numerics.hpp"

namespace lbl {

/// One hyper-exponential component: jumps of Exp(phase) size arriving at rate*weight.
struct JumpComponent {
    double rate = 0.0;
    double phase = 0.0;
    double weight = 0.0;
};

enum class Variation { Bounded, Unbounded };

/**
 * \brief Spectrally negative Levy process X(t) = c t + sigma B(t) - (compound Poisson).
 *
 * The premium c is the coefficient of theta in the rational form of psi; the
 * Levy-Khintchine drift mu (truncation at -1) is derived from it.
 */
struct LevyModel {
    double premium = 0.0;
    double sigma = 0.0;
    std::vector<JumpComponent> jumps;

    static LevyModel from_premium(double c, double sigma, std::vector<JumpComponent> jumps);
    static LevyModel from_drift(double mu, double sigma, std::vector<JumpComponent> jumps);

    double jump_intensity() const
    {
        double s = 0.0;
        for (const auto& j : jumps) s += j.rate * j.weight;
        return s;
    }
    double drift() const;
    Variation variation() const { return sigma > 0.0 ? Variation::Unbounded : Variation::Bounded; }
};

/// Jump mass on (-1,0) weighted by z, i.e. the truncation correction between mu and c.
inline double small_jump_first_moment(const std::vector<JumpComponent>& jumps)
{
    double s = 0.0;
    for (const auto& j : jumps) {
        double p = j.phase;
        s -= j.rate * j.weight * (1.0 - std::exp(-p) * (1.0 + p)) / p;
    }
    return s;
}

inline double LevyModel::drift() const { return premium + small_jump_first_moment(jumps); }

/// Violated invariants, empty when the model is usable.
inline std::vector<std::string> validate(const LevyModel& m)
{
    std::vector<std::string> out;
    if (!(m.sigma >= 0.0) || !std::isfinite(m.sigma)) out.push_back("sigma must be finite and nonnegative");
    if (!std::isfinite(m.premium)) out.push_back("drift must be finite");
    bool jumps_ok = true;
    double wsum = 0.0;
    for (const auto& j : m.jumps) {
        if (!(j.rate > 0.0) || !std::isfinite(j.rate)) { out.push_back("jump rate must be positive"); jumps_ok = false; }
        if (!(j.phase > 0.0) || !std::isfinite(j.phase)) { out.push_back("jump mean must be positive"); jumps_ok = false; }
        if (!(j.weight > 0.0) || !std::isfinite(j.weight)) { out.push_back("jump weight must be positive"); jumps_ok = false; }
        wsum += j.weight;
    }
    if (!m.jumps.empty() && jumps_ok && std::abs(wsum - 1.0) > 1e-12) out.push_back("weights not normalized");
    if (m.sigma == 0.0 && m.jumps.empty()) out.push_back("monotone paths");
    else if (m.sigma == 0.0 && !(m.premium > 0.0)) out.push_back("monotone paths: bounded variation requires c > 0");
    if (jumps_ok) {
        double mean = m.premium;
        for (const auto& j : m.jumps) mean -= j.rate * j.weight / j.phase;
        if (!std::isfinite(mean)) out.push_back("psi'(0+) must be finite");
    }
    return out;
}

inline void require_valid(const LevyModel& m)
{
    auto d = validate(m);
    if (d.empty()) return;
    std::string msg = "invalid model:";
    for (const auto& s : d) msg += " " + s + ";";
    throw validation_error(msg);
}

inline LevyModel LevyModel::from_premium(double c, double sigma, std::vector<JumpComponent> jumps)
{
    LevyModel m{c, sigma, std::move(jumps)};
    require_valid(m);
    return m;
}

inline LevyModel LevyModel::from_drift(double mu, double sigma, std::vector<JumpComponent> jumps)
{
    LevyModel m{mu - small_jump_first_moment(jumps), sigma, std::move(jumps)};
    require_valid(m);
    return m;
}

/// Distinct phases with merged intensities, sorted by increasing phase.
inline std::vector<std::pair<double, double>> merged_phases(const LevyModel& m)
{
    std::map<double, double> acc;
    for (const auto& j : m.jumps) acc[j.phase] += j.rate * j.weight;
    return {acc.begin(), acc.end()};
}

namespace detail {

/// psi on the whole real line except at the poles -phase.
inline double psi_any(const LevyModel& m, double th)
{
    double v = m.premium * th + 0.5 * m.sigma * m.sigma * th * th;
    for (const auto& j : m.jumps) {
        double lam = j.rate * j.weight;
        v -= lam * th / (j.phase + th);
    }
    return v;
}

inline double psi_prime_any(const LevyModel& m, double th)
{
    double v = m.premium + m.sigma * m.sigma * th;
    for (const auto& j : m.jumps) {
        double lam = j.rate * j.weight, d = j.phase + th;
        v -= lam * j.phase / (d * d);
    }
    return v;
}

} // namespace detail

inline double laplace_exponent(const LevyModel& m, double theta)
{
    if (!(theta >= 0.0)) throw domain_error("laplace_exponent: theta must be >= 0");
    if (theta == 0.0) return 0.0;
    return detail::psi_any(m, theta);
}

inline double laplace_exponent_derivative(const LevyModel& m, double theta)
{
    if (!(theta >= 0.0)) throw domain_error("laplace_exponent_derivative: theta must be >= 0");
    return detail::psi_prime_any(m, theta);
}

/// psi'(0+) = E[X(1)].
inline double mean_increment(const LevyModel& m) { return detail::psi_prime_any(m, 0.0); }

inline Variation variation_class(const LevyModel& m) { return m.variation(); }

/// Largest root of psi(theta) = s.
inline double right_inverse_phi(const LevyModel& m, double s)
{
    if (!(s >= 0.0)) throw domain_error("right_inverse_phi: s must be >= 0");
    double lo = 0.0;
    if (s == 0.0) {
        if (mean_increment(m) >= 0.0) return 0.0;
        double hi = 1.0;
        while (detail::psi_prime_any(m, hi) <= 0.0) hi *= 2.0;
        lo = bisect([&](double t) { return detail::psi_prime_any(m, t); }, 0.0, hi, 1e-14);
    }
    double hi = std::max(1.0, 2.0 * lo);
    while (detail::psi_any(m, hi) <= s) hi *= 2.0;
    auto f = [&](double t) { return detail::psi_any(m, t) - s; };
    double x = brent(f, lo, hi, 1e-15).x;
    for (int i = 0; i < 2; ++i) {
        double d = detail::psi_prime_any(m, x);
        if (d > 0.0) x -= f(x) / d;
    }
    return x;
}

/// Discount, observation rate, fixed cost and injection cost.
struct ProblemParams {
    double q = 0.0;
    double r = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
};

inline std::vector<std::string> validate(const ProblemParams& p)
{
    std::vector<std::string> out;
    if (!(p.q > 0.0) || !std::isfinite(p.q)) out.push_back("q must be positive");
    if (!(p.r > 0.0) || !std::isfinite(p.r)) out.push_back("r must be positive");
    if (!(p.alpha > 0.0) || !std::isfinite(p.alpha)) out.push_back("alpha must be positive");
    if (!(p.beta > 1.0) || !std::isfinite(p.beta)) out.push_back("beta must exceed 1");
    return out;
}

inline void require_valid(const ProblemParams& p)
{
    auto d = validate(p);
    if (d.empty()) return;
    std::string msg = "invalid parameters:";
    for (const auto& s : d) msg += " " + s + ";";
    throw validation_error(msg);
}

} // namespace lbl

#endif
