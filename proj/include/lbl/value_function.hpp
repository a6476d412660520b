#ifndef LBL_VALUE_FUNCTION_HPP
#define LBL_VALUE_FUNCTION_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "barriers.hpp"
#include "fluctuation.hpp"
#include "levy_model.hpp"
#include "scale_functions.hpp"

namespace lbl {

/**
 * \brief NPV of the periodic (b1,b2)-barrier strategy with classical reflection at 0.
 *
 * Holds the constants A and the denominator for one barrier pair.
 */
class PeriodicValue {
public:
    PeriodicValue(const ScalePair& pair, const ProblemParams& p, Barriers b) : pair_(&pair), p_(p), b_(b)
    {
        require_ordered(b);
        const auto& s = pair.q();
        const double r = pair.r(), ph = pair.phi_qr(), beta = p.beta, q = s.q();
        const double b1 = b.b1, b2 = b.b2;
        denom_ = q * pair.z_phi(b2) + r * (s.z(b2) - s.z(b1));
        a_ = r / ph * (1.0 - beta * s.z(b2)) + r * (b2 - b1 - p.alpha) - beta * r * (s.l(b2) - s.l(b1)) -
             beta * (q / ph - s.mean_increment()) * pair.z_phi(b2);
        v_b1_ = value_below(b1);
        v_b2_ = value_below(b2);
    }

    double a_constant() const { return a_; }
    double denominator() const { return denom_; }
    const Barriers& barriers() const { return b_; }

    /// Reduced form, valid for x <= b2 (and the linear extension below 0).
    double value_below(double x) const
    {
        const auto& s = pair_->q();
        return a_ * s.z(x) / denom_ + p_.beta * s.l(x);
    }

    /// Full closed form on the whole line.
    double value_full(double x) const
    {
        const auto& s = pair_->q();
        const auto& k = pair_->qr();
        const double r = pair_->r(), beta = p_.beta, b1 = b_.b1, b2 = b_.b2, y = x - b2;
        const double wb = k.wbar(y);
        double v = a_ * (z_b(*pair_, b2, x) - r * s.z(b1) * wb) / denom_ - r * k.wbarbar(y);
        v += beta * (zbar_b(*pair_, b2, x) - r * s.zbar(b2) * wb -
                     s.mean_increment() * (wbar_b(*pair_, b2, x) - r * s.wbar(b2) * wb));
        v += r * wb * (beta * (s.l(b2) - s.l(b1)) - (b2 - b1 - p_.alpha));
        return v;
    }

    double value(double x) const { return x <= b_.b2 ? value_below(x) : value_full(x); }

    /// First derivative; x = 0 gives the right limit and x < 0 the slope beta.
    double derivative(double x) const
    {
        if (x < 0.0) return p_.beta;
        const auto& s = pair_->q();
        const auto& k = pair_->qr();
        const double r = pair_->r(), beta = p_.beta, b2 = b_.b2, y = x - b2;
        const double wb2 = w_b(*pair_, b2, x);
        double d = s.q() * a_ * wb2 / denom_ - r * k.wbar(y) + beta * (z_b(*pair_, b2, x) - s.mean_increment() * wb2);
        if (y > 0.0) d += r * k.w(y) * jump_gap();
        return d;
    }

    /// Second derivative, x > 0 off b2.
    double second_derivative(double x) const
    {
        if (x <= 0.0) throw domain_error("second_derivative: x must be > 0");
        const auto& s = pair_->q();
        const auto& k = pair_->qr();
        const double r = pair_->r(), beta = p_.beta, b2 = b_.b2, y = x - b2;
        double dw = s.w_prime(x);
        double kw = 0.0, kwp = 0.0;
        if (y > 0.0) {
            kw = k.w(y);
            kwp = k.w_prime(y);
            dw += r * kw * s.w(b2) + r * convolve_tail(k.w_sum(), s.w_prime_sum(), b2, x);
        }
        double d = s.q() * a_ * dw / denom_;
        d += beta * (s.q() * w_b(*pair_, b2, x) + r * kw * s.z(b2) - s.mean_increment() * dw);
        d += -r * kw + r * kwp * jump_gap();
        return d;
    }

    /// v(b2) - v(b1) - (b2 - b1 - alpha), zero on the smooth-fit set.
    double jump_gap() const { return v_b2_ - v_b1_ - (b_.b2 - b_.b1 - p_.alpha); }

private:
    const ScalePair* pair_;
    ProblemParams p_;
    Barriers b_;
    double denom_ = 0.0;
    double a_ = 0.0;
    double v_b1_ = 0.0;
    double v_b2_ = 0.0;
};

inline double v_alpha(const ScalePair& pair, const ProblemParams& p, Barriers b, double x)
{
    return PeriodicValue(pair, p, b).value(x);
}

inline double v_prime(const ScalePair& pair, const ProblemParams& p, Barriers b, double x)
{
    if (!(x > 0.0)) throw domain_error("v_prime: x must be > 0");
    return PeriodicValue(pair, p, b).derivative(x);
}

inline double v_second(const ScalePair& pair, const ProblemParams& p, Barriers b, double x)
{
    if (pair.model().variation() == Variation::Bounded)
        throw domain_error("v_second: not defined for bounded variation");
    return PeriodicValue(pair, p, b).second_derivative(x);
}

/// Value of the zero-cost periodic barrier strategy at level b.
class ZeroCostValue {
public:
    ZeroCostValue(const ScalePair& pair, const ProblemParams& p, double b) : pair_(&pair), p_(p), b_(b)
    {
        if (!(b > 0.0)) throw domain_error("v_zero: b must be > 0");
        cb_ = g1(pair, p.beta, b) / (pair.q().q() * pair.phi_qr());
    }

    double constant() const { return cb_; }

    double value(double x) const
    {
        const auto& s = pair_->q();
        const auto& k = pair_->qr();
        const double r = pair_->r(), y = x - b_, wb = k.wbar(y);
        return -cb_ * (z_b(*pair_, b_, x) - r * s.z(b_) * wb) - r * k.wbarbar(y) +
               p_.beta * (zbar_b(*pair_, b_, x) + s.mean_increment() / s.q() - r * s.zbar(b_) * wb);
    }

    double derivative(double x) const
    {
        if (x < 0.0) return p_.beta;
        const double r = pair_->r();
        return -cb_ * pair_->q().q() * w_b(*pair_, b_, x) - r * pair_->qr().wbar(x - b_) + p_.beta * z_b(*pair_, b_, x);
    }

private:
    const ScalePair* pair_;
    ProblemParams p_;
    double b_;
    double cb_ = 0.0;
};

inline double v_zero(const ScalePair& pair, const ProblemParams& p, double b2, double x)
{
    return ZeroCostValue(pair, p, b2).value(x);
}

/// Generator of X applied to v, minus q v; v'' only enters for sigma > 0.
inline double generator_minus_q(const ScalePair& pair, const PeriodicValue& v, const ProblemParams& p, double x)
{
    const auto& m = pair.model();
    const double vx = v.value(x), v0 = v.value(0.0);
    double g = m.premium * v.derivative(x) - pair.q().q() * vx;
    if (m.sigma > 0.0) g += 0.5 * m.sigma * m.sigma * v.second_derivative(x);
    const Barriers& b = v.barriers();
    for (const auto& j : m.jumps) {
        const double lam = j.rate * j.weight, rho = j.phase;
        const double cut = std::min(x, 30.0 / rho);
        double inner = integrate([&](double y) { return rho * std::exp(-rho * y) * v.value(x - y); }, 0.0, cut,
                                 {x - b.b1, x - b.b2}, 1e-12, 1e-15);
        // x - y < 0 uses the linear extension v(0) + beta (x - y)
        inner += std::exp(-rho * x) * (v0 - p.beta / rho);
        g += lam * (inner - vx);
    }
    return g;
}

/// max over l in [0,x] of [l - alpha]1{l>0} + v(x-l) - v(x), case split at b2.
inline double hjb_inner_max(const PeriodicValue& v, const ProblemParams& p, double x)
{
    const Barriers& b = v.barriers();
    if (x < b.b2) return 0.0;
    return x - b.b1 - p.alpha + v.value(b.b1) - v.value(x);
}

/// Same maximum by scanning l on a uniform grid, plus the stationary point x - b1.
inline double hjb_inner_max_scan(const PeriodicValue& v, const ProblemParams& p, double x, std::size_t n = 2000)
{
    double vx = v.value(x), best = 0.0;
    auto f = [&](double l) { return l - p.alpha + v.value(x - l) - vx; };
    for (std::size_t i = 1; i <= n; ++i) best = std::max(best, f(x * double(i) / double(n)));
    double ls = x - v.barriers().b1;
    if (ls > 0.0) best = std::max(best, f(ls));
    return best;
}

struct ValueProfile {
    std::vector<double> grid;
    std::vector<double> v;
    std::vector<double> v_prime;
    std::vector<double> v_second;
    std::vector<double> generator;
    std::vector<double> inner_max;
    std::vector<double> hjb_residual;
    std::vector<double> closed_form;
    double max_violation = 0.0;
    double worst_x = 0.0;
    double max_below_b2 = 0.0;
    double max_above_b2 = -1e300;
    double max_closed_form_gap = 0.0;
    double max_v_prime = 0.0;
    bool v_prime_bounded = true;
    bool nondecreasing = true;
    bool passed = false;
};

/// Grid on (0, x_max) clustered near 0, b1 and b2.
inline std::vector<double> default_grid(Barriers b, double x_max, std::size_t n = 400)
{
    std::vector<double> g;
    std::size_t per = n / 12;
    for (double c : {0.0, b.b1, b.b2}) {
        if (c == b.b1 && b.b1 == 0.0 && !g.empty()) continue;
        for (std::size_t i = 1; i <= per; ++i) {
            double d = 0.5 * std::pow(1e-4 / 0.5, double(i - 1) / double(per > 1 ? per - 1 : 1));
            if (c + d < x_max) g.push_back(c + d);
            if (c - d > 0.0) g.push_back(c - d);
        }
    }
    std::size_t uni = n > g.size() ? n - g.size() : 0;
    for (std::size_t i = 1; i <= uni; ++i) g.push_back(x_max * double(i) / double(uni + 1));
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
    std::vector<double> out;
    for (double x : g)
        if (x > 0.0 && x < x_max && std::abs(x - b.b2) > 1e-9) out.push_back(x);
    return out;
}

/**
 * \brief Direct check of the variational inequality on a grid.
 *
 * Residual (L - q)v + r max{...} must vanish below b2 and be nonpositive above;
 * the closed form of (L - q)v above b2 goes through the zero-cost value.
 */
inline ValueProfile hjb_check(const ScalePair& pair, const ProblemParams& p, Barriers b, const std::vector<double>& grid,
                              double tol = 1e-5)
{
    PeriodicValue v(pair, p, b);
    ZeroCostValue v0(pair, p, b.b2);
    const bool ubv = pair.model().variation() == Variation::Unbounded;
    const double r = pair.r(), v0b2 = v0.value(b.b2);
    ValueProfile out;
    for (double x : grid)
        if (x > 0.0) out.grid.push_back(x);
    double prev = -1e300;
    for (double x : out.grid) {
        double vx = v.value(x), d1 = v.derivative(x);
        double gen = generator_minus_q(pair, v, p, x);
        double mx = hjb_inner_max(v, p, x);
        double res = gen + r * mx;
        double cf = x < b.b2 ? 0.0 : -r * (x - b.b2 + v0b2 - v0.value(x));
        out.v.push_back(vx);
        out.v_prime.push_back(d1);
        if (ubv) out.v_second.push_back(v.second_derivative(x));
        out.generator.push_back(gen);
        out.inner_max.push_back(mx);
        out.hjb_residual.push_back(res);
        out.closed_form.push_back(cf);
        double viol = x < b.b2 ? std::abs(res) : std::max(res, 0.0);
        if (viol > out.max_violation) {
            out.max_violation = viol;
            out.worst_x = x;
        }
        if (x < b.b2) out.max_below_b2 = std::max(out.max_below_b2, std::abs(res));
        else out.max_above_b2 = std::max(out.max_above_b2, res);
        out.max_closed_form_gap = std::max(out.max_closed_form_gap, std::abs(gen - cf));
        out.max_v_prime = std::max(out.max_v_prime, d1);
        if (d1 > p.beta) out.v_prime_bounded = false;
        if (vx < prev) out.nondecreasing = false;
        prev = vx;
    }
    out.passed = out.max_below_b2 <= tol && out.max_above_b2 <= tol && out.max_closed_form_gap <= tol &&
                 out.v_prime_bounded && out.nondecreasing;
    return out;
}

struct BandReport {
    bool lower_band_ok = true;
    bool upper_band_ok = true;
    double worst_lower = 0.0;
    double worst_upper = 0.0;
    double max_eq16_gap = 0.0;
    bool ok() const { return lower_band_ok && upper_band_ok; }
};

/// v' in (1, beta) below b1* and in (0, 1) above; interior case also compares v' with beta times the down-crossing transform.
inline BandReport p2_bands(const ScalePair& pair, const ProblemParams& p, const BarrierCandidate& c,
                           const std::vector<double>& grid)
{
    PeriodicValue v(pair, p, c.barriers());
    ParisianIdentities par(pair, p, c.barriers());
    BandReport rep;
    for (double x : grid) {
        if (x <= 0.0 || x == c.b1_star) continue;
        double d = v.derivative(x);
        if (x < c.b1_star) {
            if (!(d > 1.0 && d < p.beta)) rep.lower_band_ok = false;
            rep.worst_lower = std::max(rep.worst_lower, std::max(1.0 - d, d - p.beta));
        } else {
            if (!(d > 0.0 && d < 1.0)) rep.upper_band_ok = false;
            rep.worst_upper = std::max(rep.worst_upper, std::max(-d, d - 1.0));
        }
        if (c.kind == BarrierCase::InteriorFirstOrder)
            rep.max_eq16_gap = std::max(rep.max_eq16_gap, std::abs(d - p.beta * par.down_laplace_zero(x)));
    }
    return rep;
}

} // namespace lbl

#endif
