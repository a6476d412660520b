#ifndef LBL_BARRIER_SOLVER_HPP
#define LBL_BARRIER_SOLVER_HPP

#include <cmath>
#include <sstream>
#include <string>

#include "barriers.hpp"
#include "numerics.hpp"
#include "scale_functions.hpp"
#include "value_function.hpp"

namespace lbl {

namespace detail {

/// First root of a decreasing function crossing `level`, with f0 the value at 0+.
template <class F>
double decreasing_level_root(F&& f, double f0, double level)
{
    if (f0 <= level) return 0.0;
    double hi = 1.0;
    int n = 0;
    while (f(hi) > level) {
        hi *= 2.0;
        if (++n > 60) throw convergence_error("level root: no crossing found");
    }
    double lo = 0.0;
    while (hi - lo > 1.0 && f(0.5 * (lo + hi)) > level) lo = 0.5 * (lo + hi);
    return brent([&](double b) { return (b == 0.0 ? f0 : f(b)) - level; }, lo, hi, 1e-14).x;
}

inline std::string bracket_message(const char* what, double a, double fa, double b, double fb)
{
    std::ostringstream os;
    os.precision(17);
    os << what << ": bracket failure f(" << a << ")=" << fa << ", f(" << b << ")=" << fb;
    return os.str();
}

} // namespace detail

inline double b_star_r(const ScalePair& pair, double beta)
{
    if (!(beta > 1.0)) throw domain_error("b_star_r: beta must exceed 1");
    return detail::decreasing_level_root([&](double b) { return big_h_qr(pair, b); }, big_h_qr_limit_zero(pair),
                                         1.0 / beta);
}

inline double a_star(const ScaleContext& s, double beta)
{
    if (!(beta > 1.0)) throw domain_error("a_star: beta must exceed 1");
    return detail::decreasing_level_root([&](double u) { return big_h1(s, u); }, big_h1_limit_zero(s), 1.0 / beta);
}

/**
 * \brief Barrier search for one (model, q, r, alpha, beta).
 *
 * Caches b*_r and a*; every trajectory point b2(b1) is a bracketed root.
 */
class BarrierSolver {
public:
    BarrierSolver(const ScalePair& pair, const ProblemParams& p) : pair_(&pair), p_(p)
    {
        require_valid(p);
        b_star_r_ = lbl::b_star_r(pair, p.beta);
        a_star_ = lbl::a_star(pair.q(), p.beta);
    }

    double b_star_r() const { return b_star_r_; }
    double a_star() const { return a_star_; }
    const ScalePair& pair() const { return *pair_; }
    const ProblemParams& params() const { return p_; }

    double g2(double b1, double u) const { return lbl::g2(pair_->q(), b1, p_.alpha, p_.beta, u); }

    /// Minimizer of g2(.;b1): the point where g2 meets xi above a*.
    double u_star(double b1, double u_max = 0.0) const
    {
        const auto& s = pair_->q();
        auto f = [&](double u) { return g2(b1, u) - xi(s, p_.beta, u); };
        double lo = std::max(a_star_, b1);
        if (lo <= b1) {
            double d = 1e-3 * (1.0 + b1);
            while (!(f(b1 + d) > 0.0) && d > 1e-14) d *= 0.5;
            lo = b1 + d;
        }
        if (!(f(lo) > 0.0)) throw convergence_error(detail::bracket_message("u_star", lo, f(lo), lo, f(lo)));
        if (u_max <= 0.0) u_max = 50.0 * (1.0 + a_star_);
        double step = 0.25 * (1.0 + lo), hi = lo + step;
        int doublings = 0;
        while (f(hi) > 0.0) {
            lo = hi;
            step *= 2.0;
            hi = lo + step;
            if (hi > u_max) {
                if (++doublings > 10) throw convergence_error(detail::bracket_message("u_star", lo, f(lo), hi, f(hi)));
                u_max *= 2.0;
            }
        }
        return brent(f, lo, hi, 1e-13).x;
    }

    /// g1(b2) - q Phi(q+r) g2(b2;b1), the smooth-fit equation.
    double smooth_fit(double b1, double b2) const
    {
        return g1(*pair_, p_.beta, b2) - pair_->q().q() * pair_->phi_qr() * g2(b1, b2);
    }

    double b2_of_b1(double b1) const { return b2_of_b1(b1, u_star(b1)); }

    double b2_of_b1(double b1, double ustar) const
    {
        if (!(b1 >= 0.0)) throw domain_error("b2_of_b1: b1 must be >= 0");
        auto f = [&](double b2) { return smooth_fit(b1, b2); };
        double lo = std::max(b_star_r_, b1);
        if (lo <= b1) {
            double d = 1e-3 * std::max(ustar - b1, 1e-3);
            while (!(f(b1 + d) < 0.0) && d > 1e-14) d *= 0.5;
            lo = b1 + d;
        }
        double flo = f(lo), fhi = f(ustar);
        if (!(flo < 0.0) || !(fhi > 0.0)) throw convergence_error(detail::bracket_message("b2_of_b1", lo, flo, ustar, fhi));
        return brent(f, lo, ustar, 1e-14).x;
    }

    /// g1(b2(b1)) / (q Phi(q+r)).
    double g_tilde(double b1) const
    {
        return g1(*pair_, p_.beta, b2_of_b1(b1)) / (pair_->q().q() * pair_->phi_qr());
    }

    /// Slope of v at b1 along the smooth-fit trajectory.
    double trajectory_slope(double b1) const
    {
        const auto& s = pair_->q();
        return p_.beta * s.z(b1) - 1.0 - s.q() * s.w(b1) * g_tilde(b1) + 1.0;
    }

    /// Closed-form derivative of b1 -> b2(b1).
    double b2_slope(double b1) const
    {
        if (!(b1 > 0.0)) throw domain_error("b2_slope: b1 must be > 0");
        const auto& s = pair_->q();
        const double q = s.q(), ph = pair_->phi_qr(), r = pair_->r(), beta = p_.beta;
        double b2 = b2_of_b1(b1);
        double gt = g1(*pair_, beta, b2) / (q * ph);
        double dz = s.z(b2) - s.z(b1);
        double bracket = (r / pair_->z_phi(b2) + q / dz) * s.w(b2) * (g1(*pair_, beta, b2) - q * ph * xi(s, beta, b2));
        // W(b1) xi(b1) = (beta Z(b1) - 1)/q
        double num = -q * q * ph * ((beta * s.z(b1) - 1.0) / q - s.w(b1) * gt);
        return num / (bracket * dz);
    }

    BarrierCandidate candidate() const
    {
        const auto& s = pair_->q();
        BarrierCandidate c;
        c.b_star_r = b_star_r_;
        c.a_star = a_star_;
        bool interior = s.model().variation() == Variation::Unbounded;
        if (!interior && 1.0 / p_.beta < big_h_qr_limit_zero(*pair_)) interior = xi_limit_zero(s, p_.beta) > g_tilde(0.0);
        if (interior) {
            auto gh = [&](double b1) { return xi_ext(s, p_.beta, b1) - g_tilde(b1); };
            double hi = b_star_r_, lo = 0.0;
            if (s.model().variation() == Variation::Unbounded) {
                lo = 0.5 * hi;
                while (!(gh(lo) > 0.0)) {
                    hi = lo;
                    lo *= 0.5;
                    if (lo < 1e-12) throw convergence_error("candidate: no sign change near 0");
                }
            }
            double fhi = gh(hi);
            if (!(fhi < 0.0)) throw convergence_error(detail::bracket_message("candidate", lo, gh(lo), hi, fhi));
            c.kind = BarrierCase::InteriorFirstOrder;
            c.b1_star = brent(gh, lo, hi, 1e-14).x;
        } else {
            c.kind = BarrierCase::BoundaryZero;
            c.b1_star = 0.0;
        }
        c.u_star = u_star(c.b1_star);
        c.b2_star = b2_of_b1(c.b1_star, c.u_star);
        c.smooth_fit_residual = std::abs(smooth_fit(c.b1_star, c.b2_star));
        PeriodicValue v(*pair_, p_, c.barriers());
        if (c.kind == BarrierCase::InteriorFirstOrder)
            c.first_order_residual = std::abs(v.derivative(c.b1_star) - 1.0);
        else
            c.first_order_residual = v.derivative(0.0) - 1.0;
        return c;
    }

private:
    const ScalePair* pair_;
    ProblemParams p_;
    double b_star_r_ = 0.0;
    double a_star_ = 0.0;
};

inline BarrierCandidate candidate(const ScalePair& pair, const ProblemParams& p)
{
    return BarrierSolver(pair, p).candidate();
}

} // namespace lbl

#endif
