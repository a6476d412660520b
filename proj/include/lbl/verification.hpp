#ifndef LBL_VERIFICATION_HPP
#define LBL_VERIFICATION_HPP

#include <cmath>
#include <string>
#include <vector>

#include "barrier_solver.hpp"
#include "fluctuation.hpp"
#include "numerics.hpp"
#include "scale_functions.hpp"
#include "value_function.hpp"

namespace lbl {

// ---- independent quadrature oracles ----

/// int_0^inf e^{-theta x} W(x) dx: quadrature on [0,T] plus the closed-form tail beyond T.
inline double laplace_w_quadrature(const ScaleContext& s, double theta, double T = 60.0)
{
    double body = integrate([&](double x) { return std::exp(-theta * x) * s.w(x); }, 0.0, T, {1.0, 5.0, 20.0}, 1e-12);
    double tail = 0.0;
    for (std::size_t i = 0; i < s.roots().size(); ++i) {
        double g = s.roots()[i];
        tail += s.coeffs()[i] * std::exp((g - theta) * T) / (theta - g);
    }
    return body + tail;
}

/// r int_0^x W^{(q+r)}(u) F(x-u) du.
template <class F>
double convolution_quadrature(const ScalePair& pair, F&& f, double x)
{
    if (x <= 0.0) return 0.0;
    return pair.r() * integrate([&](double u) { return pair.qr().w(u) * f(x - u); }, 0.0, x, 1e-12, 1e-15);
}

/// Second form of Z(x, Phi(q+r)): r int_0^inf e^{-Phi(q+r) z} W(z+x) dz, truncated with the dominant-term tail.
inline double z_phi_second_form(const ScalePair& pair, double x, double T = 80.0)
{
    const auto& s = pair.q();
    const double ph = pair.phi_qr(), gap = ph - s.phi();
    double body = integrate([&](double z) { return std::exp(-ph * z) * s.w(z + x); }, 0.0, T, {1.0, 5.0, 20.0}, 1e-12);
    double lead = s.coeffs()[0];
    for (std::size_t i = 0; i < s.roots().size(); ++i)
        if (s.roots()[i] == s.phi()) lead = s.coeffs()[i];
    double tail = lead * std::exp(s.phi() * x - gap * T) / gap;
    return pair.r() * (body + tail);
}

/// Central difference with step h.
template <class F>
double central_difference(F&& f, double x, double h)
{
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// Five-point central difference with step h.
template <class F>
double central_difference5(F&& f, double x, double h)
{
    return (8.0 * (f(x + h) - f(x - h)) - (f(x + 2.0 * h) - f(x - 2.0 * h))) / (12.0 * h);
}

// ---- identity suite ----

struct IdentityCheck {
    std::string name;
    double residual = 0.0;
    double tolerance = 0.0;
    bool passed() const { return std::isfinite(residual) && residual <= tolerance; }
};

struct IdentityReport {
    std::vector<IdentityCheck> checks;
    bool ok() const
    {
        for (const auto& c : checks)
            if (!c.passed()) return false;
        return true;
    }
};

/**
 * \brief Every closed-form identity of the library against an independent evaluation.
 *
 * Residuals are absolute unless the name ends in "_rel". tol_scale multiplies
 * every tolerance.
 */
inline IdentityReport identity_suite(const ScalePair& pair, const ProblemParams& p, const BarrierCandidate& c,
                                     double tol_scale = 1.0)
{
    IdentityReport rep;
    auto add = [&](std::string name, double res, double tol) { rep.checks.push_back({std::move(name), res, tol * tol_scale}); };
    const auto& s = pair.q();
    const Barriers b = c.barriers();
    const double beta = p.beta;
    const auto grid20 = linspace(0.05, 3.0 * b.b2 + 1.0, 20);

    double lap = 0.0;
    for (double th : {s.phi() + 0.5, s.phi() + 1.0, s.phi() + 2.0}) {
        double ex = 1.0 / (laplace_exponent(s.model(), th) - s.q());
        lap = std::max(lap, std::abs(laplace_w_quadrature(s, th) - ex) / ex);
    }
    add("laplace_transform_rel", lap, 1e-6);

    double e1 = 0.0, e2 = 0.0, e3 = 0.0, zf = 0.0, cf = 0.0, lk = 0.0, zpd = 0.0;
    const double th = 0.7;
    for (double x : grid20) {
        e1 = std::max(e1, std::abs(pair.qr().w(x) - s.w(x) - convolution_quadrature(pair, [&](double y) { return s.w(y); }, x)));
        e2 = std::max(e2, std::abs(pair.qr().z(x) - s.z(x) - convolution_quadrature(pair, [&](double y) { return s.z(y); }, x)));
        e3 = std::max(e3, std::abs(pair.qr().z_theta(x, th) - s.z_theta(x, th) -
                                   convolution_quadrature(pair, [&](double y) { return s.z_theta(y, th); }, x)));
        zf = std::max(zf, std::abs(pair.z_phi(x) - z_phi_second_form(pair, x)) / pair.z_phi(x));
        auto a = conv_family(pair, b.b1 + 0.5 * (b.b2 - b.b1), x, th);
        auto q = conv_family_quadrature(pair, b.b1 + 0.5 * (b.b2 - b.b1), x, th);
        cf = std::max({cf, std::abs(a.w - q.w), std::abs(a.wbar - q.wbar), std::abs(a.z - q.z), std::abs(a.zbar - q.zbar),
                       std::abs(a.ztheta - q.ztheta)});
        lk = std::max(lk, std::abs(s.l(x) - s.k(x) + s.mean_increment() / s.q() * s.z(x)));
        double fd = central_difference([&](double y) { return pair.z_phi(y); }, x, 1e-5);
        zpd = std::max(zpd, std::abs(pair.z_phi_prime(x) - fd) / std::abs(fd));
    }
    add("convolution_W", e1, 1e-8);
    add("convolution_Z", e2, 1e-8);
    add("convolution_Ztheta", e3, 1e-8);
    add("z_phi_two_forms_rel", zf, 1e-8);
    add("conv_family_vs_quadrature", cf, 1e-8);
    add("l_k_identity", lk, 1e-10);
    add("z_phi_prime_vs_fd_rel", zpd, 1e-6);

    add("smooth_fit_equation", c.smooth_fit_residual, 1e-10);
    PeriodicValue v(pair, p, b);
    ZeroCostValue v0(pair, p, b.b2);
    ParisianIdentities par(pair, p, b);
    add("smooth_fit_gap", std::abs(v.jump_gap()), 1e-8);

    double col = 0.0, dec = 0.0, e16 = 0.0, vp = 0.0, forms = 0.0;
    for (double x : linspace(0.01, 5.0 * b.b2, 100)) {
        col = std::max(col, std::abs(v.value(x) - v0.value(x)));
        dec = std::max(dec, std::abs(v.value(x) - (par.dividend_part(x) - beta * par.injection_part(x))));
        if (c.kind == BarrierCase::InteriorFirstOrder)
            e16 = std::max(e16, std::abs(v.derivative(x) - beta * par.down_laplace_zero(x)));
        const double h = 1e-3 * std::max(1.0, x);
        if (std::abs(x - b.b2) > 2.0 * h && x > 2.0 * h) {
            double fd = central_difference5([&](double y) { return v.value(y); }, x, h);
            vp = std::max(vp, std::abs(v.derivative(x) - fd) / std::abs(fd));
        }
        if (x <= b.b2) forms = std::max(forms, std::abs(v.value_below(x) - v.value_full(x)));
    }
    add("collapse_to_zero_cost", col, 1e-8);
    add("dividend_injection_decomposition", dec, 1e-9);
    if (c.kind == BarrierCase::InteriorFirstOrder) add("derivative_equals_beta_down_laplace", e16, 1e-8);
    add("derivative_vs_fd_rel", vp, 1e-6);
    add("value_forms_agree_below_b2", forms, 1e-10);

    const double r = pair.r(), ph = pair.phi_qr();
    double f6 = r * s.z(b.b2) * (1.0 / ph + b.b2 - b.b1 - p.alpha) /
                (s.q() * pair.z_phi(b.b2) + r * (s.z(b.b2) - s.z(b.b1)));
    add("dividend_part_at_b2", std::abs(par.dividend_part(b.b2) - f6), 1e-10);
    add("cbar_two_forms", std::abs(par.cbar() - par.cbar_alt()), 1e-10);
    add("c_ratio_times_cbar", std::abs(par.c_ratio() * par.cbar() - par.chat()), 1e-12);
    add("cbar_theta_two_forms", std::abs(par.cbar_theta(th) - par.cbar_theta_explicit(th)), 1e-10);
    add("cbar_theta_at_zero", std::abs(par.cbar_theta(0.0) - par.cbar()), 1e-10);
    add("I_J_K_at_b2", std::max({std::abs(par.i_fn(b.b2) - 1.0), std::abs(par.j_fn(b.b2) - s.z(b.b2)),
                                 std::abs(par.k_fn(b.b2) - s.l(b.b2))}),
        1e-10);

    double pos = 0.0;
    for (double x : {0.5 * b.b1 + 0.1, b.b2, b.b2 + 1.0}) {
        double h = 1e-6;
        double fd = (par.down_laplace(x, h) - par.down_laplace(x, 0.0)) / h;
        pos = std::max(pos, std::abs(fd - par.position_at_crossing(x)));
    }
    add("position_is_theta_derivative", pos, 1e-4);

    double conv_c = 0.0, mono = 0.0;
    {
        double x = b.b2 + 0.5, prev = -1.0;
        for (double cc : {10.0, 20.0, 40.0, 80.0}) {
            double val = par.down_laplace(x, th, b.b2 + cc);
            mono = std::max(mono, prev - val);
            prev = val;
        }
        conv_c = std::abs(prev - par.down_laplace(x, th));
    }
    add("finite_level_converges", conv_c, 1e-6);
    add("finite_level_monotone", std::max(0.0, mono), 1e-12);

    double crossing = 0.0;
    for (auto kind : {ScaleKind::W, ScaleKind::Z, ScaleKind::Ztheta}) {
        double x = b.b2 + 0.5;
        crossing = std::max(crossing, std::abs(discounted_scale_at_crossing(pair, x, b.b2, b.b2 + 60.0, kind, th) -
                                               discounted_scale_at_crossing(pair, x, b.b2, infinity, kind, th)));
    }
    add("crossing_finite_to_infinite", crossing, 1e-6);

    double res1 = 0.0;
    {
        SupportedFunction one{[](double) { return 1.0; }, b.b2, {}};
        for (double x : linspace(0.1, b.b2 - 0.1, 5)) {
            auto ex = two_sided_exit(s, x, b.b2, 0.0, 0.0);
            res1 = std::max(res1, std::abs(resolvent_killed(s, x, b.b2, one) - (1.0 - ex.up - ex.down) / s.q()));
        }
    }
    add("resolvent_killed_constant", res1, 1e-8);

    auto refl = reflected_identities(s, 0.0, b.b2);
    add("reflected_hat_tau_at_zero", std::abs(refl.hat_tau - big_h1(s, b.b2)), 1e-12);
    add("reflected_at_top", std::abs(reflected_identities(s, b.b2, b.b2).eta_transform - 1.0), 1e-14);

    return rep;
}

} // namespace lbl

#endif
