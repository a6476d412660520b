#ifndef LBL_NUMERICS_HPP
#define LBL_NUMERICS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <sstream>
#include <vector>

#include "error.hpp"

namespace lbl {

struct RootResult {
    double x = 0.0;
    double fx = 0.0;
    int iterations = 0;
};

/**
 * \brief Brent's method on a sign-changing bracket [a,b].
 *
 * Throws convergence_error when f(a) and f(b) have the same sign; the message
 * carries the endpoint values.
 */
template <class F>
RootResult brent(F&& f, double a, double b, double xtol = 1e-12, int max_iter = 200)
{
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return {a, fa, 0};
    if (fb == 0.0) return {b, fb, 0};
    if ((fa > 0) == (fb > 0)) {
        std::ostringstream os;
        os.precision(17);
        os << "root not bracketed: f(" << a << ")=" << fa << ", f(" << b << ")=" << fb;
        throw convergence_error(os.str());
    }
    double c = a, fc = fa, d = b - a, e = d;
    for (int it = 1; it <= max_iter; ++it) {
        if ((fb > 0) == (fc > 0)) {
            c = a;
            fc = fa;
            d = e = b - a;
        }
        if (std::abs(fc) < std::abs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        double tol = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) + 0.5 * xtol;
        double m = 0.5 * (c - b);
        if (std::abs(m) <= tol || fb == 0.0) return {b, fb, it};
        if (std::abs(e) >= tol && std::abs(fa) > std::abs(fb)) {
            double s = fb / fa, p, qq;
            if (a == c) {
                p = 2.0 * m * s;
                qq = 1.0 - s;
            } else {
                double t = fa / fc, u = fb / fc;
                p = s * (2.0 * m * t * (t - u) - (b - a) * (u - 1.0));
                qq = (t - 1.0) * (u - 1.0) * (s - 1.0);
            }
            if (p > 0) qq = -qq; else p = -p;
            if (2.0 * p < std::min(3.0 * m * qq - std::abs(tol * qq), std::abs(e * qq))) {
                e = d;
                d = p / qq;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += (std::abs(d) > tol) ? d : (m > 0 ? tol : -tol);
        fb = f(b);
    }
    throw convergence_error("brent: iteration limit reached");
}

/// Plain bisection, used as an independent oracle.
template <class F>
double bisect(F&& f, double a, double b, double xtol = 1e-13, int max_iter = 300)
{
    double fa = f(a);
    if ((fa > 0) == (f(b) > 0)) throw convergence_error("bisect: root not bracketed");
    for (int i = 0; i < max_iter && b - a > xtol; ++i) {
        double m = 0.5 * (a + b), fm = f(m);
        if (fm == 0.0) return m;
        if ((fm > 0) == (fa > 0)) { a = m; fa = fm; } else b = m;
    }
    return 0.5 * (a + b);
}

namespace detail {

inline constexpr std::array<double, 8> gk_x = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> gk_wk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> gk_wg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
void gk15(F& f, double a, double b, double& result, double& err)
{
    double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double fc = f(c);
    double rk = fc * gk_wk[7], rg = fc * gk_wg[3];
    for (int j = 0; j < 7; ++j) {
        double dx = h * gk_x[j];
        double s = f(c - dx) + f(c + dx);
        rk += gk_wk[j] * s;
        if (j % 2 == 1) rg += gk_wg[j / 2] * s;
    }
    result = rk * h;
    err = std::abs((rk - rg) * h);
}

template <class F>
double gk_adapt(F& f, double a, double b, double whole, double err, double abs_tol, double rel_tol,
                int depth, int& evals)
{
    if (err <= std::max(abs_tol, rel_tol * std::abs(whole)) || depth >= 50 || b - a < 1e-14 * (1 + std::abs(a))) {
        if (depth >= 50) throw convergence_error("quadrature: recursion limit reached");
        return whole;
    }
    double m = 0.5 * (a + b), l, el, r, er;
    gk15(f, a, m, l, el);
    gk15(f, m, b, r, er);
    evals += 30;
    if (evals > 2000000) throw convergence_error("quadrature: evaluation budget exhausted");
    return gk_adapt(f, a, m, l, el, 0.5 * abs_tol, rel_tol, depth + 1, evals) +
           gk_adapt(f, m, b, r, er, 0.5 * abs_tol, rel_tol, depth + 1, evals);
}

} // namespace detail

/// Adaptive Gauss-Kronrod (7/15) quadrature of f over [a,b].
template <class F>
double integrate(F&& f, double a, double b, double rel_tol = 1e-10, double abs_tol = 1e-14)
{
    if (a == b) return 0.0;
    if (a > b) return -integrate(f, b, a, rel_tol, abs_tol);
    double whole, err;
    detail::gk15(f, a, b, whole, err);
    int evals = 15;
    return detail::gk_adapt(f, a, b, whole, err, abs_tol, rel_tol, 0, evals);
}

/// Quadrature split at the given interior breakpoints.
template <class F>
double integrate(F&& f, double a, double b, std::vector<double> breaks, double rel_tol = 1e-10,
                 double abs_tol = 1e-14)
{
    breaks.push_back(a);
    breaks.push_back(b);
    std::sort(breaks.begin(), breaks.end());
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        double lo = std::max(a, breaks[i]), hi = std::min(b, breaks[i + 1]);
        if (hi > lo) s += integrate(f, lo, hi, rel_tol, abs_tol);
    }
    return s;
}

/// Pairwise summation for order-independent reductions.
inline double pairwise_sum(const double* v, std::size_t n)
{
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += v[i];
        return s;
    }
    std::size_t h = n / 2;
    return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

inline double pairwise_sum(const std::vector<double>& v) { return pairwise_sum(v.data(), v.size()); }

/// expm1(z)/z with the removable singularity filled in.
inline double phi1(double z)
{
    if (std::abs(z) < 1e-8) return 1.0 + 0.5 * z;
    return std::expm1(z) / z;
}

inline std::vector<double> linspace(double a, double b, std::size_t n)
{
    std::vector<double> v(n);
    if (n == 1) { v[0] = a; return v; }
    for (std::size_t i = 0; i < n; ++i) v[i] = a + (b - a) * double(i) / double(n - 1);
    return v;
}

} // namespace lbl

#endif
