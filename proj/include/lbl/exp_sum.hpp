#ifndef LBL_EXP_SUM_HPP
#define LBL_EXP_SUM_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "numerics.hpp"

namespace lbl {

struct ExpTerm {
    double coef;
    double rate;
};

/// f(x) = c0 + c1 x + sum coef_i exp(rate_i x), the closed form of every scale function for x >= 0.
struct ExpSum {
    double c0 = 0.0;
    double c1 = 0.0;
    std::vector<ExpTerm> terms;

    double operator()(double x) const
    {
        double s = c0 + c1 * x;
        for (const auto& t : terms) s += t.coef * std::exp(t.rate * x);
        return s;
    }

    ExpSum derivative() const
    {
        ExpSum d;
        d.c0 = c1;
        for (const auto& t : terms) d.terms.push_back({t.coef * t.rate, t.rate});
        return d;
    }

    ExpSum scaled(double a) const
    {
        ExpSum s = *this;
        s.c0 *= a;
        s.c1 *= a;
        for (auto& t : s.terms) t.coef *= a;
        return s;
    }

    ExpSum& operator+=(const ExpSum& o)
    {
        c0 += o.c0;
        c1 += o.c1;
        terms.insert(terms.end(), o.terms.begin(), o.terms.end());
        return *this;
    }
};

inline ExpSum operator+(ExpSum a, const ExpSum& b) { return a += b; }

namespace detail {

/// (e^{g s} - e^{d s})/(g - d), evaluated without cancellation.
inline double exp_divdiff(double g, double d, double s)
{
    double hi = std::max(g, d), gap = std::abs(g - d);
    double z = gap * s;
    double frac = z < 1e-8 ? s * (1.0 - 0.5 * z) : -std::expm1(-z) / gap;
    return std::exp(hi * s) * frac;
}

/// int_0^s u e^{d u} du.
inline double lin_exp_moment(double d, double s)
{
    double z = d * s;
    if (std::abs(z) < 1e-3) return s * s * (0.5 + z / 3.0 + z * z / 8.0 + z * z * z / 30.0);
    return (std::exp(z) * (z - 1.0) + 1.0) / (d * d);
}

} // namespace detail

/**
 * \brief int_b^x K(x-y) F(y) dy for x >= b, K a pure exponential sum.
 */
inline double convolve_tail(const ExpSum& K, const ExpSum& F, double b, double x)
{
    double s = x - b;
    if (s <= 0.0) return 0.0;
    double acc = 0.0;
    for (const auto& k : K.terms) {
        double d = k.rate;
        double part = 0.0;
        for (const auto& f : F.terms) part += f.coef * std::exp(f.rate * b) * detail::exp_divdiff(f.rate, d, s);
        double e0 = s * phi1(d * s);
        if (F.c0 != 0.0) part += F.c0 * e0;
        if (F.c1 != 0.0) part += F.c1 * (x * e0 - detail::lin_exp_moment(d, s));
        acc += k.coef * part;
    }
    return acc;
}

/// int_lo^hi K(x-y) F(y) dy for x >= hi.
inline double convolve_window(const ExpSum& K, const ExpSum& F, double lo, double hi, double x)
{
    double w = hi - lo;
    if (w <= 0.0) return 0.0;
    double acc = 0.0;
    for (const auto& k : K.terms) {
        double d = k.rate;
        double part = 0.0;
        for (const auto& f : F.terms)
            part += f.coef * std::exp(f.rate * lo + d * (x - hi)) * detail::exp_divdiff(f.rate, d, w);
        if (F.c0 != 0.0 || F.c1 != 0.0) {
            // int_lo^hi e^{d(x-y)}(c0 + c1 y) dy with y = hi - t
            double base = std::exp(d * (x - hi));
            double m0 = w * phi1(d * w);
            double m1 = detail::lin_exp_moment(d, w);
            part += base * (F.c0 * m0 + F.c1 * (hi * m0 - m1));
        }
        acc += k.coef * part;
    }
    return acc;
}

/// int_b^inf e^{-s (y-b)} F(y) dy, requires s above every rate of F.
inline double laplace_tail(const ExpSum& F, double b, double s)
{
    double acc = F.c0 / s + F.c1 * (b / s + 1.0 / (s * s));
    for (const auto& f : F.terms) acc += f.coef * std::exp(f.rate * b) / (s - f.rate);
    return acc;
}

} // namespace lbl

#endif
