#ifndef LBL_SCALE_FUNCTIONS_HPP
#define LBL_SCALE_FUNCTIONS_HPP

#include <cmath>
#include <limits>
#include <vector>

#include "error.hpp"
#include "exp_sum.hpp"
#include "levy_model.hpp"
#include "numerics.hpp"

namespace lbl {

struct AuxScale {
    double wbar;
    double wbarbar;
    double z;
    double zbar;
};

/**
 * \brief Partial-fraction form of W^{(q)} and the functions built on it.
 *
 * For hyper-exponential jumps the roots of psi(theta) = q are real, simple and
 * interlace with the poles -phase_i, so each one is isolated in its own bracket.
 */
class ScaleContext {
public:
    ScaleContext(const LevyModel& model, double q);

    const LevyModel& model() const { return model_; }
    double q() const { return q_; }
    double phi() const { return phi_; }
    const std::vector<double>& roots() const { return roots_; }
    const std::vector<double>& coeffs() const { return coeffs_; }
    double mean_increment() const { return psi0p_; }

    double w(double x) const
    {
        if (x < 0.0) return 0.0;
        if (x == 0.0) return w0_;
        return w_(x);
    }
    /// Right derivative at 0 is the analytic limit.
    double w_prime(double x) const
    {
        if (x < 0.0) return 0.0;
        if (x == 0.0) return wp0_;
        return wp_(x);
    }
    double w_second(double x) const { return x <= 0.0 ? 0.0 : wpp_(x); }
    double wbar(double x) const { return x <= 0.0 ? 0.0 : wbar_(x); }
    double wbarbar(double x) const { return x <= 0.0 ? 0.0 : wbb_(x); }
    double z(double x) const { return x <= 0.0 ? 1.0 : z_(x); }
    double zbar(double x) const { return x <= 0.0 ? x : zbar_(x); }
    double l(double x) const { return x <= 0.0 ? x : l_(x); }
    double k(double x) const { return x <= 0.0 ? x + psi0p_ / q_ : k_(x); }
    AuxScale aux(double x) const { return {wbar(x), wbarbar(x), z(x), zbar(x)}; }

    double z_theta(double x, double theta) const
    {
        if (x <= 0.0) return std::exp(theta * x);
        return ztheta_sum(theta)(x);
    }

    /// W(0) and W'(0+) from the Levy triplet.
    double w_zero() const { return w0_; }
    double w_prime_zero() const { return wp0_; }

    const ExpSum& w_sum() const { return w_; }
    const ExpSum& w_prime_sum() const { return wp_; }
    const ExpSum& wbar_sum() const { return wbar_; }
    const ExpSum& wbarbar_sum() const { return wbb_; }
    const ExpSum& z_sum() const { return z_; }
    const ExpSum& zbar_sum() const { return zbar_; }
    const ExpSum& l_sum() const { return l_; }
    const ExpSum& k_sum() const { return k_; }

    /// Z(x,theta) = (psi(theta)-q) sum D_i e^{g_i x}/(theta-g_i) for x >= 0.
    ExpSum ztheta_sum(double theta) const;

private:
    void find_roots();

    LevyModel model_;
    double q_;
    double phi_ = 0.0;
    double psi0p_ = 0.0;
    double w0_ = 0.0;
    double wp0_ = 0.0;
    std::size_t phi_index_ = 0;
    std::vector<double> roots_;
    std::vector<double> coeffs_;
    ExpSum w_, wp_, wpp_, wbar_, wbb_, z_, zbar_, l_, k_;
};

inline void ScaleContext::find_roots()
{
    const auto phases = merged_phases(model_);
    auto f = [&](double t) { return detail::psi_any(model_, t) - q_; };
    auto solve = [&](double a, double b) {
        double x = brent(f, a, b, 0.0, 400).x;
        double d = detail::psi_prime_any(model_, x);
        if (d != 0.0) {
            double x1 = x - f(x) / d;
            if (x1 > std::min(a, b) && x1 < std::max(a, b) && std::abs(f(x1)) <= std::abs(f(x))) x = x1;
        }
        return x;
    };
    // point next to a pole on the side where psi - q has the requested sign
    auto near_pole = [&](double pole, double gap, int side, bool want_positive) {
        double d = 0.5 * gap;
        for (int i = 0; i < 200; ++i) {
            double t = pole + side * d;
            double v = f(t);
            if ((v > 0.0) == want_positive && v != 0.0) return t;
            d *= 0.5;
        }
        throw convergence_error("scale roots: cannot separate root from pole");
    };

    roots_.clear();
    roots_.push_back(phi_);
    const std::size_t n = phases.size();
    if (n == 0) {
        double s2 = model_.sigma * model_.sigma;
        // sigma^2/2 t^2 + c t - q = 0, negative root without cancellation
        double c = model_.premium;
        roots_.push_back(-(c + std::sqrt(c * c + 2.0 * s2 * q_)) / s2);
    } else {
        double rho1 = phases[0].first;
        roots_.push_back(solve(near_pole(-rho1, rho1, +1, true), 0.0));
        for (std::size_t i = 0; i + 1 < n; ++i) {
            double left = -phases[i + 1].first, right = -phases[i].first, gap = right - left;
            roots_.push_back(solve(near_pole(left, gap, +1, true), near_pole(right, gap, -1, false)));
        }
        if (model_.sigma > 0.0) {
            double pole = -phases[n - 1].first;
            double hi = near_pole(pole, phases[n - 1].first, -1, false);
            double lo = pole - 1.0;
            while (f(lo) <= 0.0) lo = pole - 2.0 * (pole - lo);
            roots_.push_back(solve(lo, hi));
        }
    }
    std::size_t degree = n + (model_.sigma > 0.0 ? 2 : 1);
    if (roots_.size() != degree) throw convergence_error("scale roots: wrong root count");
    coeffs_.clear();
    for (double g : roots_) coeffs_.push_back(1.0 / detail::psi_prime_any(model_, g));
    phi_index_ = 0;
}

inline ScaleContext::ScaleContext(const LevyModel& model, double q) : model_(model), q_(q)
{
    require_valid(model_);
    if (!(q > 0.0) || !std::isfinite(q)) throw domain_error("ScaleContext: q must be positive");
    phi_ = right_inverse_phi(model_, q_);
    psi0p_ = lbl::mean_increment(model_);
    find_roots();

    double s_d = 0.0, s_dg = 0.0, s_dg2 = 0.0;
    for (std::size_t i = 0; i < roots_.size(); ++i) {
        double g = roots_[i], d = coeffs_[i];
        w_.terms.push_back({d, g});
        wbar_.terms.push_back({d / g, g});
        wbb_.terms.push_back({d / (g * g), g});
        z_.terms.push_back({q_ * d / g, g});
        zbar_.terms.push_back({q_ * d / (g * g), g});
        s_d += d;
        s_dg += d / g;
        s_dg2 += d / (g * g);
    }
    wp_ = w_.derivative();
    wpp_ = wp_.derivative();
    wbar_.c0 = -s_dg;
    wbb_.c0 = -s_dg2;
    wbb_.c1 = -s_dg;
    z_.c0 = 1.0 - q_ * s_dg;
    zbar_.c0 = -q_ * s_dg2;
    zbar_.c1 = 1.0 - q_ * s_dg;
    l_ = zbar_ + wbar_.scaled(-psi0p_);
    k_ = zbar_;
    k_.c0 += psi0p_ / q_;

    if (model_.sigma > 0.0) {
        w0_ = 0.0;
        wp0_ = 2.0 / (model_.sigma * model_.sigma);
    } else {
        double c = model_.premium;
        w0_ = 1.0 / c;
        wp0_ = (q_ + model_.jump_intensity()) / (c * c);
    }
    (void)s_d;
}

inline ExpSum ScaleContext::ztheta_sum(double theta) const
{
    ExpSum s;
    double dq = detail::psi_any(model_, theta) - q_;
    for (std::size_t i = 0; i < roots_.size(); ++i) {
        double g = roots_[i], gap = theta - g, factor;
        if (i == phi_index_ && std::abs(gap) < 1e-7 * (1.0 + phi_))
            factor = detail::psi_prime_any(model_, 0.5 * (theta + g));
        else
            factor = dq / gap;
        s.terms.push_back({factor * coeffs_[i], g});
    }
    return s;
}

/// Contexts for q and q + r, the pair every periodic-observation formula needs.
class ScalePair {
public:
    ScalePair(const LevyModel& model, double q, double r)
        : q_(model, q), qr_(model, q + r), r_(r)
    {
        if (!(r > 0.0)) throw domain_error("ScalePair: r must be positive");
        for (std::size_t i = 0; i < q_.roots().size(); ++i) {
            double g = q_.roots()[i];
            zphi_.terms.push_back({r * q_.coeffs()[i] / (qr_.phi() - g), g});
        }
    }

    const ScaleContext& q() const { return q_; }
    const ScaleContext& qr() const { return qr_; }
    double r() const { return r_; }
    double phi_qr() const { return qr_.phi(); }
    const LevyModel& model() const { return q_.model(); }

    /// Z^{(q)}(x, Phi(q+r)).
    double z_phi(double x) const { return x <= 0.0 ? std::exp(phi_qr() * x) : zphi_(x); }
    double z_phi_prime(double x) const { return phi_qr() * z_phi(x) - r_ * q_.w(x); }
    const ExpSum& z_phi_sum() const { return zphi_; }

    /// F(x) + r int_b^x W^{(q+r)}(x-y) F(y) dy, F given by its closed form on [0,inf) and its value fx at x.
    double lift(const ExpSum& F, double fx, double b, double x) const
    {
        if (x <= b) return fx;
        return fx + r_ * convolve_tail(qr_.w_sum(), F, b, x);
    }

private:
    ScaleContext q_;
    ScaleContext qr_;
    double r_;
    ExpSum zphi_;
};

struct ConvFamily {
    double w;
    double wbar;
    double z;
    double zbar;
    double ztheta;
};

inline double w_b(const ScalePair& p, double b, double x) { return p.lift(p.q().w_sum(), p.q().w(x), b, x); }
inline double wbar_b(const ScalePair& p, double b, double x) { return p.lift(p.q().wbar_sum(), p.q().wbar(x), b, x); }
inline double z_b(const ScalePair& p, double b, double x) { return p.lift(p.q().z_sum(), p.q().z(x), b, x); }
inline double zbar_b(const ScalePair& p, double b, double x) { return p.lift(p.q().zbar_sum(), p.q().zbar(x), b, x); }
inline double ztheta_b(const ScalePair& p, double b, double x, double theta)
{
    return p.lift(p.q().ztheta_sum(theta), p.q().z_theta(x, theta), b, x);
}
inline double l_b(const ScalePair& p, double b, double x) { return p.lift(p.q().l_sum(), p.q().l(x), b, x); }

inline ConvFamily conv_family(const ScalePair& p, double b, double x, double theta)
{
    if (b < 0.0) throw domain_error("conv_family: b must be >= 0");
    return {w_b(p, b, x), wbar_b(p, b, x), z_b(p, b, x), zbar_b(p, b, x), ztheta_b(p, b, x, theta)};
}

/// Same family by adaptive quadrature of the defining convolution.
inline ConvFamily conv_family_quadrature(const ScalePair& p, double b, double x, double theta)
{
    const auto& s = p.q();
    const auto& k = p.qr();
    auto lift = [&](auto&& F) {
        double fx = F(x);
        if (x <= b) return fx;
        return fx + p.r() * integrate([&](double y) { return k.w(x - y) * F(y); }, b, x, 1e-12, 1e-15);
    };
    return {lift([&](double y) { return s.w(y); }), lift([&](double y) { return s.wbar(y); }),
            lift([&](double y) { return s.z(y); }), lift([&](double y) { return s.zbar(y); }),
            lift([&](double y) { return s.z_theta(y, theta); })};
}

// ---- auxiliary functions of the periodic problem ----

inline double h_qr(const ScalePair& p, double u)
{
    if (!(u > 0.0)) throw domain_error("h_qr: u must be > 0");
    return p.z_phi(u) / (p.r() * p.q().w(u));
}
inline double h_qr_limit_zero(const ScalePair& p)
{
    double w0 = p.q().w_zero();
    return w0 > 0.0 ? 1.0 / (p.r() * w0) : std::numeric_limits<double>::infinity();
}
inline double h_qr_limit_inf(const ScalePair& p) { return 1.0 / (p.phi_qr() - p.q().phi()); }

inline double big_h_qr(const ScalePair& p, double b)
{
    if (!(b > 0.0)) throw domain_error("big_h_qr: b must be > 0");
    const auto& s = p.q();
    return s.z(b) - s.q() * p.z_phi(b) * s.w(b) / p.z_phi_prime(b);
}
inline double big_h_qr_limit_zero(const ScalePair& p)
{
    double w0 = p.q().w_zero();
    return 1.0 - p.q().q() * w0 / (p.phi_qr() - p.r() * w0);
}

inline double big_h1(const ScaleContext& s, double u)
{
    if (!(u > 0.0)) throw domain_error("big_h1: u must be > 0");
    double w = s.w(u);
    return s.z(u) - s.q() * w * w / s.w_prime(u);
}
inline double big_h1_limit_zero(const ScaleContext& s)
{
    double w0 = s.w_zero();
    return 1.0 - s.q() * w0 * w0 / s.w_prime_zero();
}

inline double xi(const ScaleContext& s, double beta, double u)
{
    if (!(u > 0.0)) throw domain_error("xi: u must be > 0");
    return (beta * s.z(u) - 1.0) / (s.q() * s.w(u));
}
inline double xi_limit_zero(const ScaleContext& s, double beta)
{
    double w0 = s.w_zero();
    return w0 > 0.0 ? (beta - 1.0) / (s.q() * w0) : std::numeric_limits<double>::infinity();
}
inline double xi_limit_inf(const ScaleContext& s, double beta) { return beta / s.phi(); }
/// xi extended to u = 0 by its right limit.
inline double xi_ext(const ScaleContext& s, double beta, double u)
{
    return u > 0.0 ? xi(s, beta, u) : xi_limit_zero(s, beta);
}

inline double g1(const ScalePair& p, double beta, double u)
{
    if (!(u >= 0.0)) throw domain_error("g1: u must be >= 0");
    return p.q().q() * beta + p.r() * (beta * p.q().z(u) - 1.0) / p.z_phi(u);
}
inline double g1_limit_zero(const ScalePair& p, double beta) { return p.q().q() * beta + p.r() * (beta - 1.0); }
inline double g1_limit_inf(const ScalePair& p, double beta) { return p.q().q() * beta * p.phi_qr() / p.q().phi(); }

inline double g2(const ScaleContext& s, double b1, double alpha, double beta, double u)
{
    if (!(u > b1)) throw domain_error("g2: u must exceed b1");
    return (beta * (s.zbar(u) - s.zbar(b1)) - (u - b1 - alpha)) / (s.z(u) - s.z(b1));
}
inline double g2_limit_inf(const ScaleContext& s, double beta) { return beta / s.phi(); }

inline double l_q(const ScaleContext& s, double x) { return s.l(x); }
inline double k_q(const ScaleContext& s, double x) { return s.k(x); }

} // namespace lbl

#endif
