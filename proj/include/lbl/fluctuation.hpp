#ifndef LBL_FLUCTUATION_HPP
#define LBL_FLUCTUATION_HPP

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "barriers.hpp"
#include "error.hpp"
#include "exp_sum.hpp"
#include "levy_model.hpp"
#include "numerics.hpp"
#include "scale_functions.hpp"

namespace lbl {

inline constexpr double infinity = std::numeric_limits<double>::infinity();

struct ExitTransforms {
    double up;
    double down;
};

/// E_x[e^{-q tau_a^+}; tau_a^+ < tau_b^-] and E_x[e^{-q tau_b^- - theta(b - X)}; tau_b^- < tau_a^+].
inline ExitTransforms two_sided_exit(const ScaleContext& s, double x, double a, double b, double theta)
{
    if (!(a > b) || x < b || x > a) throw validation_error("two_sided_exit: need b <= x <= a, b < a");
    double ratio = s.w(x - b) / s.w(a - b);
    return {ratio, s.z_theta(x - b, theta) - s.z_theta(a - b, theta) * ratio};
}

/// Bounded test function with compact support [0, support_end] and known kinks.
struct SupportedFunction {
    std::function<double(double)> f;
    double support_end = 0.0;
    std::vector<double> breaks;
};

/// E_x int_0^{tau_b^+ ^ tau_0^-} e^{-qt} h(X_t) dt.
inline double resolvent_killed(const ScaleContext& s, double x, double b, const SupportedFunction& h)
{
    if (x < 0.0 || x > b) throw validation_error("resolvent_killed: need 0 <= x <= b");
    double wx = s.w(x), wb = s.w(b);
    auto br = h.breaks;
    br.push_back(x);
    double hi = std::min(b, h.support_end);
    return integrate([&](double y) { return h.f(y) * (wx * s.w(b - y) / wb - s.w(x - y)); }, 0.0, hi, br, 1e-11);
}

/// Resolvent of X reflected at 0 and killed on reaching b; b = infinity allowed.
inline double resolvent_reflected(const ScaleContext& s, double x, double b, const SupportedFunction& h)
{
    if (x < 0.0 || x > b) throw validation_error("resolvent_reflected: need 0 <= x <= b");
    auto br = h.breaks;
    br.push_back(x);
    double below = integrate([&](double y) { return s.w(x - y) * h.f(y); }, 0.0, std::min(x, h.support_end), br, 1e-11);
    double hi = std::min(b, h.support_end);
    if (std::isinf(b)) {
        double lap = integrate([&](double y) { return std::exp(-s.phi() * y) * h.f(y); }, 0.0, hi, h.breaks, 1e-11);
        return s.z(x) * s.phi() / s.q() * lap - below;
    }
    double top = integrate([&](double y) { return s.w(b - y) * h.f(y); }, 0.0, hi, h.breaks, 1e-11);
    return s.z(x) / s.z(b) * top - below;
}

struct PoissonTransforms {
    double p0;
    double p1;
};

/// First observation time T(1) before leaving (b, a): E_x[e^{-qT}; .] and E_x[e^{-qT} X(T); .].
inline PoissonTransforms poisson_time_identities(const ScalePair& pair, double x, double b, double a)
{
    if (!(a > b) || x > a) throw validation_error("poisson_time_identities: need b < a and x <= a");
    const auto& k = pair.qr();
    const double r = pair.r(), y = x - b;
    if (std::isinf(a)) {
        const double ph = pair.phi_qr(), qr = k.q();
        double p0 = r / qr * (1.0 - k.z(y) + qr / ph * k.w(y));
        double p1 = r * (k.w(y) / (ph * ph) - k.wbarbar(y)) + b * p0;
        return {p0, p1};
    }
    double wa = k.w(a - b);
    double p0 = r * (k.wbar(a - b) / wa * k.w(y) - k.wbar(y));
    double p1 = r * (k.wbarbar(a - b) / wa * k.w(y) - k.wbarbar(y)) + b * p0;
    return {p0, p1};
}

struct ReflectedTransforms {
    double eta_transform;
    double injection;
    double hat_tau;
};

/**
 * \brief Identities for X reflected at 0 started at x in [0,b].
 *
 * hat_tau is E_{-x}[e^{-q tau}] for the process reflected at its running
 * supremum reaching depth b, started x below the supremum.
 */
inline ReflectedTransforms reflected_identities(const ScaleContext& s, double x, double b)
{
    if (x < 0.0 || x > b || !(b > 0.0)) throw validation_error("reflected_identities: need 0 <= x <= b, b > 0");
    double ratio = s.z(x) / s.z(b);
    double hat = s.z(b - x) - s.q() * s.w(b - x) * s.w(b) / s.w_prime(b);
    return {ratio, -s.k(x) + s.k(b) * ratio, hat};
}

enum class ScaleKind { W, Z, Ztheta };

/// E_x[e^{-(q+r) tau_b^-} F(X(tau_b^-)); tau_b^- < tau_c^+], c = infinity allowed.
inline double discounted_scale_at_crossing(const ScalePair& pair, double x, double b, double c, ScaleKind which,
                                           double theta = 0.0)
{
    if (!(b >= 0.0) || x < b || (!std::isinf(c) && !(x <= c && c > b)))
        throw validation_error("discounted_scale_at_crossing: need 0 <= b <= x <= c");
    const auto& s = pair.q();
    const auto& k = pair.qr();
    ExpSum F;
    double fx;
    switch (which) {
    case ScaleKind::W: F = s.w_sum(); fx = s.w(x); break;
    case ScaleKind::Z: F = s.z_sum(); fx = s.z(x); break;
    default: F = s.ztheta_sum(theta); fx = s.z_theta(x, theta); break;
    }
    double fbx = pair.lift(F, fx, b, x);
    double ratio;
    if (std::isinf(c)) {
        ratio = pair.r() * laplace_tail(F, b, pair.phi_qr());
    } else {
        double fc = which == ScaleKind::W ? s.w(c) : which == ScaleKind::Z ? s.z(c) : s.z_theta(c, theta);
        ratio = pair.lift(F, fc, b, c) / k.w(c - b);
    }
    return fbx - k.w(x - b) * ratio;
}

/**
 * \brief Down-crossing identities of the process pushed to b1 at observation times above b2.
 */
class ParisianIdentities {
public:
    ParisianIdentities(const ScalePair& pair, const ProblemParams& p, Barriers b) : pair_(&pair), p_(p), b_(b)
    {
        require_ordered(b);
        const auto& s = pair.q();
        const double r = pair.r(), ph = pair.phi_qr(), q = s.q(), b1 = b.b1, b2 = b.b2;
        const double bottom = pair.z_phi_prime(b2) + r * (s.w(b2) - s.w(b1));
        cbar_ = (r * (s.z(b2) - s.z(b1)) + q * pair.z_phi(b2)) / bottom;
        cbar_alt_ = (g1(pair, p.beta, b2) * pair.z_phi(b2) - r * (p.beta * s.z(b1) - 1.0)) / (p.beta * bottom);
        chat_ = (r * (s.l(b2) - s.l(b1)) + r / ph * s.z(b2) + (q - s.mean_increment() * ph) / ph * pair.z_phi(b2)) / bottom;
        denom_ = q * pair.z_phi(b2) + r * (s.z(b2) - s.z(b1));
        c_ratio_ = r * (s.l(b2) - s.l(b1)) / denom_ + (r * s.z(b2) + (q - s.mean_increment() * ph) * pair.z_phi(b2)) / (ph * denom_);
    }

    double cbar() const { return cbar_; }
    double cbar_alt() const { return cbar_alt_; }
    double chat() const { return chat_; }
    double c_ratio() const { return c_ratio_; }

    /// C-bar(theta) for the infinite upper level.
    double cbar_theta(double theta) const
    {
        const auto& s = pair_->q();
        const double r = pair_->r(), ph = pair_->phi_qr();
        double top = r * laplace_tail(s.ztheta_sum(theta), b_.b2, ph) - r / ph * s.z_theta(b_.b1, theta);
        return top / (pair_->z_phi(b_.b2) - r / ph * s.w(b_.b1));
    }

    /// The same constant from the explicit two-term expression for the tail integral.
    double cbar_theta_explicit(double theta) const
    {
        const auto& s = pair_->q();
        const double r = pair_->r(), ph = pair_->phi_qr(), b2 = b_.b2;
        double dpsi = s.q() - detail::psi_any(s.model(), theta);
        double top = r / (ph - theta) * s.z_theta(b2, theta) + dpsi / (ph - theta) * pair_->z_phi(b2) -
                     r / ph * s.z_theta(b_.b1, theta);
        return top / (pair_->z_phi(b2) - r / ph * s.w(b_.b1));
    }

    double i_fn(double x) const
    {
        return w_b(*pair_, b_.b2, x) / pair_->q().w(b_.b2) - pair_->r() * pair_->qr().wbar(x - b_.b2);
    }
    double j_fn(double x) const
    {
        return z_b(*pair_, b_.b2, x) - pair_->r() * pair_->q().z(b_.b2) * pair_->qr().wbar(x - b_.b2);
    }
    double k_fn(double x) const
    {
        return l_b(*pair_, b_.b2, x) - pair_->r() * pair_->q().l(b_.b2) * pair_->qr().wbar(x - b_.b2);
    }

    /// E_x[e^{-q tau + theta U(tau)}; tau < tau_c^+], c = infinity allowed.
    double down_laplace(double x, double theta, double c = infinity) const
    {
        if (theta < 0.0) throw domain_error("down_laplace: theta must be >= 0");
        if (theta == 0.0 && std::isinf(c)) return down_laplace_zero(x);
        const auto& s = pair_->q();
        const double r = pair_->r(), b1 = b_.b1, b2 = b_.b2;
        auto top = [&](double y) {
            return ztheta_b(*pair_, b2, y, theta) - r * pair_->qr().wbar(y - b2) * s.z_theta(b1, theta);
        };
        auto bot = [&](double y) { return w_b(*pair_, b2, y) - r * pair_->qr().wbar(y - b2) * s.w(b1); };
        double cc;
        if (std::isinf(c)) {
            cc = cbar_theta(theta);
        } else {
            if (!(c > b2) || x > c) throw validation_error("down_laplace: need c > b2 and x <= c");
            cc = top(c) / bot(c);
        }
        return top(x) - cc * bot(x);
    }

    /// theta = 0, infinite upper level, written with I, J and C-bar.
    double down_laplace_zero(double x) const
    {
        const auto& s = pair_->q();
        const double r = pair_->r(), b1 = b_.b1, b2 = b_.b2, wb = pair_->qr().wbar(x - b2);
        return j_fn(x) + r * (s.z(b2) - s.z(b1)) * wb - cbar_ * (s.w(b2) * i_fn(x) + r * wb * (s.w(b2) - s.w(b1)));
    }

    /// E_x[e^{-q tau} U(tau); tau < infinity].
    double position_at_crossing(double x) const
    {
        const auto& s = pair_->q();
        const double r = pair_->r(), b1 = b_.b1, b2 = b_.b2, wb = pair_->qr().wbar(x - b2);
        return k_fn(x) + r * wb * (s.l(b2) - s.l(b1)) - chat_ * (s.w(b2) * i_fn(x) + r * wb * (s.w(b2) - s.w(b1)));
    }

    /// Discounted dividends net of fixed costs.
    double dividend_part(double x) const
    {
        const auto& s = pair_->q();
        const auto& k = pair_->qr();
        const double r = pair_->r(), ph = pair_->phi_qr(), b1 = b_.b1, b2 = b_.b2, y = x - b2;
        const double gap = b2 - b1 - p_.alpha, wb = k.wbar(y);
        return r * (z_b(*pair_, b2, x) - r * s.z(b1) * wb) * (1.0 / ph + gap) / denom_ - r * k.wbarbar(y) - r * wb * gap;
    }

    /// Discounted capital injections.
    double injection_part(double x) const
    {
        const auto& s = pair_->q();
        const double r = pair_->r(), b1 = b_.b1, b2 = b_.b2, wb = pair_->qr().wbar(x - b2);
        return -k_fn(x) - r * wb * (s.l(b2) - s.l(b1)) + c_ratio_ * (j_fn(x) + r * (s.z(b2) - s.z(b1)) * wb);
    }

    double denominator() const { return denom_; }

private:
    const ScalePair* pair_;
    ProblemParams p_;
    Barriers b_;
    double cbar_ = 0.0, cbar_alt_ = 0.0, chat_ = 0.0, c_ratio_ = 0.0, denom_ = 0.0;
};

inline double parisian_down_laplace(const ScalePair& pair, const ProblemParams& p, Barriers b, double x, double theta,
                                    double c = infinity)
{
    return ParisianIdentities(pair, p, b).down_laplace(x, theta, c);
}

inline double parisian_position_at_crossing(const ScalePair& pair, const ProblemParams& p, Barriers b, double x)
{
    return ParisianIdentities(pair, p, b).position_at_crossing(x);
}

inline double dividend_part(const ScalePair& pair, const ProblemParams& p, Barriers b, double x)
{
    return ParisianIdentities(pair, p, b).dividend_part(x);
}

inline double injection_part(const ScalePair& pair, const ProblemParams& p, Barriers b, double x)
{
    return ParisianIdentities(pair, p, b).injection_part(x);
}

struct DiagnosticCurve {
    std::vector<double> x;
    std::vector<double> first;
    std::vector<double> second;
    double first_limit = 0.0;
    double second_limit = 0.0;
    bool first_increasing = false;
    bool second_increasing = false;
};

struct ProofDiagnostics {
    BarrierCase kind = BarrierCase::BoundaryZero;
    DiagnosticCurve curve;
    double a1 = 0.0;
    double a2 = 0.0;
    bool monotone_ok = false;
    double gap_at_xmax = 0.0;
    double limit_gap = 0.0;
};

namespace detail {

/// int_lo^hi e^{-s y} F(y) dy from tail transforms.
inline double exp_window(const ExpSum& F, double lo, double hi, double s)
{
    double a = std::exp(-s * lo) * laplace_tail(F, lo, s);
    return std::isinf(hi) ? a : a - std::exp(-s * hi) * laplace_tail(F, hi, s);
}

/// Monotone up to rounding once the curve has flattened out.
inline bool monotone(const std::vector<double>& v, bool increasing, double rel_tol = 1e-12)
{
    for (std::size_t i = 1; i < v.size(); ++i) {
        double step = increasing ? v[i] - v[i - 1] : v[i - 1] - v[i];
        if (step < -rel_tol * (1.0 + std::abs(v[i]))) return false;
    }
    return true;
}

} // namespace detail

/**
 * \brief Auxiliary curves used in the optimality argument, on (b2*, x_max].
 *
 * Interior case: first increasing and second decreasing; boundary case: first
 * decreasing and second increasing. Both pairs share their limit at infinity.
 */
inline ProofDiagnostics proof_diagnostics(const ScalePair& pair, const ProblemParams& p, const BarrierCandidate& c,
                                          double x_max, std::size_t n = 200)
{
    const auto& s = pair.q();
    const auto& k = pair.qr();
    const double r = pair.r(), ph = pair.phi_qr(), q = s.q(), beta = p.beta;
    const double b1 = c.b1_star, b2 = c.b2_star, br = c.b_star_r;
    ProofDiagnostics d;
    d.kind = c.kind;
    auto& cv = d.curve;
    const double g1b2 = g1(pair, beta, b2);
    for (std::size_t i = 1; i <= n; ++i) cv.x.push_back(b2 + (x_max - b2) * double(i) / double(n));

    if (c.kind == BarrierCase::InteriorFirstOrder) {
        const double gt = g1b2 / (q * ph);
        ExpSum F = s.w_sum().scaled(gt) + s.z_sum().scaled(-beta / q);
        F.c0 += 1.0 / q;
        const double amp = (g1b2 - g1(pair, beta, br)) / (q * ph);
        for (double x : cv.x) {
            double wx = k.w(x);
            cv.first.push_back(r * convolve_window(k.w_sum(), F, br, b2, x) / wx);
            cv.second.push_back(amp * (1.0 - r * convolve_window(k.w_sum(), s.w_sum(), 0.0, br, x) / wx));
        }
        cv.first_limit = r * detail::exp_window(F, br, b2, ph);
        cv.second_limit = amp * r * detail::exp_window(s.w_sum(), br, infinity, ph);
        cv.first_increasing = true;
        cv.second_increasing = false;
    } else {
        ParisianIdentities par(pair, p, c.barriers());
        d.a1 = beta * par.cbar() - g1b2 / ph;
        d.a2 = beta * par.cbar() * s.w(b1) - (beta * s.z(b1) - 1.0);
        for (double x : cv.x) {
            double wx = k.w(x);
            cv.first.push_back(d.a1 * (1.0 - r * convolve_window(k.w_sum(), s.w_sum(), 0.0, b2, x) / wx));
            cv.second.push_back(r * d.a2 * k.wbar(x - b2) / wx);
        }
        cv.first_limit = d.a1 * r * detail::exp_window(s.w_sum(), b2, infinity, ph);
        cv.second_limit = r * d.a2 * std::exp(-ph * b2) / ph;
        cv.first_increasing = false;
        cv.second_increasing = true;
    }
    d.monotone_ok = detail::monotone(cv.first, cv.first_increasing) && detail::monotone(cv.second, cv.second_increasing);
    d.gap_at_xmax = std::abs(cv.first.back() - cv.second.back());
    d.limit_gap = std::abs(cv.first_limit - cv.second_limit);
    return d;
}

} // namespace lbl

#endif
