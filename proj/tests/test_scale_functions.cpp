#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "lbl/scale_functions.hpp"
#include "lbl/verification.hpp"

using namespace lbl;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

LevyModel bm() { return LevyModel::from_premium(0.5, std::sqrt(2.0), {}); }
LevyModel cl() { return LevyModel::from_premium(2.0, 0.0, {{1.0, 1.0, 1.0}}); }
LevyModel jd() { return LevyModel::from_premium(1.0, 1.0, {{0.5, 2.0, 1.0}}); }
LevyModel hx() { return LevyModel::from_drift(1.5, 0.5, {{1.0, 4.0, 0.6}, {1.0, 1.0 / 1.5, 0.4}}); }

std::vector<LevyModel> fixtures() { return {bm(), cl(), jd(), hx()}; }

} // namespace

TEST_CASE("Brownian scale function is a hyperbolic sine", "[scale]")
{
    ScaleContext s(LevyModel::from_drift(0.0, std::sqrt(2.0), {}), 1.0);
    CHECK_THAT(s.w(1.0), WithinAbs(std::sinh(1.0), 1e-13));
    CHECK_THAT(s.z(1.0), WithinAbs(std::cosh(1.0), 1e-13));
    CHECK_THAT(s.w(1.0), WithinRel(integrate([&](double x) { return s.w_prime(x); }, 0.0, 1.0), 1e-10));
}

TEST_CASE("values below zero", "[scale]")
{
    for (const auto& m : fixtures()) {
        ScaleContext s(m, 0.1);
        CHECK(s.w(-0.5) == 0.0);
        auto a = s.aux(-2.0);
        CHECK(a.wbar == 0.0);
        CHECK(a.wbarbar == 0.0);
        CHECK(a.z == 1.0);
        CHECK(a.zbar == -2.0);
        CHECK_THAT(s.z_theta(-1.0, 0.4), WithinAbs(std::exp(-0.4), 1e-15));
    }
}

TEST_CASE("scale function at zero", "[scale]")
{
    ScaleContext c(cl(), 0.1);
    CHECK_THAT(c.w_zero(), WithinAbs(0.5, 1e-15));
    CHECK_THAT(c.w(1e-10), WithinAbs(0.5, 1e-9));
    CHECK_THAT(c.w_prime_zero(), WithinAbs((0.1 + 1.0) / 4.0, 1e-14));
    CHECK_THAT(c.w_prime(1e-10), WithinAbs(c.w_prime_zero(), 1e-8));
    for (const auto& m : {bm(), jd()}) {
        ScaleContext s(m, 0.1);
        CHECK(s.w_zero() == 0.0);
        CHECK_THAT(s.w_prime_zero(), WithinAbs(2.0 / (m.sigma * m.sigma), 1e-14));
        CHECK_THAT(s.w_prime(1e-9), WithinRel(s.w_prime_zero(), 1e-6));
    }
}

TEST_CASE("Laplace transform of W", "[scale]")
{
    for (const auto& m : fixtures())
        for (double q : {0.05, 0.1}) {
            ScaleContext s(m, q);
            for (double th : {s.phi() + 0.5, s.phi() + 1.0, s.phi() + 2.0})
                CHECK_THAT(laplace_w_quadrature(s, th), WithinRel(1.0 / (laplace_exponent(m, th) - q), 1e-6));
        }
}

TEST_CASE("W is increasing and e^{-Phi x} W is log-concave and bounded", "[scale]")
{
    for (const auto& m : fixtures()) {
        ScaleContext s(m, 0.1);
        double prev = -1.0, lim = 1.0 / laplace_exponent_derivative(m, s.phi());
        auto g = [&](double x) { return std::log(std::exp(-s.phi() * x) * s.w(x)); };
        for (double x : linspace(0.01, 30.0, 300)) {
            CHECK(s.w(x) > prev);
            prev = s.w(x);
            double e = std::exp(-s.phi() * x) * s.w(x);
            CHECK(e <= lim * (1.0 + 1e-12));
            CHECK(g(x) >= 0.5 * (g(x - 0.005) + g(x + 0.005)) - 1e-12);
        }
    }
}

TEST_CASE("integrated scale functions against quadrature", "[scale]")
{
    for (const auto& m : fixtures()) {
        ScaleContext s(m, 0.1);
        for (double x : linspace(0.1, 6.0, 12)) {
            double wb = integrate([&](double y) { return s.w(y); }, 0.0, x);
            CHECK_THAT(s.wbar(x), WithinRel(wb, 1e-9));
            CHECK_THAT(s.wbarbar(x), WithinRel(integrate([&](double y) { return s.wbar(y); }, 0.0, x), 1e-9));
            CHECK_THAT(s.z(x) - 1.0 - s.q() * wb, WithinAbs(0.0, 1e-9));
            CHECK_THAT(s.zbar(x), WithinRel(integrate([&](double y) { return s.z(y); }, 0.0, x), 1e-9));
            CHECK_THAT(s.w_second(x), WithinRel((s.w_prime(x + 1e-5) - s.w_prime(x - 1e-5)) / 2e-5, 1e-6));
        }
    }
}

TEST_CASE("tilted Z", "[scale]")
{
    for (const auto& m : fixtures()) {
        ScaleContext s(m, 0.1);
        for (double x : {0.3, 1.0, 4.0}) {
            CHECK_THAT(s.z_theta(x, 0.0), WithinRel(s.z(x), 1e-12));
            CHECK_THAT(s.z_theta(x, s.phi()), WithinRel(std::exp(s.phi() * x), 1e-12));
            double th = 0.8;
            double I = integrate([&](double z) { return std::exp(-th * z) * s.w(z); }, 0.0, x, 1e-12);
            double ref = std::exp(th * x) * (1.0 + (s.q() - laplace_exponent(m, th)) * I);
            CHECK_THAT(s.z_theta(x, th), WithinRel(ref, 1e-9));
        }
        CHECK(s.z_theta(0.0, 2.0) == 1.0);
    }
}

TEST_CASE("Z at Phi(q+r): both forms and derivative", "[scale]")
{
    for (const auto& m : fixtures()) {
        ScalePair p(m, 0.1, 0.5);
        CHECK_THAT(p.z_phi(0.0), WithinAbs(1.0, 1e-14));
        for (double x : linspace(0.05, 6.0, 20)) {
            double ph = p.phi_qr();
            double first = std::exp(ph * x) *
                           (1.0 - p.r() * integrate([&](double z) { return std::exp(-ph * z) * p.q().w(z); }, 0.0, x, 1e-12));
            CHECK_THAT(p.z_phi(x), WithinRel(first, 1e-8));
            CHECK_THAT(p.z_phi(x), WithinRel(z_phi_second_form(p, x), 1e-8));
            double fd = central_difference([&](double y) { return p.z_phi(y); }, x, 1e-5);
            CHECK_THAT(p.z_phi_prime(x), WithinRel(fd, 1e-6));
        }
    }
}

TEST_CASE("convolution identities", "[scale]")
{
    for (const auto& m : fixtures()) {
        ScalePair p(m, 0.1, 0.5);
        const auto& s = p.q();
        for (double x : linspace(0.05, 8.0, 20)) {
            CHECK_THAT(p.qr().w(x) - s.w(x), WithinAbs(convolution_quadrature(p, [&](double y) { return s.w(y); }, x), 1e-8));
            CHECK_THAT(p.qr().z(x) - s.z(x), WithinAbs(convolution_quadrature(p, [&](double y) { return s.z(y); }, x), 1e-8));
            CHECK_THAT(p.qr().z_theta(x, 0.6) - s.z_theta(x, 0.6),
                       WithinAbs(convolution_quadrature(p, [&](double y) { return s.z_theta(y, 0.6); }, x), 1e-8));
        }
    }
}

TEST_CASE("convolution family", "[scale]")
{
    for (const auto& m : fixtures()) {
        ScalePair p(m, 0.1, 0.5);
        const auto& s = p.q();
        for (double x : {0.2, 0.9}) {
            auto f = conv_family(p, 1.0, x, 0.4);
            CHECK(f.w == s.w(x));
            CHECK(f.wbar == s.wbar(x));
            CHECK(f.z == s.z(x));
            CHECK(f.zbar == s.zbar(x));
            CHECK(f.ztheta == s.z_theta(x, 0.4));
        }
        for (double x : {0.5, 2.0, 6.0}) {
            auto f = conv_family(p, 0.0, x, 0.0);
            CHECK_THAT(f.w, WithinRel(p.qr().w(x), 1e-10));
            CHECK_THAT(f.z, WithinRel(p.qr().z(x), 1e-10));
            for (double b : {0.5, 1.5}) {
                auto a = conv_family(p, b, x, 0.3);
                auto q = conv_family_quadrature(p, b, x, 0.3);
                CHECK_THAT(a.w, WithinAbs(q.w, 1e-8));
                CHECK_THAT(a.wbar, WithinAbs(q.wbar, 1e-8));
                CHECK_THAT(a.z, WithinAbs(q.z, 1e-8));
                CHECK_THAT(a.zbar, WithinAbs(q.zbar, 1e-8));
                CHECK_THAT(a.ztheta, WithinAbs(q.ztheta, 1e-8));
            }
        }
        CHECK_THROWS_AS(conv_family(p, -1.0, 1.0, 0.0), lbl::domain_error);
    }
}

TEST_CASE("h is decreasing with the stated limits", "[scale]")
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.01, 20.0);
    for (const auto& m : fixtures()) {
        ScalePair p(m, 0.1, 0.5);
        for (int i = 0; i < 100; ++i) {
            double a = u(rng), b = u(rng);
            if (a == b) continue;
            if (a > b) std::swap(a, b);
            CHECK(h_qr(p, a) > h_qr(p, b));
        }
        CHECK_THAT(h_qr(p, 50.0), WithinAbs(h_qr_limit_inf(p), 1e-4));
        CHECK_THROWS_AS(h_qr(p, 0.0), lbl::domain_error);
    }
    ScalePair c(cl(), 0.1, 0.5);
    CHECK_THAT(h_qr_limit_zero(c), WithinAbs(2.0 / 0.5, 1e-14));
    CHECK_THAT(h_qr(c, 1e-9), WithinAbs(h_qr_limit_zero(c), 1e-7));
    CHECK(std::isinf(h_qr_limit_zero(ScalePair(bm(), 0.1, 0.5))));
}

TEST_CASE("H functions", "[scale]")
{
    ScalePair c(cl(), 0.1, 0.5);
    const double cc = 2.0;
    CHECK_THAT(big_h_qr_limit_zero(c), WithinAbs(1.0 - 0.1 / (cc * c.phi_qr() - 0.5), 1e-14));
    CHECK_THAT(big_h_qr(c, 1e-9), WithinAbs(big_h_qr_limit_zero(c), 1e-7));
    CHECK_THAT(big_h1_limit_zero(c.q()), WithinAbs(1.0 - 0.1 / (1.0 + 0.1), 1e-14));
    CHECK_THAT(big_h1(c.q(), 1e-9), WithinAbs(big_h1_limit_zero(c.q()), 1e-7));
    for (const auto& m : fixtures()) {
        ScalePair p(m, 0.1, 0.5);
        CHECK_THAT(big_h_qr(p, 60.0), WithinAbs(0.0, 1e-4));
        CHECK_THAT(big_h1(p.q(), 60.0), WithinAbs(0.0, 1e-4));
        double ph = 2.0, p1 = 2.0;
        for (double u : linspace(0.02, 15.0, 50)) {
            double h = big_h_qr(p, u), h1 = big_h1(p.q(), u);
            CHECK(h < ph);
            CHECK(h1 < p1);
            ph = h;
            p1 = h1;
        }
    }
}

TEST_CASE("H ordering in r and against H1", "[scale]")
{
    for (const auto& m : fixtures()) {
        ScalePair lo(m, 0.1, 0.2), hi(m, 0.1, 1.0);
        for (double u : linspace(0.05, 12.0, 50)) {
            CHECK(big_h_qr(lo, u) < big_h_qr(hi, u));
            CHECK(big_h_qr(hi, u) < big_h1(hi.q(), u));
        }
    }
}

TEST_CASE("xi, g1, g2 limits", "[scale]")
{
    const double beta = 1.5;
    for (const auto& m : fixtures()) {
        ScalePair p(m, 0.1, 0.5);
        const auto& s = p.q();
        CHECK_THAT(g1(p, beta, 1e-10), WithinAbs(g1_limit_zero(p, beta), 1e-8));
        CHECK_THAT(g1(p, beta, 320.0), WithinRel(g1_limit_inf(p, beta), 1e-4));
        CHECK_THAT(g2(s, 0.5, 0.1, beta, 200.0), WithinAbs(g2_limit_inf(s, beta), 1e-4));
        CHECK_THAT(xi(s, beta, 320.0), WithinAbs(xi_limit_inf(s, beta), 1e-4));
        CHECK_THROWS_AS(xi(s, beta, 0.0), lbl::domain_error);
        CHECK_THROWS_AS(g2(s, 1.0, 0.1, beta, 1.0), lbl::domain_error);
        for (double x : linspace(-1.0, 6.0, 30))
            CHECK_THAT(l_q(s, x) - k_q(s, x) + s.mean_increment() / s.q() * s.z(x), WithinAbs(0.0, 1e-10));
    }
}

TEST_CASE("derivative identity for g1", "[scale]")
{
    const double beta = 1.5;
    for (const auto& m : fixtures()) {
        ScalePair p(m, 0.1, 0.5);
        const auto& s = p.q();
        for (double u : {0.3, 1.0, 2.5, 6.0}) {
            double fd = central_difference([&](double y) { return g1(p, beta, y); }, u, 1e-5);
            double an = p.r() * s.w(u) / p.z_phi(u) * (g1(p, beta, u) - s.q() * p.phi_qr() * xi(s, beta, u));
            CHECK_THAT(an, WithinRel(fd, 1e-6));
        }
    }
}
