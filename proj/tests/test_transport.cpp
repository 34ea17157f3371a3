#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "mclink/errors.hpp"
#include "mclink/flow.hpp"
#include "mclink/transport.hpp"

using namespace mclink;

namespace {

const FlowEnv kEnv{0.002, 1e-9, 1e-8, std::nullopt, std::nullopt};
const RectPulse kRect{1.5, 2.0, 0.0};
const ReactionSpec kRx{400.0, 1.5};

}  // namespace

TEST_CASE("reynolds number") {
    const double dh = hydraulic_diameter({1e-3, 20e-6, 10e-6});
    CHECK(dh == doctest::Approx(13.3333e-6).epsilon(1e-4));
    CHECK(reynolds_number(1000.0, 0.002, dh, 1e-3) == doctest::Approx(0.0266667).epsilon(1e-4));
    CHECK(reynolds_number(1.0, 1.0, 1.0, 1.0) == 1.0);
    CHECK(reynolds_number(2.0, 3.0, 5.0, 7.0) * 2.0 == reynolds_number(2.0, 6.0, 5.0, 7.0));
    CHECK_THROWS_AS(reynolds_number(0.0, 1.0, 1.0, 1.0), DomainError);
    CHECK_THROWS_AS(reynolds_number(1.0, 1.0, 1.0, -1.0), DomainError);
}

TEST_CASE("poiseuille profile") {
    CHECK(poiseuille_velocity(0.0, 1e-5, 0.002) == 0.004);
    CHECK(poiseuille_velocity(1e-5, 1e-5, 0.002) == 0.0);
    CHECK(poiseuille_velocity(1e-5 / std::numbers::sqrt2, 1e-5, 0.002) ==
          doctest::Approx(0.002).epsilon(1e-14));
    CHECK_THROWS_AS(poiseuille_velocity(2e-5, 1e-5, 0.002), DomainError);
    CHECK_THROWS_AS(poiseuille_velocity(0.0, 0.0, 0.002), DomainError);
}

TEST_CASE("taylor-aris effective diffusivity") {
    CHECK(taylor_aris_deff(1e-9, 0.0, 10e-6, 20e-6) == 1e-9);
    CHECK(taylor_aris_deff(1e-9, 0.002, 0.0, 20e-6) == 1e-9);
    CHECK(taylor_aris_deff(1e-9, 0.002, 1e-12, 20e-6) == doctest::Approx(1e-9).epsilon(1e-12));
    // Independent re-evaluation of the dispersion formula.
    const double D = 1e-9, v = 0.002, h = 10e-6, w = 20e-6;
    const double pe_term = 8.5 * std::pow(v * h * w, 2) / (210.0 * D * D * (h * h + 2.4 * h * w + w * w));
    const double expected = D + D * pe_term;
    CHECK(taylor_aris_deff(D, v, h, w) == doctest::Approx(expected).epsilon(1e-14));
    const auto env = with_taylor_aris({v, D, 0.0, {}, {}}, {1e-3, w, h});
    CHECK(env.D_eff == taylor_aris_deff(D, v, h, w));
    CHECK_NOTHROW(validate(env));
    CHECK_THROWS_AS(validate(FlowEnv{0.002, 1e-9, 1e-10, {}, {}}), ConfigError);
}

TEST_CASE("rectangular-pulse closed form against high-precision reference values") {
    // Reference: direct exp * erfc products in 40-digit arithmetic.
    struct Ref { double x, t, g, cab; };
    const Ref refs[] = {
        {5e-6, 0.01, 0.65871441165875969, 0.78183669883412111},
        {5e-6, 0.05, 0.65875041613410987, 0.84108486814451121},
        {5e-6, 1.0, 0.65875041613410987, 0.84124958386589013},
        {5e-6, 2.02, 1.2920983133240994e-8, 0.01024437955368873},
        {20e-6, 0.01, 0.055518438452180173, 0.88602831878069913},
        {20e-6, 0.05, 0.055796869460840442, 1.4416964027858227},
        {20e-6, 2.02, 1.4899873970317643e-7, 0.12742982900786689},
        {540e-6, 0.2, 3.802706071563905e-39, 0.023601419445399059555},
        {540e-6, 0.27, 3.8027060715639055e-39, 0.79053093132996334507},
        {540e-6, 1.0, 3.8027060715639055e-39, 1.5},
        {540e-6, 2.3, 0.0, 0.29894870736163126274},
        {540e-6, 2.5, 0.0, 2.1850500073627395363e-6},
    };
    for (const auto& r : refs) {
        CAPTURE(r.x);
        CAPTURE(r.t);
        const double g = rect_reactant(r.x, r.t, kEnv, kRect, kRx);
        const double p = rect_product(r.x, r.t, kEnv, kRect, kRx);
        CHECK(std::abs(g - r.g) <= 1e-12 * std::max(r.g, 1e-300) + 1e-15);
        CHECK(std::abs(p - r.cab) <= 1e-11 * r.cab + 1e-15);
    }
}

TEST_CASE("rectangular-pulse closed form boundary and trivial cases") {
    for (double t : {0.1, 0.9, 1.9}) {
        CHECK(rect_reactant(0.0, t, kEnv, kRect, kRx) == doctest::Approx(1.5).epsilon(1e-14));
        CHECK(convdiff_rect(0.0, t, kEnv, kRect) == doctest::Approx(1.5).epsilon(1e-14));
    }
    CHECK(rect_product(540e-6, 1.0, kEnv, kRect, {0.0, 1.5}) == 0.0);
    CHECK(rect_reactant(100e-6, -1.0, kEnv, kRect, kRx) == 0.0);
    CHECK(convdiff_rect(100e-6, 30.0, kEnv, kRect) < 1e-200);
    // Amplitude is limited by the scarcer reactant.
    CHECK(effective_amplitude({3.0, 2.0, 0.0}, {400.0, 1.5}) == 1.5);
    CHECK(effective_amplitude({3.0, 2.0, 0.0}, {0.0, 1.5}) == 3.0);
}

TEST_CASE("property: k = 0 reduces to convection-diffusion") {
    const ReactionSpec none{0.0, 1.5};
    for (double x : {0.0, 10e-6, 200e-6, 540e-6, 2e-3}) {
        for (int i = 0; i < 100; ++i) {
            const double t = 0.05 * i;
            const double a = rect_reactant(x, t, kEnv, kRect, none);
            const double b = convdiff_rect(x, t, kEnv, kRect);
            CHECK(std::abs(a - b) <= 1e-12 * std::max(std::abs(b), 1e-300));
        }
    }
}

TEST_CASE("property: causality, boundedness and mass ordering on random samples") {
    std::mt19937_64 rng(20260417);
    std::uniform_real_distribution<double> ux(0.0, 1.5e-3), ut(0.0, 6.0), uc(0.1, 4.0),
        uk(0.0, 800.0);
    for (int trial = 0; trial < 2000; ++trial) {
        const RectPulse rect{uc(rng), 2.0, 0.0};
        const ReactionSpec rx{uk(rng), uc(rng)};
        const double x = ux(rng);
        const double t = ut(rng);
        const double C0 = effective_amplitude(rect, rx);
        const double a = rect_reactant(x, t, kEnv, rect, rx);
        const double p = rect_product(x, t, kEnv, rect, rx);
        REQUIRE(std::isfinite(a));
        REQUIRE(std::isfinite(p));
        CHECK(a >= -1e-14);
        CHECK(a <= C0 * (1.0 + 1e-12));
        CHECK(p >= -1e-12);
        CHECK(p <= C0 * (1.0 + 1e-12));
        const RectPulse summed{C0, rect.T_on, rect.t0};
        const double h = convdiff_rect(x, t, kEnv, summed);
        CHECK(std::abs(a + p - h) <= 1e-10 * std::max(h, 1e-300) + 1e-15);
        // Precursors are below 1e-6 of the plateau once v x / D_eff >= 100.
        if (x >= 500e-6 && t < x / (2.0 * kEnv.v_eff)) {
            CHECK(a <= 1e-6 * C0);
            CHECK(p <= 1e-6 * C0);
        }
    }
}

TEST_CASE("gaussian crossing times") {
    const GaussPulse g{3.0, 2.0, 0.25};
    // Independent root-find of C_A(0, t) = C_B0.
    const auto ct = gauss_crossing_times(g, 0.5);
    CHECK(ct.t1 == doctest::Approx(1.1151361357295326).epsilon(1e-13));
    CHECK(ct.t2 == doctest::Approx(2.8848638642704674).epsilon(1e-13));
    CHECK(ct.t1 < g.mu);
    CHECK(ct.t2 > g.mu);
    const auto tangent = gauss_crossing_times(g, g.peak());
    CHECK(tangent.t1 == doctest::Approx(2.0).epsilon(1e-7));
    CHECK(tangent.t2 == doctest::Approx(2.0).epsilon(1e-7));
    CHECK_THROWS_AS(gauss_crossing_times(g, 1.1 * g.peak()), NoCrossingError);
    CHECK_THROWS_AS(gauss_crossing_times(g, 0.0), DomainError);
}

TEST_CASE("property: crossing times are symmetric about the mean") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> umu(3.1, 8.0), us(0.01, 1.0), uf(0.01, 0.99);
    for (int i = 0; i < 1000; ++i) {
        const GaussPulse g{3.0, umu(rng), us(rng)};
        const auto ct = gauss_crossing_times(g, uf(rng) * g.peak());
        CHECK(ct.t1 + ct.t2 == 2.0 * g.mu);
    }
}

TEST_CASE("Gaussian-pulse first approximation") {
    const GaussPulse g{3.0, 2.0, 0.25};
    const double x = 540e-6;
    const double shift = x / kEnv.v_eff;
    // Threshold absent: a delayed Gaussian.
    CHECK(gauss_appro1(x, 2.0 + shift, kEnv, g, {400.0, 0.0}) == doctest::Approx(g.peak()));
    CHECK(gauss_appro1(0.0, 1.7, kEnv, g, {400.0, 0.0}) == doctest::Approx(g(1.7)));
    // Clipped residual.
    const ReactionSpec rx{400.0, 0.5};
    CHECK(gauss_appro1(0.0, 2.0, kEnv, g, rx) == doctest::Approx(g.peak() - 0.5));
    CHECK(gauss_appro1(0.0, 1.0, kEnv, g, rx) == 0.0);
    CHECK(gauss_appro1(0.0, 3.0, kEnv, g, rx) == 0.0);
    CHECK(gauss_appro1(x, 2.0 + shift, kEnv, g, rx) == doctest::Approx(g.peak() - 0.5));
    CHECK(gauss_appro1(x, 2.0 + shift, kEnv, g, {400.0, 5.0}) == 0.0);
}

TEST_CASE("Gaussian-pulse Laplace image") {
    const GaussPulse g{3.0, 2.0, 0.25};
    for (double cb : {0.5, 1.0}) {
        // Quadrature of the residual area and mean time.
        const double area = cb == 0.5 ? 1.8848186106174394 : 1.1194959415085943;
        const double l0 = gauss_laplace(0.0, {0.0, 0.0}, kEnv, g, cb).real();
        CHECK(l0 == doctest::Approx(area).epsilon(1e-12));
        CHECK(std::abs(gauss_laplace(0.0, {0.0, 0.0}, kEnv, g, cb).imag()) < 1e-15);
        const double s = 1e-4;
        const double ls = gauss_laplace(0.0, {s, 0.0}, kEnv, g, cb).real();
        CHECK(ls == doctest::Approx(area * (1.0 - s * 2.0)).epsilon(1e-7));
    }
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ur(0.0, 5.0), ui(-200.0, 200.0), ux(0.0, 1e-3);
    for (int i = 0; i < 500; ++i) {
        const cplx s{ur(rng), ui(rng)};
        const double x = ux(rng);
        const cplx a = gauss_laplace(x, s, kEnv, g, 0.5);
        const cplx b = gauss_laplace(x, std::conj(s), kEnv, g, 0.5);
        CHECK(std::abs(a - std::conj(b)) <= 1e-12 * std::max(std::abs(a), 1e-300));
    }
    // Large frequencies stay finite thanks to scaling.
    const cplx far = gauss_laplace(0.0, {0.0, 5e4}, kEnv, g, 0.5);
    CHECK(std::isfinite(far.real()));
    CHECK(std::abs(far) < 1e-6);
}

TEST_CASE("Gaussian-pulse second approximation") {
    const GaussPulse g{3.0, 2.0, 0.25};
    SUBCASE("inverting the bare Gaussian at the inlet reproduces it") {
        const Eigen::ArrayXd t = Eigen::ArrayXd::LinSpaced(81, 0.0, 4.0);
        QuadratureConfig q;
        q.tol = 1e-8;
        const auto res = gauss_appro2_detailed(0.0, t, kEnv, g, 0.0, q);
        for (Eigen::Index i = 0; i < t.size(); ++i)
            CHECK(std::abs(res.series.c()[i] - g(t[i])) <= q.tol);
        CHECK(res.error_bound <= q.tol);
    }
    SUBCASE("no threshold: dispersed Gaussian peaks at the convected mean") {
        const double x = 540e-6;
        const Eigen::ArrayXd t = time_grid(0.0, 4.0, 1e-3);
        const auto c = gauss_appro2(x, t, kEnv, g, 0.0);
        const double expected = 2.0 + x / kEnv.v_eff;
        CHECK(std::abs(c.peak_time() - expected) <= 0.02 * expected);
        CHECK(c.peak() == doctest::Approx(g.peak()).epsilon(0.01));
    }
    SUBCASE("threshold above peak gives an all-zero trace") {
        const Eigen::ArrayXd t = time_grid(0.0, 4.0, 0.01);
        CHECK(gauss_appro2(540e-6, t, kEnv, g, 5.0).peak() == 0.0);
    }
}
