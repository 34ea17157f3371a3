#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>

#include "mclink/gil_pelaez.hpp"
#include "mclink/special.hpp"

using mclink::cplx;

namespace {

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("faddeeva matches reference values across the plane") {
    // Reference values from an independent Faddeeva implementation.
    const std::pair<cplx, cplx> ref[] = {
        {{0.5, 0.5}, {0.5331567079121748, 0.2304882313844585}},
        {{-3.0, 0.2}, {0.015626770455552136, -0.19966856321866638}},
        {{7.8, 0.08}, {0.0007608705298176834, 0.07293372969319646}},
        {{25.0, -1.0}, {-0.0009034249050849368, 0.022549456792260194}},
        {{-0.3, -2.0}, {35.910867305370004, -93.0471730882232}},
        {{1e-8, 40.0}, {0.014100335983377817, 3.5228842528748525e-12}},
        {{-12.0, 30.0}, {0.016208859814468127, -0.0064773452016531}},
    };
    for (const auto& [z, w] : ref) {
        CAPTURE(z);
        CHECK(rel(mclink::faddeeva_w(z), w) < 1e-12);
    }
}

TEST_CASE("real erfcx matches high-precision values") {
    const std::pair<double, double> ref[] = {
        {0.0, 1.0},
        {0.3, 0.7345993345676551},
        {1.5, 0.3215854164543175},
        {5.0, 0.11070463773306863},
        {26.0, 0.021683584850562907},
        {1000.0, 0.0005641893014533876},
        {-1.2, 8.062854217063865},
        {-5.0, 144009798674.66104},
    };
    for (const auto& [x, v] : ref) {
        CAPTURE(x);
        CHECK(std::abs(mclink::erfcx(x) - v) / v < 1e-13);
    }
}

TEST_CASE("complex erfcx agrees with the real branch on the real axis") {
    for (double x : {-3.0, -0.5, 0.0, 0.7, 4.0, 60.0}) {
        CAPTURE(x);
        CHECK(std::abs(mclink::erfcx(cplx{x, 0.0}).real() - mclink::erfcx(x)) <
              1e-13 * mclink::erfcx(x));
    }
}

TEST_CASE("exp_erfc avoids overflow where the naive product fails") {
    // exp(800) overflows, erfc(30) underflows; their product is finite.
    const double v = mclink::exp_erfc(800.0, 30.0);
    CHECK(std::isfinite(v));
    CHECK(v == doctest::Approx(mclink::erfcx(30.0) * std::exp(800.0 - 900.0)).epsilon(1e-14));
    CHECK(mclink::exp_erfc(0.0, -2.0) == doctest::Approx(std::erfc(-2.0)).epsilon(1e-15));
    const cplx c = mclink::exp_erfc(cplx{-50.0, 3.0}, cplx{-4.0, 9.0});
    CHECK(std::isfinite(c.real()));
    CHECK(std::isfinite(c.imag()));
}

TEST_CASE("complex Q reduces to the Gaussian tail on the real axis") {
    CHECK(mclink::q_function({0.0, 0.0}).real() == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(mclink::q_function({1.0, 0.0}).real() ==
          doctest::Approx(0.5 * std::erfc(1.0 / std::numbers::sqrt2)).epsilon(1e-14));
    CHECK(std::abs(mclink::q_function({1.0, 0.0}).imag()) < 1e-16);
}

TEST_CASE("kronrod rule is exact for low-degree polynomials") {
    double g = 0.0;
    const double k = mclink::kronrod15([](double x) { return std::pow(x, 12) - 3 * x + 1; }, -1.0,
                                       2.0, &g);
    const double exact = (std::pow(2.0, 13) + 1.0) / 13.0 - 1.5 * (4.0 - 1.0) + 3.0;
    CHECK(k == doctest::Approx(exact).epsilon(1e-13));
    CHECK(g == doctest::Approx(exact).epsilon(1e-13));
}

TEST_CASE("gil-pelaez inversion recovers a Gaussian from its transform") {
    // Two-sided transform of exp(-(t-2)^2 / (2 * 0.25)) / sqrt(2 pi 0.25).
    const mclink::SpectralImage F = [](double w) {
        const cplx s{0.0, w};
        return std::exp(-2.0 * s + 0.125 * s * s);
    };
    Eigen::ArrayXd t = Eigen::ArrayXd::LinSpaced(41, 0.0, 4.0);
    const double wmax = mclink::select_omega_max(F, 1e-12, 1e4);
    const auto res = mclink::gil_pelaez_invert(F, t, wmax, 1e-10, 8, 4096);
    for (Eigen::Index i = 0; i < t.size(); ++i) {
        const double exact =
            std::exp(-(t[i] - 2.0) * (t[i] - 2.0) / 0.5) / std::sqrt(2.0 * std::numbers::pi * 0.25);
        CHECK(std::abs(res.values[i] - exact) < 1e-9);
    }
    CHECK(res.quadrature_error <= 1e-10);
}
