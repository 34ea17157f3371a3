#include "mclink/special.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace mclink {
namespace {

// Weideman's rational expansion of w(z) in the upper half plane,
// w(z) = 2 p(Z) / (L - iz)^2 + 1 / (sqrt(pi) (L - iz)),  Z = (L + iz) / (L - iz).
// N = 40 gives about 2e-14 relative accuracy everywhere with Im z >= 0.
constexpr int kTerms = 40;

struct WeidemanTable {
    double L{};
    std::array<double, kTerms> a{};  // a[j] multiplies Z^j
};

WeidemanTable build_table() {
    constexpr int M = 2 * kTerms;
    constexpr int M2 = 2 * M;
    WeidemanTable tab;
    tab.L = std::sqrt(kTerms / std::numbers::sqrt2);

    std::array<double, M2> f{};
    // f[0] = 0, f[n] for n = 1..M2-1 samples k = n - M.
    for (int n = 1; n < M2; ++n) {
        const int k = n - M;
        const double t = tab.L * std::tan(k * std::numbers::pi / M / 2.0);
        f[n] = std::exp(-t * t) * (tab.L * tab.L + t * t);
    }
    std::array<double, M2> shifted{};
    for (int n = 0; n < M2; ++n) shifted[n] = f[(n + M) % M2];

    for (int j = 1; j <= kTerms; ++j) {
        double acc = 0.0;
        for (int n = 0; n < M2; ++n)
            acc += shifted[n] * std::cos(2.0 * std::numbers::pi * j * n / M2);
        tab.a[j - 1] = acc / M2;
    }
    return tab;
}

const WeidemanTable& table() {
    static const WeidemanTable tab = build_table();
    return tab;
}

cplx w_upper(cplx z) {
    const auto& tab = table();
    const cplx iz{-z.imag(), z.real()};
    const cplx den = tab.L - iz;
    const cplx Z = (tab.L + iz) / den;
    cplx p = tab.a[kTerms - 1];
    for (int j = kTerms - 2; j >= 0; --j) p = p * Z + tab.a[j];
    return 2.0 * p / (den * den) + 1.0 / (std::sqrt(std::numbers::pi) * den);
}

// Real-axis specialisation: w(iy) for y >= 0 with purely real arithmetic.
double w_imag_axis(double y) {
    const auto& tab = table();
    const double den = tab.L + y;
    const double Z = (tab.L - y) / den;
    double p = tab.a[kTerms - 1];
    for (int j = kTerms - 2; j >= 0; --j) p = p * Z + tab.a[j];
    return 2.0 * p / (den * den) + 1.0 / (std::sqrt(std::numbers::pi) * den);
}

}  // namespace

cplx faddeeva_w(cplx z) {
    if (z.imag() >= 0.0) return w_upper(z);
    // Reflection w(z) = 2 exp(-z^2) - w(-z).
    return 2.0 * std::exp(-z * z) - w_upper(-z);
}

double erfcx(double x) {
    if (std::isnan(x)) return x;
    if (x >= 0.0) return w_imag_axis(x);
    if (x < -26.7) return INFINITY;
    return 2.0 * std::exp(x * x) - w_imag_axis(-x);
}

cplx erfcx(cplx z) { return faddeeva_w(cplx{-z.imag(), z.real()}); }

double exp_erfc(double a, double b) {
    if (b >= 0.0) return erfcx(b) * std::exp(a - b * b);
    return std::exp(a) * std::erfc(b);
}

cplx exp_erfc(cplx a, cplx b) {
    if (b.real() >= 0.0) return erfcx(b) * std::exp(a - b * b);
    // erfc(b) = 2 - erfc(-b) keeps the scaled factor bounded.
    return 2.0 * std::exp(a) - erfcx(-b) * std::exp(a - b * b);
}

cplx q_function(cplx z) {
    return 0.5 * exp_erfc(cplx{0.0, 0.0}, z / std::numbers::sqrt2);
}

}  // namespace mclink
