#include "mclink/gil_pelaez.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <queue>
#include <vector>

#include "mclink/errors.hpp"

namespace mclink {
namespace {

// Abscissae on [0, 1] of the symmetric 15-point Kronrod rule; odd entries are Gauss nodes.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

constexpr int kNodes = 15;

std::array<double, kNodes> panel_nodes(double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    std::array<double, kNodes> x{};
    for (int i = 0; i < 7; ++i) {
        x[2 * i] = c - h * kXgk[i];
        x[2 * i + 1] = c + h * kXgk[i];
    }
    x[14] = c;
    return x;
}

struct Panel {
    double a{};
    double b{};
    Eigen::ArrayXd kronrod;  // contribution at each t
    double error{};          // max over t of |kronrod - gauss|
};

Panel evaluate_panel(const SpectralImage& image, const Eigen::ArrayXd& t, double a, double b) {
    const auto x = panel_nodes(a, b);
    const double h = 0.5 * (b - a);
    Eigen::ArrayXd k = Eigen::ArrayXd::Zero(t.size());
    Eigen::ArrayXd g = Eigen::ArrayXd::Zero(t.size());
    for (int n = 0; n < kNodes; ++n) {
        const cplx F = image(x[n]);
        if (!std::isfinite(F.real()) || !std::isfinite(F.imag()))
            throw DomainError("gil_pelaez_invert: non-finite image at omega = " +
                              std::to_string(x[n]));
        const Eigen::ArrayXd wt = x[n] * t;
        const Eigen::ArrayXd re = wt.cos() * F.real() - wt.sin() * F.imag();
        const int i = n < 14 ? n / 2 : 7;
        k += kWgk[i] * re;
        if (i % 2 == 1) g += kWg[i / 2] * re;
    }
    k *= h;
    g *= h;
    return Panel{a, b, k, (k - g).abs().maxCoeff()};
}

}  // namespace

double kronrod15(const std::function<double(double)>& f, double a, double b, double* gauss) {
    const auto x = panel_nodes(a, b);
    const double h = 0.5 * (b - a);
    double k = 0.0;
    double g = 0.0;
    for (int n = 0; n < kNodes; ++n) {
        const double v = f(x[n]);
        const int i = n < 14 ? n / 2 : 7;
        k += kWgk[i] * v;
        if (i % 2 == 1) g += kWg[i / 2] * v;
    }
    if (gauss) *gauss = h * g;
    return h * k;
}

double select_omega_max(const SpectralImage& image, double ratio, double cap) {
    const double ref = std::abs(image(0.0));
    if (ref == 0.0) throw DomainError("select_omega_max: image vanishes at omega = 0");
    const auto below = [&](double w) { return std::abs(image(w)) < ratio * ref; };
    for (double w = 1.0; w <= cap; w *= 2.0)
        if (below(w) && below(2.0 * w) && below(4.0 * w)) return w;
    return cap;
}

GilPelaezResult gil_pelaez_invert(const SpectralImage& image, const Eigen::ArrayXd& t,
                                  double omega_max, double tol, int initial_panels,
                                  int max_panels) {
    if (!(omega_max > 0.0) || !(tol > 0.0) || initial_panels < 1 || max_panels < initial_panels)
        throw ConfigError("gil_pelaez_invert: invalid quadrature configuration");

    std::vector<Panel> panels;
    panels.reserve(static_cast<std::size_t>(initial_panels) * 2);
    const double width = omega_max / initial_panels;
    for (int p = 0; p < initial_panels; ++p)
        panels.push_back(evaluate_panel(image, t, p * width, (p + 1) * width));

    const auto by_error = [&](std::size_t i, std::size_t j) {
        return panels[i].error < panels[j].error;
    };
    std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(by_error)> queue(by_error);
    double total_error = 0.0;
    for (std::size_t i = 0; i < panels.size(); ++i) {
        queue.push(i);
        total_error += panels[i].error;
    }

    std::vector<bool> retired(panels.size(), false);
    int active = initial_panels;
    while (total_error > tol * std::numbers::pi && active < max_panels) {
        const std::size_t i = queue.top();
        queue.pop();
        const double mid = 0.5 * (panels[i].a + panels[i].b);
        Panel left = evaluate_panel(image, t, panels[i].a, mid);
        Panel right = evaluate_panel(image, t, mid, panels[i].b);
        total_error += left.error + right.error - panels[i].error;
        retired[i] = true;
        panels.push_back(std::move(left));
        retired.push_back(false);
        queue.push(panels.size() - 1);
        panels.push_back(std::move(right));
        retired.push_back(false);
        queue.push(panels.size() - 1);
        ++active;
    }

    GilPelaezResult out;
    out.values = Eigen::ArrayXd::Zero(t.size());
    for (std::size_t i = 0; i < panels.size(); ++i)
        if (!retired[i]) out.values += panels[i].kronrod;
    out.values /= std::numbers::pi;
    out.quadrature_error = total_error / std::numbers::pi;
    // Tail bound for images decaying at least like 1/omega^2.
    out.tail_error = omega_max * std::abs(image(omega_max)) / std::numbers::pi;
    out.omega_max = omega_max;
    out.panels = active;
    return out;
}

}  // namespace mclink
