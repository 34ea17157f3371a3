#include "mclink/transport.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mclink/errors.hpp"
#include "mclink/gil_pelaez.hpp"

namespace mclink {
namespace {

void require_station(double x) {
    if (!(x >= 0.0)) throw DomainError("station x must be >= 0");
}

// Step response of amplitude C0 for a reacting front with speed parameter alpha.
// Reduces to the convection-diffusion step response when alpha == v.
double step_response(double x, double tau, double v, double D, double alpha, double C0) {
    if (tau <= 0.0) return 0.0;
    const double s = 2.0 * std::sqrt(D * tau);
    const double lo = exp_erfc((v - alpha) * x / (2.0 * D), (x - alpha * tau) / s);
    const double hi = exp_erfc((v + alpha) * x / (2.0 * D), (x + alpha * tau) / s);
    return 0.5 * C0 * (lo + hi);
}

double windowed(double x, double t, const FlowEnv& env, const RectPulse& rect, double alpha,
                double C0) {
    const double tau = t - rect.t0;
    double out = step_response(x, tau, env.v_eff, env.D_eff, alpha, C0);
    if (tau > rect.T_on) out -= step_response(x, tau - rect.T_on, env.v_eff, env.D_eff, alpha, C0);
    return out;
}

double reacting_alpha(const FlowEnv& env, double k, double C0) {
    if (k == 0.0) return env.v_eff;
    return std::sqrt(env.v_eff * env.v_eff + 4.0 * k * C0 * env.D_eff);
}

template <class F>
Eigen::ArrayXd map_times(const Eigen::ArrayXd& t, F&& f) {
    Eigen::ArrayXd out(t.size());
    for (Eigen::Index i = 0; i < t.size(); ++i) out[i] = f(t[i]);
    return out;
}

}  // namespace

double effective_amplitude(const RectPulse& rect, const ReactionSpec& rx) {
    return rx.k > 0.0 ? std::min(rect.C0, rx.C_B0) : rect.C0;
}

double rect_reactant(double x, double t, const FlowEnv& env, const RectPulse& rect,
                         const ReactionSpec& rx) {
    require_station(x);
    const double C0 = effective_amplitude(rect, rx);
    return windowed(x, t, env, rect, reacting_alpha(env, rx.k, C0), C0);
}

double rect_product(double x, double t, const FlowEnv& env, const RectPulse& rect,
                        const ReactionSpec& rx) {
    require_station(x);
    if (rx.k == 0.0) return 0.0;
    const double C0 = effective_amplitude(rect, rx);
    const double h = windowed(x, t, env, rect, env.v_eff, C0);
    const double g = windowed(x, t, env, rect, reacting_alpha(env, rx.k, C0), C0);
    return h - g;
}

double convdiff_rect(double x, double t, const FlowEnv& env, const RectPulse& rect) {
    require_station(x);
    return windowed(x, t, env, rect, env.v_eff, rect.C0);
}

Eigen::ArrayXd rect_reactant(double x, const Eigen::ArrayXd& t, const FlowEnv& env,
                                 const RectPulse& rect, const ReactionSpec& rx) {
    return map_times(t, [&](double ti) { return rect_reactant(x, ti, env, rect, rx); });
}

Eigen::ArrayXd rect_product(double x, const Eigen::ArrayXd& t, const FlowEnv& env,
                                const RectPulse& rect, const ReactionSpec& rx) {
    return map_times(t, [&](double ti) { return rect_product(x, ti, env, rect, rx); });
}

Eigen::ArrayXd convdiff_rect(double x, const Eigen::ArrayXd& t, const FlowEnv& env,
                             const RectPulse& rect) {
    return map_times(t, [&](double ti) { return convdiff_rect(x, ti, env, rect); });
}

CrossingTimes gauss_crossing_times(const GaussPulse& g, double C_B0) {
    validate(g);
    if (!(C_B0 > 0.0)) throw DomainError("gauss_crossing_times: C_B0 must be > 0");
    const double ratio = C_B0 * std::sqrt(2.0 * std::numbers::pi * g.sigma2) / g.C0;
    if (ratio > 1.0) throw NoCrossingError("gauss_crossing_times: pulse peak below C_B0");
    const double half = std::sqrt(-2.0 * g.sigma2 * std::log(ratio));
    // Snap the half-width to the grid of mu so that t1 + t2 == 2 mu holds exactly (t1 >= 0).
    const double t2 = g.mu + half;
    const double snapped = t2 - g.mu;
    return {g.mu - snapped, t2};
}

double gauss_appro1(double x, double t, const FlowEnv& env, const GaussPulse& g,
                       const ReactionSpec& rx) {
    require_station(x);
    const double tau = t - x / env.v_eff;
    if (rx.C_B0 == 0.0) return g(tau);
    CrossingTimes ct;
    try {
        ct = gauss_crossing_times(g, rx.C_B0);
    } catch (const NoCrossingError&) {
        return 0.0;
    }
    if (tau < ct.t1 || tau > ct.t2) return 0.0;
    return std::max(0.0, g(tau) - rx.C_B0);
}

Eigen::ArrayXd gauss_appro1(double x, const Eigen::ArrayXd& t, const FlowEnv& env,
                               const GaussPulse& g, const ReactionSpec& rx) {
    return map_times(t, [&](double ti) { return gauss_appro1(x, ti, env, g, rx); });
}

cplx residual_laplace(cplx s, const GaussPulse& g, double C_B0) {
    validate(g);
    const double sigma = std::sqrt(g.sigma2);
    const cplx a = -s * g.mu + 0.5 * g.sigma2 * s * s;
    if (C_B0 == 0.0) return g.C0 * std::exp(a);

    const auto ct = gauss_crossing_times(g, C_B0);
    // C0 exp(a) Q(z) = (C0 / 2) exp(a) erfc(z / sqrt 2), z = (t_i + sigma^2 s - mu) / sigma.
    const auto gauss_part = [&](double ti) {
        const cplx z = (ti + g.sigma2 * s - g.mu) / sigma;
        return 0.5 * g.C0 * exp_erfc(a, z / std::numbers::sqrt2);
    };
    const double span = ct.t2 - ct.t1;
    const cplx w = s * span;
    // (1 - exp(-w)) / w, with a series near the origin.
    cplx ratio;
    if (std::abs(w) < 1e-3)
        ratio = 1.0 - w / 2.0 + w * w / 6.0 - w * w * w / 24.0;
    else
        ratio = (1.0 - std::exp(-w)) / w;
    const cplx rect = C_B0 * span * std::exp(-s * ct.t1) * ratio;
    return gauss_part(ct.t1) - gauss_part(ct.t2) - rect;
}

cplx gauss_laplace(double x, cplx s, const FlowEnv& env, const GaussPulse& g, double C_B0) {
    require_station(x);
    const double v = env.v_eff;
    const cplx root = std::sqrt(v * v + 4.0 * env.D_eff * s);
    // (v - root) / (2 D) = -2 s / (v + root), free of cancellation near s = 0.
    const cplx spatial = std::exp(-2.0 * s * x / (v + root));
    const cplx out = residual_laplace(s, g, C_B0) * spatial;
    if (!std::isfinite(out.real()) || !std::isfinite(out.imag()))
        throw DomainError("gauss_laplace: overflow at omega = " + std::to_string(s.imag()));
    return out;
}

InversionResult gauss_appro2_detailed(double x, const Eigen::ArrayXd& t, const FlowEnv& env,
                                         const GaussPulse& g, double C_B0,
                                         const QuadratureConfig& quad) {
    require_station(x);
    if (C_B0 > 0.0) {
        try {
            gauss_crossing_times(g, C_B0);
        } catch (const NoCrossingError&) {
            return {TimeSeries(t, Eigen::ArrayXd::Zero(t.size()), x, Source::analytical), 0.0,
                    0.0, 0, 0};
        }
    }
    const SpectralImage image = [&](double omega) {
        return gauss_laplace(x, cplx{0.0, omega}, env, g, C_B0);
    };
    const double omega_max = quad.omega_max > 0.0
                                 ? quad.omega_max
                                 : select_omega_max(image, quad.decay_ratio, quad.omega_cap);
    auto res = gil_pelaez_invert(image, t, omega_max, quad.tol, quad.initial_panels,
                                 quad.max_panels);
    const double bound = res.quadrature_error + res.tail_error;
    if (bound > quad.tol)
        throw AccuracyError("gauss_appro2: quadrature did not converge", bound);

    int clipped = 0;
    for (Eigen::Index i = 0; i < res.values.size(); ++i) {
        if (res.values[i] < -quad.tol) ++clipped;
        if (res.values[i] < 0.0) res.values[i] = 0.0;
    }
    return {TimeSeries(t, std::move(res.values), x, Source::analytical), bound, omega_max,
            res.panels, clipped};
}

TimeSeries gauss_appro2(double x, const Eigen::ArrayXd& t, const FlowEnv& env,
                           const GaussPulse& g, double C_B0, const QuadratureConfig& quad) {
    return gauss_appro2_detailed(x, t, env, g, C_B0, quad).series;
}

}  // namespace mclink
