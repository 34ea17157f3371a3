#pragma once

#include <Eigen/Core>
#include <utility>

#include "mclink/flow.hpp"
#include "mclink/signals.hpp"
#include "mclink/special.hpp"

namespace mclink {

/// Boundary amplitude of the reacting pulse: min(C_A0, C_B0) when k > 0, else C_A0.
double effective_amplitude(const RectPulse& rect, const ReactionSpec& rx);

/// Remaining reactant A at (x, t) for a rectangular inlet pulse.
double rect_reactant(double x, double t, const FlowEnv& env, const RectPulse& rect,
                         const ReactionSpec& rx);
/// Product AB at (x, t) for a rectangular inlet pulse.
double rect_product(double x, double t, const FlowEnv& env, const RectPulse& rect,
                        const ReactionSpec& rx);
/// Non-reacting convection-diffusion response to a rectangular inlet pulse.
double convdiff_rect(double x, double t, const FlowEnv& env, const RectPulse& rect);

Eigen::ArrayXd rect_reactant(double x, const Eigen::ArrayXd& t, const FlowEnv& env,
                                 const RectPulse& rect, const ReactionSpec& rx);
Eigen::ArrayXd rect_product(double x, const Eigen::ArrayXd& t, const FlowEnv& env,
                                const RectPulse& rect, const ReactionSpec& rx);
Eigen::ArrayXd convdiff_rect(double x, const Eigen::ArrayXd& t, const FlowEnv& env,
                             const RectPulse& rect);

struct CrossingTimes {
    double t1{};
    double t2{};
};

/// Times at which the Gaussian inlet equals C_B0. Throws NoCrossingError when the peak is below it.
CrossingTimes gauss_crossing_times(const GaussPulse& g, double C_B0);

/// Residual of a Gaussian pulse above C_B0, carried downstream by pure convection.
double gauss_appro1(double x, double t, const FlowEnv& env, const GaussPulse& g,
                       const ReactionSpec& rx);
Eigen::ArrayXd gauss_appro1(double x, const Eigen::ArrayXd& t, const FlowEnv& env,
                               const GaussPulse& g, const ReactionSpec& rx);

/// Laplace image of the clipped residual, l(s), at the inlet.
cplx residual_laplace(cplx s, const GaussPulse& g, double C_B0);

/// Laplace image of the residual after convection-diffusion over distance x.
cplx gauss_laplace(double x, cplx s, const FlowEnv& env, const GaussPulse& g, double C_B0);

struct QuadratureConfig {
    double omega_max = 0.0;       ///< upper limit [rad/s]; 0 selects it from decay_ratio
    double decay_ratio = 1e-12;   ///< |image(omega_max)| / |image(0)| for automatic selection
    double omega_cap = 1e5;       ///< hard limit on the automatic search
    double tol = 1e-9;            ///< absolute error target [mol/m^3]
    int initial_panels = 32;
    int max_panels = 1 << 15;
};

struct InversionResult {
    TimeSeries series;
    double error_bound{};   ///< quadrature plus truncation estimate [mol/m^3]
    double omega_max{};
    int panels{};
    int ringing_clipped{};  ///< samples below -tol set to zero
};

/// Real-time-domain inversion of gauss_laplace on a time grid.
InversionResult gauss_appro2_detailed(double x, const Eigen::ArrayXd& t, const FlowEnv& env,
                                         const GaussPulse& g, double C_B0,
                                         const QuadratureConfig& quad = {});
TimeSeries gauss_appro2(double x, const Eigen::ArrayXd& t, const FlowEnv& env,
                           const GaussPulse& g, double C_B0, const QuadratureConfig& quad = {});

}  // namespace mclink
