#pragma once

#include <Eigen/Core>
#include <functional>

#include "mclink/special.hpp"

namespace mclink {

/// Image F(j omega) of a real signal, sampled on omega >= 0.
using SpectralImage = std::function<cplx(double omega)>;

struct GilPelaezResult {
    Eigen::ArrayXd values;
    double quadrature_error{};  ///< Gauss-Kronrod difference estimate, summed over panels
    double tail_error{};        ///< truncation estimate beyond omega_max
    double omega_max{};
    int panels{};
};

/// Smallest power-of-two omega where |F| stays below ratio * |F(0)| for three doublings.
double select_omega_max(const SpectralImage& image, double ratio, double cap);

/// f(t) = (1/pi) int_0^omega_max Re[exp(j omega t) F(j omega)] d omega on every t,
/// with adaptive bisection of 15-point Kronrod panels until the summed error estimate <= tol.
GilPelaezResult gil_pelaez_invert(const SpectralImage& image, const Eigen::ArrayXd& t,
                                  double omega_max, double tol, int initial_panels,
                                  int max_panels);

/// Kronrod 15-point rule on [a, b]; the embedded 7-point Gauss rule is returned in gauss.
double kronrod15(const std::function<double(double)>& f, double a, double b, double* gauss);

}  // namespace mclink
