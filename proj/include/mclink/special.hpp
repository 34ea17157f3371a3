#pragma once

#include <complex>

namespace mclink {

using cplx = std::complex<double>;

/// Faddeeva function w(z) = exp(-z^2) erfc(-iz), valid on the whole plane.
cplx faddeeva_w(cplx z);

/// Scaled complementary error function exp(x^2) erfc(x).
double erfcx(double x);
cplx erfcx(cplx z);

/// exp(a) * erfc(b) without intermediate overflow.
double exp_erfc(double a, double b);
cplx exp_erfc(cplx a, cplx b);

/// Gaussian tail probability extended to complex arguments, Q(z) = erfc(z / sqrt 2) / 2.
cplx q_function(cplx z);

}  // namespace mclink
