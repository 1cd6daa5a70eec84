#pragma once

#include <cstddef>
#include <vector>

#include "casimir/log_scaled.hpp"

namespace casimir::specfun {

// Modified spherical-type Bessel functions of half-integer order nu = ell + 1/2.
LogScaled bessel_i_half(int ell, double x);
LogScaled bessel_k_half(int ell, double x);

// I_{ell+3/2}(x) / I_{ell+1/2}(x), evaluated by continued fraction.
double bessel_i_ratio(int ell, double x);

// All orders 0..lmax at a single argument.
struct HalfIntegerBessel {
  double x = 0.0;
  std::vector<double> log_i;    // log I_{l+1/2}(x)
  std::vector<double> i_ratio;  // I_{l+3/2}(x) / I_{l+1/2}(x)
  std::vector<double> log_k;    // log K_{l+1/2}(x)
  std::vector<double> k_ratio;  // K_{l+3/2}(x) / K_{l+1/2}(x)
};
HalfIntegerBessel half_integer_bessel(int lmax, double x);

// Associated Legendre functions for x >= 1 without the Condon-Shortley phase:
// P_l^m(x) = (x^2 - 1)^{m/2} d^m/dx^m P_l(x).
LogScaled legendre_plm(int ell, int m, double x);
LogScaled legendre_plm_deriv(int ell, int m, double x);

// Forward recurrence in ell at fixed m for ell = m..lmax, with x = 1 + xm1.
// Writes log P_l^m(x) and the logarithmic derivative ratio P'_l^m(x) / P_l^m(x)
// to log_p[(l - m) * stride] and deriv_ratio[(l - m) * stride].
// Requires xm1 > 0.
void legendre_sequence(int lmax, int m, double xm1, double* log_p,
                       double* deriv_ratio, std::ptrdiff_t stride = 1);

double log_lambda_factor(int ell, int m);
double lambda_factor(int ell, int m);

}  // namespace casimir::specfun
