#include "casimir/specfun.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "casimir/constants.hpp"
#include "casimir/errors.hpp"

namespace casimir::specfun {

namespace {

constexpr double kLog2 = 0.69314718055994530942;
constexpr double kLogPi = 1.14472988584940017414;

void check_argument(int ell, double x, const char* who) {
  if (ell < 0) throw DomainError(std::string(who) + ": negative order");
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError(std::string(who) + ": argument must be finite and positive");
  }
}

double log_sinh(double x) {
  if (x > 20.0) return x - kLog2 + std::log1p(-std::exp(-2.0 * x));
  return std::log(std::sinh(x));
}

double log_i_half_seed(double x) { return 0.5 * (kLog2 - kLogPi - std::log(x)) + log_sinh(x); }
double log_k_half_seed(double x) { return 0.5 * (kLogPi - kLog2 - std::log(x)) - x; }

}  // namespace

double bessel_i_ratio(int ell, double x) {
  check_argument(ell, x, "bessel_i_ratio");
  // I_{nu+1}/I_nu = 1 / (b1 + 1/(b2 + 1/(b3 + ...))), b_j = 2(nu + j)/x.
  const double nu = ell + 0.5;
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-16;
  double f = 2.0 * (nu + 1.0) / x;
  double c = f;
  double d = 0.0;
  const long max_iter = 100000000L;
  for (long j = 2; j < max_iter; ++j) {
    const double b = 2.0 * (nu + static_cast<double>(j)) / x;
    d = b + d;
    if (d == 0.0) d = tiny;
    c = b + 1.0 / c;
    if (c == 0.0) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::fabs(delta - 1.0) < eps) return 1.0 / f;
  }
  throw ConvergenceError("bessel_i_ratio: continued fraction did not converge", 0.0, 1.0 / f);
}

HalfIntegerBessel half_integer_bessel(int lmax, double x) {
  check_argument(lmax, x, "half_integer_bessel");
  HalfIntegerBessel out;
  out.x = x;
  const auto n = static_cast<std::size_t>(lmax) + 1;
  out.log_i.resize(n);
  out.i_ratio.resize(n);
  out.log_k.resize(n);
  out.k_ratio.resize(n);

  out.i_ratio[lmax] = bessel_i_ratio(lmax, x);
  for (int l = lmax; l > 0; --l) {
    out.i_ratio[l - 1] = 1.0 / ((2.0 * l + 1.0) / x + out.i_ratio[l]);
  }
  out.log_i[0] = log_i_half_seed(x);
  for (int l = 1; l <= lmax; ++l) out.log_i[l] = out.log_i[l - 1] + std::log(out.i_ratio[l - 1]);

  out.k_ratio[0] = 1.0 + 1.0 / x;
  for (int l = 1; l <= lmax; ++l) out.k_ratio[l] = (2.0 * l + 1.0) / x + 1.0 / out.k_ratio[l - 1];
  out.log_k[0] = log_k_half_seed(x);
  for (int l = 1; l <= lmax; ++l) out.log_k[l] = out.log_k[l - 1] + std::log(out.k_ratio[l - 1]);
  return out;
}

LogScaled bessel_i_half(int ell, double x) {
  check_argument(ell, x, "bessel_i_half");
  if (ell == 0) return LogScaled::from_log(log_i_half_seed(x));
  double rho = bessel_i_ratio(ell - 1, x);
  double log_i = std::log(rho);
  for (int l = ell - 1; l > 0; --l) {
    rho = 1.0 / ((2.0 * l + 1.0) / x + rho);
    log_i += std::log(rho);
  }
  return LogScaled::from_log(log_i + log_i_half_seed(x));
}

LogScaled bessel_k_half(int ell, double x) {
  check_argument(ell, x, "bessel_k_half");
  double log_k = log_k_half_seed(x);
  double q = 1.0 + 1.0 / x;
  for (int l = 0; l < ell; ++l) {
    if (l > 0) q = (2.0 * l + 1.0) / x + 1.0 / q;
    log_k += std::log(q);
  }
  return LogScaled::from_log(log_k);
}

namespace {

void check_legendre(int ell, int m, double x, const char* who) {
  if (m < 0 || m > ell) throw DomainError(std::string(who) + ": requires 0 <= m <= ell");
  if (!(x >= 1.0) || !std::isfinite(x)) {
    throw DomainError(std::string(who) + ": requires finite x >= 1");
  }
}

// log((2m - 1)!!)
double log_double_factorial_odd(int m) {
  return std::lgamma(2.0 * m + 1.0) - m * kLog2 - std::lgamma(m + 1.0);
}

}  // namespace

void legendre_sequence(int lmax, int m, double xm1, double* log_p, double* deriv_ratio,
                       std::ptrdiff_t stride) {
  const double x = 1.0 + xm1;
  const double x2m1 = xm1 * (2.0 + xm1);
  double scale = log_double_factorial_odd(m) + 0.5 * m * std::log(x2m1);
  double p_prev = 0.0;
  double p = 1.0;
  double d_prev = 0.0;
  double d = m * x / x2m1;
  log_p[0] = scale;
  deriv_ratio[0] = d;
  for (int l = m; l < lmax; ++l) {
    const double inv = 1.0 / (l - m + 1.0);
    const double p_next = ((2.0 * l + 1.0) * x * p - (l + m) * p_prev) * inv;
    const double d_next = ((2.0 * l + 1.0) * (p + x * d) - (l + m) * d_prev) * inv;
    p_prev = p;
    p = p_next;
    d_prev = d;
    d = d_next;
    if (p > 1e250) {
      const double s = 1.0 / p;
      scale += std::log(p);
      p_prev *= s;
      d_prev *= s;
      d *= s;
      p = 1.0;
    }
    const std::ptrdiff_t k = static_cast<std::ptrdiff_t>(l - m + 1) * stride;
    log_p[k] = scale + std::log(p);
    deriv_ratio[k] = d / p;
  }
}

LogScaled legendre_plm(int ell, int m, double x) {
  check_legendre(ell, m, x, "legendre_plm");
  if (x == 1.0) return m == 0 ? LogScaled::from_value(1.0) : LogScaled::zero();
  std::vector<double> lp(ell - m + 1), dr(ell - m + 1);
  legendre_sequence(ell, m, x - 1.0, lp.data(), dr.data());
  return LogScaled::from_log(lp.back());
}

LogScaled legendre_plm_deriv(int ell, int m, double x) {
  check_legendre(ell, m, x, "legendre_plm_deriv");
  if (x == 1.0) {
    const double l = ell;
    switch (m) {
      case 0: return LogScaled::from_value(0.5 * l * (l + 1.0));
      case 1: return LogScaled::from_log(std::numeric_limits<double>::infinity());
      case 2: return LogScaled::from_value(0.25 * (l - 1.0) * l * (l + 1.0) * (l + 2.0));
      default: return LogScaled::zero();
    }
  }
  std::vector<double> lp(ell - m + 1), dr(ell - m + 1);
  legendre_sequence(ell, m, x - 1.0, lp.data(), dr.data());
  const double ratio = dr.back();
  if (ratio == 0.0) return LogScaled::zero();
  return LogScaled::from_log(lp.back() + std::log(std::fabs(ratio)), ratio > 0 ? 1 : -1);
}

double log_lambda_factor(int ell, int m) {
  if (ell < 1 || m < 0 || m > ell) {
    throw DomainError("lambda_factor: requires ell >= 1 and 0 <= m <= ell");
  }
  const double l = ell;
  return 0.5 * (std::log((2.0 * l + 1.0) / (l * (l + 1.0))) + std::lgamma(l - m + 1.0) -
                std::lgamma(l + m + 1.0));
}

double lambda_factor(int ell, int m) { return std::exp(log_lambda_factor(ell, m)); }

}  // namespace casimir::specfun
