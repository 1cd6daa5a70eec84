#include "casimir/reflection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "casimir/constants.hpp"
#include "casimir/errors.hpp"
#include "casimir/specfun.hpp"

namespace casimir::reflection {

namespace {

const double kLogHalfPi = std::log(0.5 * constants::pi);

LogScaled signed_log(double log_mag, int sign) { return LogScaled::from_log(log_mag, sign); }

}  // namespace

std::vector<MiePair> mie_coefficients(int lmax, double x, double epsilon) {
  if (lmax < 1) throw DomainError("mie: requires ell >= 1");
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("mie: size parameter must be positive");
  if (!(epsilon >= 1.0)) throw DomainError("mie: epsilon must be >= 1");
  std::vector<MiePair> out(static_cast<std::size_t>(lmax) + 1);
  if (epsilon == 1.0) return out;

  const auto bx = specfun::half_integer_bessel(lmax, x);
  const bool perfect = std::isinf(epsilon);

  if (perfect) {
    for (int l = 1; l <= lmax; ++l) {
      const double rho = bx.i_ratio[l];
      const double k_lower = 1.0 / bx.k_ratio[l - 1];  // K_{l-1/2} / K_{l+1/2}
      const double base = kLogHalfPi + bx.log_i[l] - bx.log_k[l];
      const double log_a = base + std::log(x * rho + l + 1.0) - std::log(x * k_lower + l);
      const int sa = (l % 2 == 0) ? 1 : -1;
      out[l].a = signed_log(log_a, sa);
      out[l].b = signed_log(base, -sa);
    }
    return out;
  }

  const double n = std::sqrt(epsilon);
  const auto bn = specfun::half_integer_bessel(lmax, n * x);
  for (int l = 1; l <= lmax; ++l) {
    const double rx = bx.i_ratio[l];
    const double rn = bn.i_ratio[l];
    const double k_lower = 1.0 / bx.k_ratio[l - 1];
    const double base = kLogHalfPi + bx.log_i[l] - bx.log_k[l];
    const double nxrn = n * x * rn;
    const double num_a = x * n * (n * rx - rn) + (epsilon - 1.0) * (l + 1.0);
    const double den_a = epsilon * (x * k_lower + l) + nxrn + l + 1.0;
    const double num_b = x * (n * rn - rx);
    const double den_b = x * k_lower + nxrn + 2.0 * l + 1.0;
    const int sa = (l % 2 == 0) ? 1 : -1;
    out[l].a = num_a > 0.0 ? signed_log(base + std::log(num_a) - std::log(den_a), sa)
                           : LogScaled::zero();
    out[l].b = num_b > 0.0 ? signed_log(base + std::log(num_b) - std::log(den_b), -sa)
                           : LogScaled::zero();
  }
  return out;
}

std::vector<MiePair> mie_range(int lmax, double xi, double R, const DielectricModel& model) {
  if (!(xi > 0.0) || !(R > 0.0)) throw DomainError("mie: xi and R must be positive");
  return mie_coefficients(lmax, xi * R / constants::c, materials::epsilon(model, xi));
}

MiePair mie(int ell, double xi, double R, const DielectricModel& model) {
  return mie_range(ell, xi, R, model)[ell];
}

FresnelPair fresnel_x(double x, double epsilon) {
  if (!(x >= 1.0)) throw DomainError("fresnel: requires c kappa / xi >= 1");
  if (std::isinf(epsilon)) return {-1.0, 1.0};
  if (epsilon == 1.0) return {0.0, 0.0};
  const double em1 = epsilon - 1.0;
  const double s = em1 >= 0.0 ? std::hypot(x, std::sqrt(em1)) : std::sqrt(x * x + em1);
  const double te = x + s;
  const double r_te = -(em1 / te) / te;
  const double tm = epsilon * x + s;
  const double big = (epsilon + 1.0) * x * x;
  if (std::isfinite(tm) && std::isfinite(big) && std::isfinite(tm * tm)) {
    return {r_te, em1 * (big - 1.0) / (tm * tm)};
  }
  // Overflow regime: r_tm = (1 - q) / (1 + q) with q = s / (epsilon x).
  const double q = (s / x) / epsilon;
  return {r_te, (1.0 - q) / (1.0 + q)};
}

FresnelPair fresnel(double xi, double k, const DielectricModel& model) {
  if (!(xi > 0.0) || !(k >= 0.0)) throw DomainError("fresnel: requires xi > 0 and k >= 0");
  const double q = k * constants::c / xi;
  const double x = std::sqrt(1.0 + q * q);
  return fresnel_x(x, materials::epsilon(model, xi));
}

LogScaled sqrt_mie_weight(int ell1, int ell2, Polarization p1, Polarization p2, double xi,
                          double R, const DielectricModel& model) {
  const auto coeffs = mie_range(std::max(ell1, ell2), xi, R, model);
  const auto pick = [&](int l, Polarization p) {
    return p == Polarization::E ? coeffs[l].a : coeffs[l].b;
  };
  return (pick(ell1, p1) * pick(ell2, p2)).sqrt_abs();
}

}  // namespace casimir::reflection
