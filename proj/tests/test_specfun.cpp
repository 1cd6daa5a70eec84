#include <cmath>

#include "casimir/constants.hpp"
#include "casimir/errors.hpp"
#include "casimir/specfun.hpp"
#include "doctest.h"

using namespace casimir;
using namespace casimir::specfun;
using doctest::Approx;

namespace {

double rel(double a, double b) { return std::fabs(a - b) / std::fabs(b); }

struct BesselCase {
  int ell;
  double x;
  double log_i;
  double log_k;
};

// Arbitrary-precision values (50 digits, rounded).
const BesselCase kBessel[] = {
    {0, 1.0, -0.06435199107353179875297789, -0.7742086473552725676369024},
    {1, 1.0, -1.225791352644727432363098, -0.08106146679532725821967026},
    {50, 10.0, -68.68139492670650916429005, 64.0470363346195579094487},
    {200, 1e-3, -2389.863960893475930329514, 2383.869999466156923100666},
    {5, 300.0, 296.1790880197246166055466, -302.576184316611133141477},
    {1000, 50.0, -2694.473298399320181086616, 2686.870648869349529653193},
    {20, 1000.0, 995.4170860933262409938719, -1003.018198509095294492628},
};

}  // namespace

TEST_CASE("half-integer Bessel closed forms") {
  const double s = std::sqrt(2.0 / constants::pi);
  CHECK(rel(bessel_i_half(0, 1.0).value(), s * std::sinh(1.0)) < 1e-12);
  CHECK(rel(bessel_i_half(1, 1.0).value(), s * (std::cosh(1.0) - std::sinh(1.0))) < 1e-12);
  const double k0 = std::sqrt(constants::pi / 2.0) * std::exp(-1.0);
  CHECK(rel(bessel_k_half(0, 1.0).value(), k0) < 1e-12);
  CHECK(rel(bessel_k_half(1, 1.0).value(), 2.0 * k0) < 1e-12);
  CHECK(bessel_i_half(0, 1.0).value() == Approx(0.9376748).epsilon(1e-7));
  CHECK(bessel_i_half(1, 1.0).value() == Approx(0.2935253).epsilon(1e-6));
  CHECK(bessel_k_half(0, 1.0).value() == Approx(0.4610685).epsilon(1e-7));
  CHECK(bessel_k_half(1, 1.0).value() == Approx(0.9221370).epsilon(1e-7));
}

TEST_CASE("half-integer Bessel against high-precision values") {
  for (const auto& c : kBessel) {
    CAPTURE(c.ell);
    CAPTURE(c.x);
    const LogScaled i = bessel_i_half(c.ell, c.x);
    const LogScaled k = bessel_k_half(c.ell, c.x);
    CHECK(i.sign == 1);
    CHECK(k.sign == 1);
    // Relative accuracy of the value is the absolute accuracy of its logarithm.
    CHECK(std::fabs(i.log_magnitude - c.log_i) < 1e-10 * std::max(1.0, 1e-3 * std::fabs(c.log_i)));
    CHECK(std::fabs(k.log_magnitude - c.log_k) < 1e-10 * std::max(1.0, 1e-3 * std::fabs(c.log_k)));
  }
}

TEST_CASE("batched Bessel table matches single evaluations") {
  const auto t = half_integer_bessel(300, 7.5);
  for (int l : {0, 1, 2, 17, 150, 299}) {
    CHECK(t.log_i[l] == Approx(bessel_i_half(l, 7.5).log_magnitude).epsilon(1e-13));
    CHECK(t.log_k[l] == Approx(bessel_k_half(l, 7.5).log_magnitude).epsilon(1e-13));
    CHECK(std::exp(t.log_i[l + 1] - t.log_i[l]) == Approx(t.i_ratio[l]).epsilon(1e-12));
    CHECK(bessel_i_ratio(l, 7.5) == Approx(t.i_ratio[l]).epsilon(1e-13));
  }
}

TEST_CASE("Wronskian identity over the sampled grid") {
  double worst = 0.0;
  for (double x : {1e-3, 1e-2, 0.1, 1.0, 3.7, 10.0, 50.0, 200.0, 1e3}) {
    const auto t = half_integer_bessel(201, x);
    for (int l = 0; l <= 200; l += 7) {
      // I_nu K_{nu+1} + I_{nu+1} K_nu = 1/x, scaled by x I_nu K_{nu+1}.
      const double base = std::log(x) + t.log_i[l] + t.log_k[l + 1];
      const double lhs = std::exp(base) * (1.0 + t.i_ratio[l] / t.k_ratio[l]);
      worst = std::max(worst, std::fabs(lhs - 1.0));
    }
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("Bessel domain errors") {
  CHECK_THROWS_AS(bessel_i_half(1, 0.0), DomainError);
  CHECK_THROWS_AS(bessel_k_half(1, -1.0), DomainError);
  CHECK_THROWS_AS(bessel_i_half(1, std::nan("")), DomainError);
  CHECK_THROWS_AS(bessel_k_half(-1, 1.0), DomainError);
}

TEST_CASE("associated Legendre closed forms") {
  CHECK(rel(legendre_plm(1, 1, 2.0).value(), std::sqrt(3.0)) < 1e-12);
  CHECK(rel(legendre_plm(2, 2, 2.0).value(), 9.0) < 1e-12);
  CHECK(rel(legendre_plm(3, 0, 1.0).value(), 1.0) < 1e-12);
  CHECK(rel(legendre_plm(2, 0, 2.0).value(), 5.5) < 1e-12);
  CHECK(rel(legendre_plm(3, 1, 1.5).value(), 1.5 * (5 * 2.25 - 1) * std::sqrt(1.25)) < 1e-12);
  CHECK(legendre_plm(4, 2, 1.0).is_zero());
}

TEST_CASE("associated Legendre derivative") {
  CHECK(rel(legendre_plm_deriv(1, 1, 2.0).value(), 2.0 / std::sqrt(3.0)) < 1e-12);
  CHECK(rel(legendre_plm_deriv(2, 0, 2.0).value(), 6.0) < 1e-12);
  // Endpoint limits.
  CHECK(rel(legendre_plm_deriv(5, 0, 1.0).value(), 15.0) < 1e-12);
  CHECK(std::isinf(legendre_plm_deriv(3, 1, 1.0).value()));
  CHECK(rel(legendre_plm_deriv(2, 2, 1.0).value(), 6.0) < 1e-12);

  for (int ell : {3, 10, 40}) {
    for (int m : {0, 1, 3}) {
      for (double x : {1.05, 1.5, 3.0, 20.0}) {
        const double h = 1e-5 * x;
        const double fd =
            (legendre_plm(ell, m, x + h).value() - legendre_plm(ell, m, x - h).value()) / (2 * h);
        CAPTURE(ell);
        CAPTURE(m);
        CAPTURE(x);
        CHECK(rel(legendre_plm_deriv(ell, m, x).value(), fd) < 1e-6);
      }
    }
  }
  const double x = 1.5, h = 1e-5;
  const double fd = (legendre_plm(10, 3, x + h).value() - legendre_plm(10, 3, x - h).value()) / (2 * h);
  CHECK(rel(legendre_plm_deriv(10, 3, x).value(), fd) < 1e-8);
}

TEST_CASE("associated Legendre is non-negative and handles large degree") {
  for (int ell : {1, 10, 100, 1000, 5000}) {
    for (int m : {0, 1, ell / 2, ell}) {
      for (double x : {1.0, 1.0 + 1e-9, 1.001, 2.0, 100.0}) {
        const LogScaled p = legendre_plm(ell, m, x);
        CHECK(p.sign >= 0);
        CHECK(std::isfinite(p.log_magnitude) == (p.sign != 0));
      }
    }
  }
  // P_l(x) ~ (2x)^l Gamma(l+1/2) / (sqrt(pi) l!) for large x.
  const int ell = 500;
  const double x = 1e6;
  const double asym = ell * std::log(2 * x) + std::lgamma(ell + 0.5) - 0.5 * std::log(constants::pi) -
                      std::lgamma(ell + 1.0);
  CHECK(legendre_plm(ell, 0, x).log_magnitude == Approx(asym).epsilon(1e-9));
}

TEST_CASE("Legendre sequence agrees with point evaluations") {
  const int lmax = 400, m = 7;
  for (double offset : {1e-12, 1e-4, 0.3, 50.0, 1e5}) {
    // Offsets exactly representable relative to 1.
    const double xm1 = (1.0 + offset) - 1.0;
    std::vector<double> lp(lmax - m + 1), q(lmax - m + 1);
    legendre_sequence(lmax, m, xm1, lp.data(), q.data());
    for (int l : {m, m + 1, 50, 399, lmax}) {
      const double x = 1.0 + xm1;
      CAPTURE(xm1);
      CAPTURE(l);
      CHECK(lp[l - m] == Approx(legendre_plm(l, m, x).log_magnitude).epsilon(1e-11));
      const LogScaled d = legendre_plm_deriv(l, m, x);
      CHECK(q[l - m] == Approx(std::exp(d.log_magnitude - lp[l - m])).epsilon(1e-9));
    }
  }
}

TEST_CASE("Legendre domain errors") {
  CHECK_THROWS_AS(legendre_plm(2, 1, 0.5), DomainError);
  CHECK_THROWS_AS(legendre_plm(1, 2, 2.0), DomainError);
  CHECK_THROWS_AS(legendre_plm_deriv(3, 1, 0.99), DomainError);
}

TEST_CASE("Lambda normalization") {
  CHECK(rel(lambda_factor(1, 1), std::sqrt(0.75)) < 1e-14);
  CHECK(rel(lambda_factor(2, 1), std::sqrt(5.0 / 36.0)) < 1e-14);
  CHECK(rel(lambda_factor(1, 0), std::sqrt(1.5)) < 1e-14);
  CHECK(std::fabs(log_lambda_factor(60, 30) - -123.4519155760889166549817) < 1e-12 * 123.45);
  for (int ell : {2, 10, 80, 1000}) {
    for (int m = 1; m < ell; ++m) CHECK(log_lambda_factor(ell, m + 1) < log_lambda_factor(ell, m));
  }
  CHECK_THROWS_AS(lambda_factor(0, 0), DomainError);
  CHECK_THROWS_AS(lambda_factor(3, 4), DomainError);
}

TEST_CASE("LogScaled arithmetic") {
  const LogScaled a = LogScaled::from_value(-3.0), b = LogScaled::from_value(2.0);
  CHECK((a * b).value() == Approx(-6.0));
  CHECK((a / b).value() == Approx(-1.5));
  CHECK((a + b).value() == Approx(-1.0));
  CHECK((b - b).is_zero());
  CHECK((a * LogScaled::zero()).is_zero());
  const LogScaled big = LogScaled::from_log(1000.0), tiny = LogScaled::from_log(-1000.0);
  CHECK((big * tiny).value() == Approx(1.0));
  CHECK((big + big).log_magnitude == Approx(1000.0 + std::log(2.0)));
}
