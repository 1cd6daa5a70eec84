#include <cmath>
#include <sstream>

#include "casimir/constants.hpp"
#include "casimir/errors.hpp"
#include "casimir/lindet.hpp"
#include "casimir/roundtrip.hpp"
#include "casimir/specfun.hpp"
#include "doctest.h"
#include "oracle.hpp"

using namespace casimir;
using doctest::Approx;
using PP = PlanePolarization;

namespace {

double rel(double a, double b) { return std::fabs(a - b) / std::fabs(b); }

// Parameters with prescribed alpha = xi (L + R) / c.
RoundTripParams with_alpha(double alpha, int m, int ell_dim, DielectricModel plane = PerfectReflector{}) {
  RoundTripParams p;
  p.R = 1e-6;
  p.L = 1e-7;
  p.xi = alpha * constants::c / (p.R + p.L);
  p.m = m;
  p.ell_dim = ell_dim;
  p.plane_model = plane;
  p.quad_rel_tol = 1e-12;
  return p;
}

RoundTripParams aspect(double ratio, double alpha, int m, int ell_dim = 0) {
  RoundTripParams p;
  p.L = 1e-6;
  p.R = ratio * p.L;
  p.xi = alpha * constants::c / (p.R + p.L);
  p.m = m;
  p.ell_dim = ell_dim > 0 ? ell_dim : default_ell_dim(p.R, p.L);
  return p;
}

struct IntegralCase {
  int l1, l2, m;
  double alpha;
  bool te;
  double epsilon;  // 0 = perfect
  double A, B, C;
};

// Arbitrary-precision quadrature of the defining integrals.
const IntegralCase kIntegrals[] = {
    {1, 1, 1, 1.0, false, 0, 0.05075073121372975946, 0.12687682803432439865, 0.07612609682059463919},
    {3, 5, 2, 0.7, false, 0, 861.69101635651671596, 93541.746315821196079, 10810.874437063503401},
    {5, 3, 2, 0.7, false, 0, 861.69101635651671596, 93541.746315821196079, 6527.2716442383704119},
    {2, 4, 0, 1.3, false, 0, 0.0, 20.997868599614955189, 0.0},
    {4, 7, 1, 2.5, false, 10, 0.51775711675515757150, 63.221747630102696466, 7.1527194059507847848},
    {4, 7, 1, 2.5, true, 10, -0.20129749330229925306, -19.145463890235662912, -2.4379429992145203811},
    {7, 4, 1, 2.5, true, 10, -0.20129749330229925306, -19.145463890235662912, -1.3924373474350311680},
    {20, 25, 3, 0.05, false, 0, 1.5842546929084776789e108, 1.7426799749607363791e115,
     5.8089333498108942128e111},
};

}  // namespace

TEST_CASE("kernel f") {
  const auto p = with_alpha(1.0, 1, 3);
  const double expected = 0.75 * std::exp(-2.0);
  CHECK(roundtrip::kernel_f(p, 1.0, 0, PP::TM, 1, 1).value() == Approx(expected).epsilon(1e-14));
  CHECK(roundtrip::kernel_f(p, 1.0, 0, PP::TE, 1, 1).value() == Approx(-expected).epsilon(1e-14));
  CHECK(std::fabs(roundtrip::kernel_f(p, 800.0, 1, PP::TM, 1, 1).value()) < 1e-300);
  CHECK(roundtrip::kernel_f(p, 2.0, -1, PP::TM, 1, 2).value() ==
        Approx(specfun::lambda_factor(1, 1) * specfun::lambda_factor(2, 1) / 3.0 * std::exp(-4.0)));
  CHECK_THROWS_AS(roundtrip::kernel_f(p, 0.5, 0, PP::TM, 1, 1), DomainError);
  const auto vac = with_alpha(1.0, 1, 3, Constant{1.0});
  CHECK(roundtrip::kernel_f(vac, 1.5, 0, PP::TM, 1, 1).is_zero());
}

TEST_CASE("A, B, C integrals against high-precision quadrature") {
  for (const auto& c : kIntegrals) {
    const DielectricModel plane = c.epsilon > 0 ? DielectricModel{Constant{c.epsilon}} : PerfectReflector{};
    const auto p = with_alpha(c.alpha, c.m, std::max(c.l1, c.l2), plane);
    const PP pol = c.te ? PP::TE : PP::TM;
    CAPTURE(c.l1);
    CAPTURE(c.l2);
    CAPTURE(c.m);
    const double A = roundtrip::integral_A(p, c.l1, c.l2, pol).value();
    const double B = roundtrip::integral_B(p, c.l1, c.l2, pol).value();
    const double C = roundtrip::integral_C(p, c.l1, c.l2, pol).value();
    if (c.A == 0.0) {
      CHECK(A == 0.0);
    } else {
      CHECK(rel(A, c.A) < 1e-10);
    }
    CHECK(rel(B, c.B) < 1e-10);
    if (c.C == 0.0) {
      CHECK(C == 0.0);
    } else {
      CHECK(rel(C, c.C) < 1e-10);
    }
  }
  // Closed forms of the simplest case.
  const auto p = with_alpha(1.0, 1, 1);
  CHECK(roundtrip::integral_A(p, 1, 1, PP::TM).value() == Approx(0.0507506).epsilon(1e-6));
  CHECK(roundtrip::integral_B(p, 1, 1, PP::TM).value() == Approx(0.1268766).epsilon(1e-5));
}

TEST_CASE("integrals against an independent long-double quadrature") {
  // Direct integration of the definitions with pointwise Legendre values.
  const auto p = with_alpha(0.4, 2, 12, Constant{6.0});
  const RoundTripOperator op(p);
  for (auto [l1, l2] : {std::pair{2, 2}, std::pair{3, 9}, std::pair{12, 5}}) {
    for (PP pol : {PP::TE, PP::TM}) {
      const auto fA = [&](long double x) {
        const double xd = static_cast<double>(x);
        const LogScaled k = roundtrip::kernel_f(p, xd, -1, pol, l1, l2);
        const LogScaled v = k * specfun::legendre_plm(l1, 2, xd) * specfun::legendre_plm(l2, 2, xd);
        return static_cast<long double>(v.value());
      };
      const auto fC = [&](long double x) {
        const double xd = static_cast<double>(x);
        const LogScaled k = roundtrip::kernel_f(p, xd, 0, pol, l1, l2);
        const LogScaled v = k * specfun::legendre_plm(l1, 2, xd) * specfun::legendre_plm_deriv(l2, 2, xd);
        return static_cast<long double>(v.value());
      };
      CAPTURE(l1);
      CAPTURE(l2);
      CHECK(rel(op.integral_A(l1, l2, pol).value(), static_cast<double>(oracle::semi_infinite(fA))) < 1e-9);
      CHECK(rel(op.integral_C(l1, l2, pol).value(), static_cast<double>(oracle::semi_infinite(fC))) < 1e-9);
    }
  }
}

TEST_CASE("A and B are exactly symmetric in the multipole indices") {
  const auto p = aspect(20.0, 0.8, 3, 40);
  const RoundTripOperator op(p);
  for (auto [l1, l2] : {std::pair{3, 4}, std::pair{5, 40}, std::pair{17, 22}}) {
    for (PP pol : {PP::TE, PP::TM}) {
      CHECK(op.integral_A(l1, l2, pol).log_magnitude == op.integral_A(l2, l1, pol).log_magnitude);
      CHECK(op.integral_B(l1, l2, pol).log_magnitude == op.integral_B(l2, l1, pol).log_magnitude);
    }
  }
}

TEST_CASE("assembled block invariants") {
  for (int m : {0, 1, 4}) {
    const auto p = aspect(10.0, 1.0, m, 30);
    const auto b = roundtrip::assemble_block(p);
    const Eigen::MatrixXd F = b.full();
    CAPTURE(m);
    CHECK(b.ell_min == std::max(1, m));
    CHECK(b.dim() == 30 - std::max(1, m) + 1);
    CHECK(F.allFinite());
    CHECK((F - F.transpose()).cwiseAbs().maxCoeff() <= 1e-15 * F.cwiseAbs().maxCoeff());
    CHECK(b.ME == b.EM.transpose());
    if (m == 0) {
      CHECK(b.EM.cwiseAbs().maxCoeff() == 0.0);
      CHECK(b.EE.minCoeff() > 0.0);
      CHECK(b.MM.minCoeff() > 0.0);
    } else {
      CHECK(F.minCoeff() > 0.0);
    }
    // 1 - M is positive definite.
    Eigen::MatrixXd S = roundtrip::scattering_matrix(p);
    CHECK_NOTHROW(lindet::logdet_cholesky(S));
  }
}

TEST_CASE("transparent bodies give a zero block") {
  auto p = aspect(10.0, 1.0, 1, 15);
  p.sphere_model = Constant{1.0};
  CHECK(roundtrip::assemble_block(p).full().cwiseAbs().maxCoeff() == 0.0);
  p.sphere_model = PerfectReflector{};
  p.plane_model = Constant{1.0};
  CHECK(roundtrip::assemble_block(p).full().cwiseAbs().maxCoeff() == 0.0);
  const auto u = roundtrip::assemble_block_unsymmetrized(p);
  for (const auto& blk : u.blocks) {
    for (const auto& v : blk) CHECK(v.is_zero());
  }
}

TEST_CASE("interleaved scattering matrix, entries and blocks agree") {
  const auto p = aspect(15.0, 0.6, 2, 25);
  const RoundTripOperator op(p);
  const Eigen::MatrixXd S = op.scattering_matrix();
  const auto b = roundtrip::assemble_block(p);
  const int d = b.dim();
  CHECK(S.rows() == 2 * d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      CHECK(S(2 * i, 2 * j) == Approx((i == j ? 1.0 : 0.0) - b.EE(i, j)).epsilon(1e-15));
      CHECK(S(2 * i, 2 * j + 1) == Approx(-b.EM(i, j)).epsilon(1e-15));
      CHECK(S(2 * i + 1, 2 * j + 1) == Approx((i == j ? 1.0 : 0.0) - b.MM(i, j)).epsilon(1e-15));
    }
  }
  Eigen::MatrixXd part(7, 5);
  op.scattering_block(3, 10, 20, 25, part.data(), 7);
  CHECK(part == S.block(3, 20, 7, 5));
  CHECK(op.scattering_entry(11, 4) == S(11, 4));
}

TEST_CASE("symmetrized and unsymmetrized determinants agree in extended precision") {
  for (int m : {0, 1, 3}) {
    for (double alpha : {0.3, 2.0}) {
      auto p = aspect(5.0, alpha, m, 4);
      p.sphere_model = Constant{8.0};
      const auto u = roundtrip::assemble_block_unsymmetrized(p);
      const int d = u.dim();
      std::vector<std::vector<oracle::Real>> a(2 * d, std::vector<oracle::Real>(2 * d));
      for (int p1 = 0; p1 < 2; ++p1) {
        for (int p2 = 0; p2 < 2; ++p2) {
          for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) {
              a[p1 * d + i][p2 * d + j] =
                  (p1 == p2 && i == j ? 1 : 0) -
                  oracle::to_real(u.at(static_cast<Polarization>(p1), static_cast<Polarization>(p2), i, j));
            }
          }
        }
      }
      const double expected = oracle::log_abs_det(a);
      const double got = lindet::logdet_cholesky(roundtrip::scattering_matrix(p));
      CAPTURE(m);
      CAPTURE(alpha);
      CHECK(std::fabs(got - expected) <= 1e-10 * std::fabs(expected));
    }
  }
}

TEST_CASE("symmetrized entries are finite while the unsymmetrized ones span many decades") {
  const auto p = aspect(50.0, 1.0, 1);
  const auto b = roundtrip::assemble_block(p);
  CHECK(b.full().allFinite());
  const auto u = roundtrip::assemble_block_unsymmetrized(p);
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& blk : u.blocks) {
    for (const auto& v : blk) {
      if (v.is_zero()) continue;
      lo = std::min(lo, v.log10_abs());
      hi = std::max(hi, v.log10_abs());
    }
  }
  CHECK(hi - lo > 300.0);
}

TEST_CASE("diagonal dominance diagnostic") {
  const auto p = aspect(10.0, 1.0, 1, 50);
  const double ratio = roundtrip::diagonal_dominance_ratio(roundtrip::scattering_matrix(p));
  CHECK(std::isfinite(ratio));
  CHECK(ratio >= 0.0);
  Eigen::MatrixXd I = Eigen::MatrixXd::Identity(4, 4);
  CHECK(roundtrip::diagonal_dominance_ratio(I) == 0.0);
}

TEST_CASE("block CSV output") {
  const auto p = aspect(5.0, 1.0, 1, 20);
  std::ostringstream s, u;
  roundtrip::write_block_csv(roundtrip::assemble_block(p), s);
  const std::string text = s.str();
  CHECK(text.rfind("row,col,pair,value\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 4 * 20 * 20);
  roundtrip::write_block_csv(roundtrip::assemble_block_unsymmetrized(p), u);
  CHECK(u.str().rfind("row,col,pair,log10_abs_value\n", 0) == 0);
}

TEST_CASE("parameter validation") {
  auto p = aspect(5.0, 1.0, 1, 20);
  p.R = -1.0;
  CHECK_THROWS_AS(p.validate(), DomainError);
  p = aspect(5.0, 1.0, 30, 20);
  CHECK_THROWS_AS(p.validate(), DomainError);
  CHECK(default_ell_dim(1.0, 1.0) == 20);
  CHECK(default_ell_dim(50.0, 1.0) == 250);
  CHECK(default_ell_dim(10.1, 1.0) == 51);
}
