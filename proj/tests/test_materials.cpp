#include <cmath>
#include <sstream>

#include "casimir/constants.hpp"
#include "casimir/errors.hpp"
#include "casimir/materials.hpp"
#include "doctest.h"

using namespace casimir;
using doctest::Approx;

TEST_CASE("Drude and plasma permittivity") {
  const double wp = 9.0 * constants::eV_per_hbar;
  CHECK(materials::epsilon(Plasma{wp}, wp) == Approx(2.0).epsilon(1e-15));
  const Drude d = materials::make_drude(wp, 0.1 * wp);
  CHECK(materials::epsilon(d, wp) == Approx(1.0 + 1.0 / 1.1).epsilon(1e-15));
  CHECK(std::isinf(materials::epsilon(PerfectReflector{}, 1e14)));
  CHECK(materials::epsilon(Constant{3.0}, 1e14) == 3.0);

  // gamma -> 0 approaches the plasma value to first order in gamma.
  const Drude small = materials::make_drude(wp, 1e-6 * wp);
  for (double f : {0.01, 0.1, 1.0, 10.0}) {
    const double xi = f * wp;
    CHECK(materials::epsilon(small, xi) == Approx(materials::epsilon(Plasma{wp}, xi)).epsilon(1e-4));
  }
}

TEST_CASE("permittivity is non-increasing on sampled grids") {
  const DielectricModel models[] = {materials::gold_drude(), materials::gold_plasma(),
                                    materials::make_drude(1e15, 1e14)};
  for (const auto& m : models) {
    double prev = INFINITY;
    for (double xi = 1e10; xi < 1e19; xi *= 1.3) {
      const double e = materials::epsilon(m, xi);
      CHECK(e >= 1.0);
      CHECK(e <= prev);
      prev = e;
    }
  }
}

TEST_CASE("gold defaults") {
  CHECK(materials::gold_drude().omega_p == Approx(9.0 * constants::eV / constants::hbar));
  CHECK(materials::gold_drude().gamma == Approx(0.035 * constants::eV / constants::hbar));
  CHECK(materials::gold_plasma().omega_p == materials::gold_drude().omega_p);
}

TEST_CASE("invalid parameters") {
  CHECK_THROWS_AS(materials::make_drude(-1.0, 1.0), DomainError);
  CHECK_THROWS_AS(materials::make_drude(1.0, 0.0), DomainError);
  CHECK_THROWS_AS(materials::make_plasma(0.0), DomainError);
  CHECK_THROWS_AS(materials::epsilon(Plasma{1.0}, 0.0), DomainError);
}

TEST_CASE("tabulated interpolation and range policy") {
  const Tabulated t = materials::make_tabulated({1e14, 1e16}, {100.0, 1.5});
  CHECK(materials::epsilon(t, 1e15) == Approx(std::sqrt(150.0)).epsilon(1e-14));
  CHECK(materials::epsilon(t, 1e15) == Approx(12.247).epsilon(1e-4));
  CHECK(materials::epsilon(t, 1e14) == Approx(100.0));
  CHECK(materials::epsilon(t, 1e16) == Approx(1.5));
  CHECK_THROWS_AS(materials::epsilon(t, 1e13), DomainError);
  CHECK_THROWS_AS(materials::epsilon(t, 1e17), DomainError);

  const Tabulated e = materials::make_tabulated({1e14, 1e16}, {100.0, 1.5}, true);
  CHECK(materials::epsilon(e, 1e13) - 1.0 == Approx(990.0).epsilon(1e-12));
  CHECK(materials::epsilon(e, 1e17) - 1.0 == Approx(0.005).epsilon(1e-12));
}

TEST_CASE("zero-frequency classes") {
  CHECK(materials::zero_frequency_class(materials::gold_drude()).kind == ZeroFrequencyKind::DrudeLike);
  const auto p = materials::zero_frequency_class(Plasma{2e15});
  CHECK(p.kind == ZeroFrequencyKind::PlasmaLike);
  CHECK(p.omega_p == 2e15);
  CHECK(materials::zero_frequency_class(PerfectReflector{}).kind ==
        ZeroFrequencyKind::PerfectConductorLike);
  const auto c = materials::zero_frequency_class(Constant{4.0});
  CHECK(c.kind == ZeroFrequencyKind::DielectricLike);
  CHECK(c.epsilon0 == 4.0);
}

TEST_CASE("tabulated file parsing") {
  std::istringstream good("# header\n1e14 100\n1e16 1.5\n");
  const Tabulated t = materials::load_tabulated(good);
  CHECK(t.xi.size() == 2);
  CHECK(t.epsilon[1] == 1.5);

  std::istringstream reversed("1e16 1.5\n1e14 100\n");
  try {
    materials::load_tabulated(reversed);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("non-monotone") != std::string::npos);
  }

  std::istringstream empty("");
  CHECK_THROWS_AS(materials::load_tabulated(empty), ParseError);
  std::istringstream comments("# only\n\n");
  CHECK_THROWS_AS(materials::load_tabulated(comments), ParseError);
  std::istringstream below("1e14 0.5\n");
  CHECK_THROWS_AS(materials::load_tabulated(below), ParseError);
  std::istringstream garbage("1e14 100\n1e15 abc\n");
  try {
    materials::load_tabulated(garbage);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("tabulated save and load round trip is exact") {
  std::vector<double> xi, eps;
  for (int i = 0; i < 50; ++i) {
    xi.push_back(1e12 * std::pow(1.37, i));
    eps.push_back(1.0 + 1e6 / (1.0 + i * 0.731));
  }
  const Tabulated t = materials::make_tabulated(xi, eps);
  std::stringstream buf;
  materials::save_tabulated(t, buf);
  const Tabulated u = materials::load_tabulated(buf);
  CHECK(u.xi == t.xi);
  CHECK(u.epsilon == t.epsilon);
  CHECK(materials::is_non_increasing(u));
  CHECK_FALSE(materials::is_non_increasing(materials::make_tabulated({1, 2}, {2, 3})));
}

TEST_CASE("model strings") {
  CHECK(std::holds_alternative<PerfectReflector>(materials::parse_model("perfect")));
  CHECK(std::holds_alternative<Drude>(materials::parse_model("drude")));
  const auto p = materials::parse_model("plasma:1.5e16");
  CHECK(std::get<Plasma>(p).omega_p == 1.5e16);
  const auto d = materials::parse_model("drude:1e16,1e14");
  CHECK(std::get<Drude>(d).gamma == 1e14);
  CHECK(std::get<Constant>(materials::parse_model("constant:1")).epsilon == 1.0);
  CHECK_THROWS_AS(materials::parse_model("gold"), ParseError);
  CHECK_THROWS_AS(materials::parse_model("drude:1"), ParseError);
  CHECK(materials::describe(materials::parse_model("plasma:2")) == "plasma:2");
}
