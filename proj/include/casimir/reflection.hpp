#pragma once

#include <vector>

#include "casimir/log_scaled.hpp"
#include "casimir/materials.hpp"

namespace casimir {

// Multipole polarization of a spherical wave: electric (E) or magnetic (M).
enum class Polarization { E = 0, M = 1 };

// Plane-wave polarization at the planar interface.
enum class PlanePolarization { TE = 0, TM = 1 };

struct MiePair {
  LogScaled a;  // electric
  LogScaled b;  // magnetic
};

struct FresnelPair {
  double r_te = 0.0;
  double r_tm = 0.0;
};

namespace reflection {

// Mie coefficients at imaginary frequency, x = xi R / c, n = sqrt(epsilon(i xi)).
MiePair mie(int ell, double xi, double R, const DielectricModel& model);

// Coefficients for ell = 1..lmax sharing one Bessel evaluation; entry 0 is unused.
std::vector<MiePair> mie_range(int lmax, double xi, double R, const DielectricModel& model);

// Same, parameterized by size parameter x and permittivity (infinity = perfect reflector).
std::vector<MiePair> mie_coefficients(int lmax, double x, double epsilon);

// Fresnel coefficients at imaginary frequency xi and transverse wave number k.
FresnelPair fresnel(double xi, double k, const DielectricModel& model);

// Same, in terms of x = c kappa / xi >= 1 and the permittivity at xi.
FresnelPair fresnel_x(double x, double epsilon);

// sqrt(|r_{l1,P1}| |r_{l2,P2}|) with r_{l,E} = -a_l and r_{l,M} = -b_l.
LogScaled sqrt_mie_weight(int ell1, int ell2, Polarization p1, Polarization p2, double xi,
                          double R, const DielectricModel& model);

}  // namespace reflection
}  // namespace casimir
