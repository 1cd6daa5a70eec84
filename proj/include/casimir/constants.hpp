#pragma once

// CODATA 2018 exact and recommended values, SI units.
namespace casimir::constants {

inline constexpr double pi = 3.141592653589793238462643383279502884;
inline constexpr double hbar = 1.054571817e-34;      // J s
inline constexpr double c = 299792458.0;             // m / s
inline constexpr double k_B = 1.380649e-23;          // J / K
inline constexpr double eV = 1.602176634e-19;        // J
inline constexpr double eV_per_hbar = eV / hbar;     // rad / s per eV
inline constexpr double zeta3 = 1.2020569031595942853997381615114;

}  // namespace casimir::constants
