#pragma once

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace casimir {

struct PerfectReflector {};

// Frequency-independent dielectric; epsilon == 1 is a transparent body.
struct Constant {
  double epsilon = 1.0;
};

struct Plasma {
  double omega_p = 0.0;  // rad/s
};

struct Drude {
  double omega_p = 0.0;  // rad/s
  double gamma = 0.0;    // rad/s
};

// epsilon(i xi) sampled on a strictly increasing xi grid, log-log interpolated.
// With extrapolate set, queries below the grid follow epsilon - 1 ~ 1/xi and
// queries above follow epsilon - 1 ~ 1/xi^2.
struct Tabulated {
  std::vector<double> xi;
  std::vector<double> epsilon;
  bool extrapolate = false;
};

using DielectricModel = std::variant<PerfectReflector, Constant, Plasma, Drude, Tabulated>;

enum class ZeroFrequencyKind { PerfectConductorLike, PlasmaLike, DrudeLike, DielectricLike };

struct ZeroFrequencyClass {
  ZeroFrequencyKind kind = ZeroFrequencyKind::DrudeLike;
  double omega_p = 0.0;  // PlasmaLike only
  double epsilon0 = 1.0; // DielectricLike only
};

namespace materials {

Plasma make_plasma(double omega_p);
Drude make_drude(double omega_p, double gamma);
Tabulated make_tabulated(std::vector<double> xi, std::vector<double> epsilon,
                         bool extrapolate = false);

// Gold: omega_p = 9 eV/hbar, gamma = 0.035 eV/hbar.
Drude gold_drude();
Plasma gold_plasma();

// epsilon(i xi) for xi > 0. PerfectReflector yields +infinity.
double epsilon(const DielectricModel& model, double xi);

bool is_perfect(const DielectricModel& model);
bool is_transparent(const DielectricModel& model);

ZeroFrequencyClass zero_frequency_class(const DielectricModel& model);

// Two whitespace-separated columns (xi in rad/s, epsilon); '#' starts a comment.
Tabulated load_tabulated(std::istream& in);
Tabulated load_tabulated_file(const std::string& path);
void save_tabulated(const Tabulated& model, std::ostream& out);

// Sampled monotonicity check; returns false if epsilon increases anywhere on the grid.
bool is_non_increasing(const Tabulated& model);

// Parses "perfect", "drude", "drude:WP,GAMMA", "plasma", "plasma:WP",
// "constant:EPS" or "file:PATH" (frequencies in rad/s).
DielectricModel parse_model(const std::string& text, bool extrapolate_tables = false);
std::string describe(const DielectricModel& model);

}  // namespace materials
}  // namespace casimir
