#pragma once

#include <optional>
#include <string>
#include <vector>

#include "casimir/lindet.hpp"
#include "casimir/materials.hpp"
#include "casimir/roundtrip.hpp"

namespace casimir {

enum class Backend { Cholesky, Hodlr };

struct ZeroFrequencyPolicy {
  // Auto follows each body's zero_frequency_class; the others override both bodies.
  enum class Kind { Auto, Drude, Plasma, Perfect };
  Kind kind = Kind::Auto;
  double omega_p = 0.0;  // Plasma only, rad/s
};

struct Tolerances {
  double matsubara_rel = 1e-8;
  double m_sum_rel = 1e-8;
  double quad_rel = 1e-10;   // multipole integrals
  double xi_quad_rel = 1e-8; // frequency integral at T = 0
};

struct JobSpec {
  double R = 0.0;  // m
  double L = 0.0;  // m
  double T = 0.0;  // K
  DielectricModel plane = PerfectReflector{};
  DielectricModel sphere = PerfectReflector{};
  int ell_dim = 0;  // 0 selects default_ell_dim(R, L)
  Backend backend = Backend::Hodlr;
  Tolerances tol;
  ZeroFrequencyPolicy zero_frequency;
  int jobs = 1;
  lindet::HodlrOptions hodlr;

  void validate() const;
  int resolved_ell_dim() const;
};

struct LedgerEntry {
  int n = 0;           // Matsubara index, or frequency node index at T = 0
  int m = 0;
  double xi = 0.0;     // rad/s; 0 for the extrapolated zero-frequency term
  double weight = 0.0; // multiplies logdet in the free energy sum (units J)
  double logdet = 0.0;
};

struct Diagnostics {
  int ell_dim = 0;
  std::string backend;
  std::string method;          // "matsubara" or "xi-quadrature"
  std::string zero_frequency;  // resolved policy for both bodies
  int frequency_terms = 0;
  std::vector<int> m_max;      // per frequency term
  int blocks = 0;
  int hodlr_max_rank = 0;
  double max_logdet = -1e300;
  double wall_time_s = 0.0;
  int jobs = 1;
  // Force only.
  double fd_step_m = 0.0;
  double fd_derivative_h = 0.0;
  double fd_derivative_h2 = 0.0;
  double fd_relative_change = 0.0;
  std::vector<std::string> warnings;
};

struct CasimirResult {
  double free_energy = 0.0;  // J
  std::optional<double> force;       // N, negative = attractive
  std::optional<double> f_pfa;       // N
  std::optional<double> correction;  // 1 - F / F_PFA
  std::vector<LedgerEntry> ledger;
  Diagnostics diagnostics;
};

// Frequencies, weights and m cutoffs fixed by a previous evaluation.
struct TruncationPlan {
  std::vector<double> xi;      // rad/s; zero-frequency term has xi = 0
  std::vector<double> weight;  // J per unit logdet
  std::vector<int> m_max;
  std::vector<double> zero_xi; // extrapolation frequencies of the xi = 0 term
};

// Matsubara sum, T > 0.
CasimirResult free_energy(const JobSpec& spec);
// Frequency integral, T == 0.
CasimirResult free_energy_T0(const JobSpec& spec);
// Dispatches on T.
CasimirResult compute_free_energy(const JobSpec& spec, TruncationPlan* plan = nullptr,
                                  bool reuse_plan = false);

// Force by Richardson-refined central differences, with PFA reference and correction.
CasimirResult force(const JobSpec& spec);

// PFA force 2 pi R F_pp(L); closed form for perfect reflectors at T = 0.
double pfa_force(const JobSpec& spec);
// Plane-plane free energy per unit area at gap L, J / m^2.
double plane_plane_free_energy(const JobSpec& spec, double L);

// log det(1 - M) of a single (xi, m) block.
double block_logdet(const RoundTripParams& params, Backend backend,
                    const lindet::HodlrOptions& hodlr = {}, int* max_rank = nullptr);

struct SweepRow {
  double R = 0.0, L = 0.0, T = 0.0;
  double correction = 0.0, free_energy = 0.0, force = 0.0, f_pfa = 0.0;
  bool ok = false;
  std::string error;
};

std::vector<SweepRow> pfa_correction_sweep(const JobSpec& base, const std::vector<double>& radii,
                                           const std::vector<double>& gaps);

struct LevelSetPoint {
  double target = 0.0;
  double R = 0.0;
  double L = 0.0;
};

// For each radius, the gap at which the correction crosses each target,
// interpolated linearly in (log L, log correction).
std::vector<LevelSetPoint> extract_level_sets(const std::vector<SweepRow>& rows,
                                              const std::vector<double>& targets);

std::string to_string(Backend b);
std::string to_string(const ZeroFrequencyPolicy& p);

}  // namespace casimir
