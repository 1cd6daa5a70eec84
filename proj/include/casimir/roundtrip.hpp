#pragma once

#include <Eigen/Dense>
#include <array>
#include <iosfwd>
#include <memory>
#include <vector>

#include "casimir/log_scaled.hpp"
#include "casimir/materials.hpp"
#include "casimir/reflection.hpp"

namespace casimir {

struct RoundTripParams {
  double R = 0.0;   // sphere radius, m
  double L = 0.0;   // surface-to-plane gap, m
  double xi = 0.0;  // imaginary frequency, rad/s
  int m = 0;        // azimuthal index
  int ell_dim = 1;  // largest multipole order
  DielectricModel plane_model = PerfectReflector{};
  DielectricModel sphere_model = PerfectReflector{};
  double quad_rel_tol = 1e-10;
  // Zero-frequency limits of dissipative metals: the plane loses its TE
  // reflection and the sphere its magnetic multipoles.
  bool plane_te_dropped = false;
  bool sphere_magnetic_dropped = false;

  double alpha() const;
  int ell_min() const { return m > 1 ? m : 1; }
  int block_dim() const { return ell_dim - ell_min() + 1; }
  void validate() const;
};

// ceil(5 R / L) with a floor of 20.
int default_ell_dim(double R, double L);

// Symmetrized round-trip matrix, four d x d polarization blocks indexed by
// ell - ell_min.
struct RoundTripBlock {
  int ell_min = 1;
  int ell_dim = 0;
  Eigen::MatrixXd EE, EM, ME, MM;

  int dim() const { return ell_dim - ell_min + 1; }
  const Eigen::MatrixXd& block(Polarization p1, Polarization p2) const;
  // [[EE, EM], [ME, MM]]
  Eigen::MatrixXd full() const;
};

// Unsymmetrized round-trip matrix in log storage, row-major d x d blocks.
struct LogRoundTripBlock {
  int ell_min = 1;
  int ell_dim = 0;
  std::array<std::vector<LogScaled>, 4> blocks;  // EE, EM, ME, MM

  int dim() const { return ell_dim - ell_min + 1; }
  const LogScaled& at(Polarization p1, Polarization p2, int i, int j) const {
    return blocks[2 * static_cast<int>(p1) + static_cast<int>(p2)][static_cast<std::size_t>(i) * dim() + j];
  }
};

// Symmetrized entries of one (ell1, ell2) multipole pair.
struct PairEntries {
  double EE = 0.0, EM = 0.0, ME = 0.0, MM = 0.0;
};

// Round-trip operator for fixed (xi, m) with shared quadrature tables. All
// const member functions are safe to call concurrently.
class RoundTripOperator {
 public:
  explicit RoundTripOperator(const RoundTripParams& params);
  ~RoundTripOperator();
  RoundTripOperator(RoundTripOperator&&) noexcept;
  RoundTripOperator& operator=(RoundTripOperator&&) noexcept;

  const RoundTripParams& params() const;
  int ell_min() const;
  int block_dim() const;
  // Size of the interleaved matrix: index 2 (ell - ell_min) + P, P = 0 (E), 1 (M).
  int matrix_dim() const { return 2 * block_dim(); }

  PairEntries pair(int ell1, int ell2) const;
  // log |M_{l1 P1, l2 P2}| for the unsymmetrized operator.
  std::array<LogScaled, 4> pair_unsymmetrized(int ell1, int ell2) const;

  // Single integrals including the Lambda factors; sign follows r_p.
  LogScaled integral_A(int ell1, int ell2, PlanePolarization p) const;
  LogScaled integral_B(int ell1, int ell2, PlanePolarization p) const;
  LogScaled integral_C(int ell1, int ell2, PlanePolarization p) const;

  // Entries of 1 - M in interleaved ordering.
  double scattering_entry(int i, int j) const;
  // Rows r0..r1-1, columns c0..c1-1 into column-major out with leading dimension ld.
  void scattering_block(int r0, int r1, int c0, int c1, double* out, int ld) const;
  Eigen::MatrixXd scattering_matrix() const;

  bool sphere_transparent() const;
  const std::vector<MiePair>& mie() const;

  struct Impl;

 private:
  std::unique_ptr<Impl> impl_;
};

namespace roundtrip {

LogScaled kernel_f(const RoundTripParams& params, double x, int j, PlanePolarization p, int ell1,
                   int ell2);

LogScaled integral_A(const RoundTripParams& params, int ell1, int ell2, PlanePolarization p);
LogScaled integral_B(const RoundTripParams& params, int ell1, int ell2, PlanePolarization p);
LogScaled integral_C(const RoundTripParams& params, int ell1, int ell2, PlanePolarization p);

RoundTripBlock assemble_block(const RoundTripParams& params);
LogRoundTripBlock assemble_block_unsymmetrized(const RoundTripParams& params);

// 1 - M in interleaved ordering, assembled densely.
Eigen::MatrixXd scattering_matrix(const RoundTripParams& params);

// CSV with header row,col,pair,value (value = log10|M| for the log block).
void write_block_csv(const RoundTripBlock& block, std::ostream& out);
void write_block_csv(const LogRoundTripBlock& block, std::ostream& out);

// Row-wise dominance of the diagonal of 1 - M; returns the worst ratio
// sum_{j != i} |A_ij| / A_ii.
double diagonal_dominance_ratio(const Eigen::MatrixXd& scattering);

}  // namespace roundtrip
}  // namespace casimir
