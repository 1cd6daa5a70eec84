#pragma once

#include <Eigen/Dense>
#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

namespace casimir::lindet {

// Dense symmetric matrix (full storage).
using SymmetricMatrix = Eigen::MatrixXd;

// Max |A - A^T| / max |A|; 0 for exactly symmetric input.
double symmetry_defect(const SymmetricMatrix& A);

// Entry access for matrix-free factorizations. Blocks are written column-major
// with leading dimension ld. Implementations must be thread-safe.
class EntrySource {
 public:
  virtual ~EntrySource() = default;
  virtual int size() const = 0;
  virtual void block(int r0, int r1, int c0, int c1, double* out, int ld) const = 0;
};

class DenseSource final : public EntrySource {
 public:
  explicit DenseSource(const Eigen::MatrixXd& A) : A_(A) {}
  int size() const override { return static_cast<int>(A_.rows()); }
  void block(int r0, int r1, int c0, int c1, double* out, int ld) const override;

 private:
  const Eigen::MatrixXd& A_;
};

double logdet_cholesky(const SymmetricMatrix& A);
// Factorizes in place (A is overwritten), saving one N x N copy.
double logdet_cholesky_inplace(SymmetricMatrix& A);

struct LowRankFactor {
  Eigen::MatrixXd U;  // rows x p
  Eigen::MatrixXd V;  // cols x p
  bool full_rank = false;  // rank reached min(rows, cols)
  int rank() const { return static_cast<int>(U.cols()); }
  Eigen::MatrixXd dense() const { return U * V.transpose(); }
};

// Adaptive cross approximation with partial pivoting.
LowRankFactor compress_lowrank(const Eigen::MatrixXd& block, double tol);

// Same, with rows and columns fetched on demand: row(i, out) writes cols values,
// col(j, out) writes rows values.
LowRankFactor compress_lowrank(int rows, int cols,
                               const std::function<void(int, double*)>& row,
                               const std::function<void(int, double*)>& col, double tol);

struct HodlrOptions {
  int leaf_size = 64;
  double tol = 1e-13;
  bool parallel = false;  // factorize sibling subtrees concurrently near the root
};

class HodlrFactorization {
 public:
  HodlrFactorization();
  ~HodlrFactorization();
  HodlrFactorization(HodlrFactorization&&) noexcept;
  HodlrFactorization& operator=(HodlrFactorization&&) noexcept;

  int size() const;
  int levels() const;
  int leaf_count() const;
  std::vector<int> ranks_at_level(int level) const;
  int max_rank() const;
  int full_rank_blocks() const;

  double logdet() const;
  // x = A^{-1} b for the factorized approximation.
  Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const;
  // Explicit product of the factors; intended for small N.
  Eigen::MatrixXd reconstruct() const;

  struct Node;

 private:
  friend HodlrFactorization hodlr_factorize(const EntrySource&, const HodlrOptions&);
  std::vector<Node> nodes_;
  int size_ = 0;
  int levels_ = 0;
  double logdet_ = 0.0;
};

HodlrFactorization hodlr_factorize(const EntrySource& source, const HodlrOptions& options = {});
HodlrFactorization hodlr_factorize(const SymmetricMatrix& A, const HodlrOptions& options = {});
double logdet_hodlr(const HodlrFactorization& F);

struct BenchmarkRow {
  int N = 0;
  double t_cholesky_s = 0.0;
  double t_hodlr_s = 0.0;
  double logdet_cholesky = 0.0;
  double logdet_hodlr = 0.0;
};

// Median-of-repeats wall time of both backends on generator(N).
std::vector<BenchmarkRow> benchmark_backends(
    const std::vector<int>& dims, const std::function<SymmetricMatrix(int)>& generator,
    int repeats = 3, const HodlrOptions& options = {});

void write_benchmark_csv(const std::vector<BenchmarkRow>& rows, std::ostream& out);

// Least-squares slope of log(y) against log(x).
double fit_exponent(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace casimir::lindet
