#include "casimir/lindet.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "casimir/errors.hpp"

namespace casimir::lindet {

double symmetry_defect(const SymmetricMatrix& A) {
  if (A.rows() != A.cols()) return std::numeric_limits<double>::infinity();
  const double scale = A.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return (A - A.transpose()).cwiseAbs().maxCoeff() / scale;
}

void DenseSource::block(int r0, int r1, int c0, int c1, double* out, int ld) const {
  for (int j = c0; j < c1; ++j) {
    for (int i = r0; i < r1; ++i) out[static_cast<std::size_t>(j - c0) * ld + (i - r0)] = A_(i, j);
  }
}

double logdet_cholesky_inplace(SymmetricMatrix& A) {
  if (A.rows() != A.cols()) throw DomainError("logdet_cholesky: matrix must be square");
  if (A.rows() == 0) return 0.0;
  Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(A);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("logdet_cholesky: matrix is not positive definite");
  }
  const auto diag = llt.matrixLLT().diagonal();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < diag.size(); ++i) sum += std::log(diag[i]);
  return 2.0 * sum;
}

double logdet_cholesky(const SymmetricMatrix& A) {
  SymmetricMatrix copy = A;
  return logdet_cholesky_inplace(copy);
}

LowRankFactor compress_lowrank(int rows, int cols, const std::function<void(int, double*)>& row,
                               const std::function<void(int, double*)>& col, double tol) {
  if (!(tol > 0.0)) throw DomainError("compress_lowrank: tol must be positive");
  LowRankFactor out;
  const int max_rank = std::min(rows, cols);
  std::vector<Eigen::VectorXd> us, vs;
  std::vector<char> used(rows, 0);
  Eigen::VectorXd r(cols), c(rows);
  double norm2 = 0.0;

  const auto residual_row = [&](int i) {
    row(i, r.data());
    for (std::size_t k = 0; k < us.size(); ++k) r -= us[k][i] * vs[k];
  };
  const auto residual_col = [&](int j) {
    col(j, c.data());
    for (std::size_t k = 0; k < us.size(); ++k) c -= vs[k][j] * us[k];
  };
  const auto unused_argmax = [&](const Eigen::VectorXd& v) {
    int best_i = -1;
    double best = -1.0;
    for (int ii = 0; ii < rows; ++ii) {
      if (!used[ii] && std::fabs(v[ii]) > best) {
        best = std::fabs(v[ii]);
        best_i = ii;
      }
    }
    return best_i;
  };
  const auto first_unused = [&] {
    for (int ii = 0; ii < rows; ++ii) {
      if (!used[ii]) return ii;
    }
    return -1;
  };
  // Residual probe on rows and columns of both parities spread over the block;
  // returns a row to resume from, or -1 if every probe is below tolerance.
  const auto verify = [&]() -> int {
    const double limit = tol * std::sqrt(std::max(norm2, 0.0));
    constexpr int kProbes = 4;
    for (int s = 0; s < kProbes; ++s) {
      for (int off = 0; off < 2; ++off) {
        const int i = std::min(rows - 1, (2 * s + 1) * rows / (2 * kProbes) + off);
        if (!used[i]) {
          residual_row(i);
          if (r.norm() > limit) return i;
        }
        const int j = std::min(cols - 1, (2 * s + 1) * cols / (2 * kProbes) + off);
        residual_col(j);
        if (c.norm() > limit) {
          const int k = unused_argmax(c);
          if (k >= 0) return k;
        }
      }
    }
    return -1;
  };

  int small = 0;
  int i = max_rank > 0 ? 0 : -1;
  while (static_cast<int>(us.size()) < max_rank) {
    if (i < 0) {
      i = verify();
      if (i < 0) break;
      small = 0;
    }
    residual_row(i);
    used[i] = 1;
    int j = 0;
    double best = -1.0;
    for (int jj = 0; jj < cols; ++jj) {
      if (std::fabs(r[jj]) > best) {
        best = std::fabs(r[jj]);
        j = jj;
      }
    }
    if (best == 0.0) {
      i = ++small >= 2 ? -1 : first_unused();
      continue;
    }
    Eigen::VectorXd v = r / r[j];
    residual_col(j);
    const double un = c.norm(), vn = v.norm();
    double cross = 0.0;
    for (std::size_t k = 0; k < us.size(); ++k) cross += c.dot(us[k]) * v.dot(vs[k]);
    const double updated = norm2 + 2.0 * cross + un * un * vn * vn;
    // Terms already below tolerance are not kept.
    if (un * vn <= tol * std::sqrt(std::max(updated, 0.0))) {
      i = ++small >= 2 ? -1 : unused_argmax(c);
      continue;
    }
    small = 0;
    norm2 = updated;
    us.push_back(c);
    vs.push_back(std::move(v));
    i = unused_argmax(us.back());
  }
  const int p = static_cast<int>(us.size());
  out.U.resize(rows, p);
  out.V.resize(cols, p);
  for (int k = 0; k < p; ++k) {
    out.U.col(k) = us[k];
    out.V.col(k) = vs[k];
  }
  out.full_rank = p >= max_rank && max_rank > 0;
  return out;
}

LowRankFactor compress_lowrank(const Eigen::MatrixXd& block, double tol) {
  const int rows = static_cast<int>(block.rows()), cols = static_cast<int>(block.cols());
  return compress_lowrank(
      rows, cols,
      [&](int i, double* out) { Eigen::Map<Eigen::VectorXd>(out, cols) = block.row(i).transpose(); },
      [&](int j, double* out) { Eigen::Map<Eigen::VectorXd>(out, rows) = block.col(j); }, tol);
}

std::vector<BenchmarkRow> benchmark_backends(const std::vector<int>& dims,
                                             const std::function<SymmetricMatrix(int)>& generator,
                                             int repeats, const HodlrOptions& options) {
  using clock = std::chrono::steady_clock;
  const auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  };
  std::vector<BenchmarkRow> rows;
  for (int N : dims) {
    const SymmetricMatrix A = generator(N);
    BenchmarkRow row;
    row.N = static_cast<int>(A.rows());
    std::vector<double> tc, th;
    for (int k = 0; k < std::max(1, repeats); ++k) {
      SymmetricMatrix work = A;
      auto t0 = clock::now();
      row.logdet_cholesky = logdet_cholesky_inplace(work);
      tc.push_back(std::chrono::duration<double>(clock::now() - t0).count());
      work.resize(0, 0);
      t0 = clock::now();
      row.logdet_hodlr = logdet_hodlr(hodlr_factorize(A, options));
      th.push_back(std::chrono::duration<double>(clock::now() - t0).count());
    }
    row.t_cholesky_s = median(tc);
    row.t_hodlr_s = median(th);
    rows.push_back(row);
  }
  return rows;
}

void write_benchmark_csv(const std::vector<BenchmarkRow>& rows, std::ostream& out) {
  out << "N,t_cholesky_s,t_hodlr_s,logdet_cholesky,logdet_hodlr\n";
  out << std::setprecision(17);
  for (const auto& r : rows) {
    out << r.N << ',' << r.t_cholesky_s << ',' << r.t_hodlr_s << ',' << r.logdet_cholesky << ','
        << r.logdet_hodlr << '\n';
  }
}

double fit_exponent(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw DomainError("fit_exponent: needs at least two points");
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace casimir::lindet
