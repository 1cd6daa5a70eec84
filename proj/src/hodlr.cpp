#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>

#include "casimir/errors.hpp"
#include "casimir/lindet.hpp"

namespace casimir::lindet {

struct HodlrFactorization::Node {
  int begin = 0, end = 0;
  int level = 0;
  int left = -1, right = -1;
  // Leaf: Cholesky factor of the diagonal block.
  Eigen::LLT<Eigen::MatrixXd> llt;
  // Internal: A12 ~ U V^T, Ut1 = A11^{-1} U, Ut2 = A22^{-1} V.
  Eigen::MatrixXd U, V, Ut1, Ut2;
  Eigen::PartialPivLU<Eigen::MatrixXd> coupling;  // [[I, S], [T, I]]
  bool full_rank = false;
  double logdet = 0.0;  // of the subtree

  bool is_leaf() const { return left < 0; }
};

namespace {

using Node = HodlrFactorization::Node;

Eigen::MatrixXd solve_node(const std::vector<Node>& nodes, int id, const Eigen::MatrixXd& b) {
  const Node& n = nodes[id];
  if (n.is_leaf()) return n.llt.solve(b);
  const int n1 = nodes[n.left].end - nodes[n.left].begin;
  const int n2 = nodes[n.right].end - nodes[n.right].begin;
  Eigen::MatrixXd w1 = solve_node(nodes, n.left, b.topRows(n1));
  Eigen::MatrixXd w2 = solve_node(nodes, n.right, b.bottomRows(n2));
  const int p = static_cast<int>(n.U.cols());
  if (p == 0) {
    Eigen::MatrixXd out(b.rows(), b.cols());
    out << w1, w2;
    return out;
  }
  Eigen::MatrixXd rhs(2 * p, b.cols());
  rhs << n.U.transpose() * w1, n.V.transpose() * w2;
  const Eigen::MatrixXd ca = n.coupling.solve(rhs);
  Eigen::MatrixXd out(b.rows(), b.cols());
  out << w1 - n.Ut1 * ca.bottomRows(p), w2 - n.Ut2 * ca.topRows(p);
  return out;
}


struct Builder {
  const EntrySource& src;
  const HodlrOptions& opt;
  int levels;
  std::vector<Node>& nodes;

  // Pre-allocates the node tree so that subtrees can be filled concurrently.
  int layout(int begin, int end, int level) {
    const int id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    nodes[id].begin = begin;
    nodes[id].end = end;
    nodes[id].level = level;
    if (level < levels) {
      const int mid = begin + (end - begin) / 2;
      const int l = layout(begin, mid, level + 1);
      const int r = layout(mid, end, level + 1);
      nodes[id].left = l;
      nodes[id].right = r;
    }
    return id;
  }

  void factorize(int id) {
    Node& n = nodes[id];
    const int size = n.end - n.begin;
    if (n.is_leaf()) {
      Eigen::MatrixXd A(size, size);
      src.block(n.begin, n.end, n.begin, n.end, A.data(), size);
      n.llt.compute(A);
      if (n.llt.info() != Eigen::Success) {
        std::ostringstream msg;
        msg << "hodlr: leaf [" << n.begin << ", " << n.end << ") is not positive definite";
        throw NotPositiveDefinite(msg.str());
      }
      const auto d = n.llt.matrixLLT().diagonal();
      double s = 0.0;
      for (Eigen::Index i = 0; i < d.size(); ++i) s += std::log(d[i]);
      n.logdet = 2.0 * s;
      return;
    }

    const int mid = nodes[n.left].end;
    const int n1 = mid - n.begin, n2 = n.end - mid;
    const int b = n.begin, e = n.end;
    if (opt.parallel && n.level < 2) {
      auto fut = std::async(std::launch::async, [this, l = n.left] { factorize(l); });
      factorize(n.right);
      fut.get();
    } else {
      factorize(n.left);
      factorize(n.right);
    }

    LowRankFactor f = compress_lowrank(
        n1, n2, [&](int i, double* out) { src.block(b + i, b + i + 1, mid, e, out, 1); },
        [&](int j, double* out) { src.block(b, mid, mid + j, mid + j + 1, out, n1); }, opt.tol);
    n.full_rank = f.full_rank;
    n.U = std::move(f.U);
    n.V = std::move(f.V);
    const int p = static_cast<int>(n.U.cols());
    double update = 0.0;
    if (p > 0) {
      n.Ut1 = solve_node(nodes, n.left, n.U);
      n.Ut2 = solve_node(nodes, n.right, n.V);
      const Eigen::MatrixXd S = n.U.transpose() * n.Ut1;
      const Eigen::MatrixXd T = n.V.transpose() * n.Ut2;
      Eigen::MatrixXd K = Eigen::MatrixXd::Identity(2 * p, 2 * p);
      K.topRightCorner(p, p) = S;
      K.bottomLeftCorner(p, p) = T;
      n.coupling.compute(K);
      // det [[I, Ut1 V^T], [Ut2 U^T, I]] = det(I_p - T S) by Sylvester's identity.
      const Eigen::MatrixXd small = Eigen::MatrixXd::Identity(p, p) - T * S;
      Eigen::PartialPivLU<Eigen::MatrixXd> lu(small);
      const Eigen::MatrixXd& LU = lu.matrixLU();
      double sign = lu.permutationP().determinant();
      for (int i = 0; i < p; ++i) {
        const double u = LU(i, i);
        if (u < 0) sign = -sign;
        update += std::log(std::fabs(u));
        if (u == 0.0) sign = 0.0;
      }
      if (!(sign > 0.0) || !std::isfinite(update)) {
        std::ostringstream msg;
        msg << "hodlr: update determinant is not positive at level " << n.level << ", block ["
            << n.begin << ", " << n.end << ")";
        throw NotPositiveDefinite(msg.str());
      }
    }
    n.logdet = nodes[n.left].logdet + nodes[n.right].logdet + update;
    (void)n2;
  }
};

Eigen::MatrixXd reconstruct_node(const std::vector<Node>& nodes, int id) {
  const Node& n = nodes[id];
  if (n.is_leaf()) {
    const Eigen::MatrixXd L = n.llt.matrixL();
    return L * L.transpose();
  }
  const Eigen::MatrixXd A1 = reconstruct_node(nodes, n.left);
  const Eigen::MatrixXd A2 = reconstruct_node(nodes, n.right);
  const int n1 = static_cast<int>(A1.rows()), n2 = static_cast<int>(A2.rows());
  Eigen::MatrixXd out(n1 + n2, n1 + n2);
  out.topLeftCorner(n1, n1) = A1;
  out.bottomRightCorner(n2, n2) = A2;
  if (n.U.cols() > 0) {
    // diag(A1, A2) [[I, Ut1 V^T], [Ut2 U^T, I]]
    out.topRightCorner(n1, n2) = A1 * n.Ut1 * n.V.transpose();
    out.bottomLeftCorner(n2, n1) = A2 * n.Ut2 * n.U.transpose();
  } else {
    out.topRightCorner(n1, n2).setZero();
    out.bottomLeftCorner(n2, n1).setZero();
  }
  return out;
}

}  // namespace

HodlrFactorization::HodlrFactorization() = default;
HodlrFactorization::~HodlrFactorization() = default;
HodlrFactorization::HodlrFactorization(HodlrFactorization&&) noexcept = default;
HodlrFactorization& HodlrFactorization::operator=(HodlrFactorization&&) noexcept = default;

int HodlrFactorization::size() const { return size_; }
int HodlrFactorization::levels() const { return levels_; }
double HodlrFactorization::logdet() const { return logdet_; }

int HodlrFactorization::leaf_count() const {
  return static_cast<int>(std::count_if(nodes_.begin(), nodes_.end(),
                                        [](const Node& n) { return n.is_leaf(); }));
}

std::vector<int> HodlrFactorization::ranks_at_level(int level) const {
  std::vector<int> out;
  for (const auto& n : nodes_) {
    if (!n.is_leaf() && n.level == level) out.push_back(static_cast<int>(n.U.cols()));
  }
  return out;
}

int HodlrFactorization::max_rank() const {
  int r = 0;
  for (const auto& n : nodes_) r = std::max(r, static_cast<int>(n.U.cols()));
  return r;
}

int HodlrFactorization::full_rank_blocks() const {
  return static_cast<int>(std::count_if(nodes_.begin(), nodes_.end(),
                                        [](const Node& n) { return n.full_rank; }));
}

Eigen::MatrixXd HodlrFactorization::solve(const Eigen::MatrixXd& b) const {
  if (b.rows() != size_) throw DomainError("hodlr solve: dimension mismatch");
  if (size_ == 0) return b;
  return solve_node(nodes_, 0, b);
}

Eigen::MatrixXd HodlrFactorization::reconstruct() const {
  if (size_ == 0) return Eigen::MatrixXd(0, 0);
  return reconstruct_node(nodes_, 0);
}

HodlrFactorization hodlr_factorize(const EntrySource& source, const HodlrOptions& options) {
  if (options.leaf_size < 1) throw DomainError("hodlr: leaf_size must be positive");
  if (!(options.tol > 0.0)) throw DomainError("hodlr: tol must be positive");
  HodlrFactorization F;
  const int N = source.size();
  F.size_ = N;
  if (N == 0) return F;
  int levels = 0;
  while ((static_cast<long>(options.leaf_size) << (levels + 1)) <= N) ++levels;
  F.levels_ = levels;
  Builder builder{source, options, levels, F.nodes_};
  builder.layout(0, N, 0);
  builder.factorize(0);
  F.logdet_ = F.nodes_[0].logdet;
  return F;
}

HodlrFactorization hodlr_factorize(const SymmetricMatrix& A, const HodlrOptions& options) {
  if (A.rows() != A.cols()) throw DomainError("hodlr: matrix must be square");
  return hodlr_factorize(DenseSource(A), options);
}

double logdet_hodlr(const HodlrFactorization& F) { return F.logdet(); }

}  // namespace casimir::lindet
