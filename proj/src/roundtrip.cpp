#include "casimir/roundtrip.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>

#include "casimir/constants.hpp"
#include "casimir/errors.hpp"
#include "casimir/specfun.hpp"

namespace casimir {

namespace {

// Trapezoid rule in v with t = 2 alpha (x - 1) = softplus(v)^2.
constexpr double kVLow = -22.0;
constexpr double kStep = 0.2;
constexpr double kGridDrop = 150.0;   // e-folds covered beyond the largest peak
constexpr double kWindowDrop = 60.0;  // e-folds kept around each integrand peak
constexpr double kFastPathFloor = -550.0;
constexpr int kMaxRefinements = 3;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double softplus(double v) {
  return v > 30.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v));
}
double logistic(double v) { return 1.0 / (1.0 + std::exp(-v)); }
double inverse_softplus(double y) {
  return y > 30.0 ? y + std::log1p(-std::exp(-y)) : std::log(std::expm1(y));
}

// Largest t at which Legendre growth against e^{-t} has decayed by kGridDrop.
double grid_t_max(double D, double alpha) {
  // P_l(x) <= (x + sqrt(x^2 - 1))^l = exp(l acosh x).
  const auto phi = [&](double t) {
    const double xm1 = t / (2.0 * alpha);
    return D * std::log1p(xm1 + std::sqrt(xm1 * (2.0 + xm1))) - t;
  };
  const double ratio = D / (2.0 * alpha);
  const double tp = 2.0 * alpha * ratio * ratio / (std::sqrt(1.0 + ratio * ratio) + 1.0);
  const double target = phi(tp) - kGridDrop;
  double lo = tp, hi = std::max(tp, 1.0) * 2.0 + kGridDrop;
  while (phi(hi) > target) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-6 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (phi(mid) > target ? lo : hi) = mid;
  }
  return hi;
}

enum Raw { A_TM, A_TE, B_TM, B_TE, C12_TM, C12_TE, C21_TM, C21_TE, kRawCount };
using RawArray = std::array<double, kRawCount>;

struct Level {
  double h = 0.0;
  int count = 0;
  std::vector<double> lw, fa, fb, rte, rtm;
  std::vector<double> lp, q;  // [(ell - m) * count + k]
};

struct WindowSums {
  RawArray even{}, odd{};
  double log_scale = 0.0;
  int lo = 0, hi = -1;
};

}  // namespace

double RoundTripParams::alpha() const { return xi * (L + R) / constants::c; }

void RoundTripParams::validate() const {
  if (!(R > 0.0) || !(L > 0.0) || !std::isfinite(R) || !std::isfinite(L)) {
    throw DomainError("round trip: R and L must be positive");
  }
  if (!(xi > 0.0) || !std::isfinite(xi)) throw DomainError("round trip: xi must be positive");
  if (m < 0) throw DomainError("round trip: m must be non-negative");
  if (ell_dim < std::max(1, m)) throw DomainError("round trip: ell_dim must be >= max(1, m)");
  if (!(quad_rel_tol > 0.0) || !(quad_rel_tol < 1.0)) {
    throw DomainError("round trip: quad_rel_tol must lie in (0, 1)");
  }
}

int default_ell_dim(double R, double L) {
  if (!(R > 0.0) || !(L > 0.0)) throw DomainError("default_ell_dim: R and L must be positive");
  return std::max(20, static_cast<int>(std::ceil(5.0 * R / L - 1e-9)));
}

struct RoundTripOperator::Impl {
  RoundTripParams p;
  double alpha = 0.0;
  int lmin = 1;
  int d = 0;
  bool zero = false;  // no scattering at all
  std::vector<MiePair> mie;
  std::vector<double> log_lambda;  // index ell
  double eps_plane = 1.0;

  Level base;
  std::vector<double> pe;     // exp(lp + lw/2 - shift), level 0
  std::vector<double> shift;  // per row
  std::vector<int> peak;      // per row

  mutable std::array<std::once_flag, kMaxRefinements> once;
  mutable std::array<std::unique_ptr<Level>, kMaxRefinements> refined;

  double v_low = kVLow;

  explicit Impl(const RoundTripParams& params) : p(params) {
    p.validate();
    alpha = p.alpha();
    lmin = p.ell_min();
    d = p.block_dim();
    log_lambda.assign(static_cast<std::size_t>(p.ell_dim) + 1, 0.0);
    for (int l = lmin; l <= p.ell_dim; ++l) log_lambda[l] = specfun::log_lambda_factor(l, p.m);

    if (materials::is_transparent(p.sphere_model) || materials::is_transparent(p.plane_model)) {
      zero = true;
      mie.assign(static_cast<std::size_t>(p.ell_dim) + 1, MiePair{});
      return;
    }
    mie = reflection::mie_range(p.ell_dim, p.xi, p.R, p.sphere_model);
    if (p.sphere_magnetic_dropped) {
      for (auto& c : mie) c.b = LogScaled::zero();
    }
    eps_plane = materials::epsilon(p.plane_model, p.xi);

    const double D = 2.0 * p.ell_dim + 4.0;
    const double t_max = grid_t_max(D, alpha);
    const double v_high = inverse_softplus(std::sqrt(t_max)) + 1.0;
    const int count = static_cast<int>(std::ceil((v_high - kVLow) / kStep)) + 1;
    build_level(base, kStep, count, 0.0);

    const int rows = p.ell_dim - p.m + 1;
    pe.resize(static_cast<std::size_t>(rows) * count);
    shift.assign(rows, 0.0);
    peak.assign(rows, 0);
    for (int r = (p.m == 0 ? 1 : 0); r < rows; ++r) {
      const double* lp = &base.lp[static_cast<std::size_t>(r) * count];
      double best = kNegInf;
      int arg = 0;
      for (int k = 0; k < count; ++k) {
        const double g = lp[k] + 0.5 * base.lw[k];
        if (g > best) {
          best = g;
          arg = k;
        }
      }
      shift[r] = best;
      peak[r] = arg;
      double* out = &pe[static_cast<std::size_t>(r) * count];
      for (int k = 0; k < count; ++k) out[k] = std::exp(lp[k] + 0.5 * base.lw[k] - best);
    }
  }

  // Nodes v = kVLow + (i + offset) h for i = 0..count-1.
  void build_level(Level& lv, double h, int count, double offset) const {
    lv.h = h;
    lv.count = count;
    lv.lw.resize(count);
    lv.fa.resize(count);
    lv.fb.resize(count);
    lv.rte.resize(count);
    lv.rtm.resize(count);
    const int rows = p.ell_dim - p.m + 1;
    lv.lp.assign(static_cast<std::size_t>(rows) * count, 0.0);
    lv.q.assign(static_cast<std::size_t>(rows) * count, 0.0);
    const double m2 = static_cast<double>(p.m) * p.m;
    for (int k = 0; k < count; ++k) {
      const double v = kVLow + (k + offset) * h;
      const double sp = softplus(v);
      const double t = sp * sp;
      const double xm1 = t / (2.0 * alpha);
      const double x2m1 = xm1 * (2.0 + xm1);
      lv.lw[k] = std::log(sp * logistic(v) / alpha) - t;
      lv.fa[k] = m2 / x2m1;
      lv.fb[k] = x2m1;
      const FresnelPair r = reflection::fresnel_x(1.0 + xm1, eps_plane);
      lv.rte[k] = p.plane_te_dropped ? 0.0 : r.r_te;
      lv.rtm[k] = r.r_tm;
      specfun::legendre_sequence(p.ell_dim, p.m, xm1, &lv.lp[k], &lv.q[k], count);
    }
  }

  const Level& level(int j) const {
    std::call_once(once[j - 1], [&] {
      auto lv = std::make_unique<Level>();
      const int factor = 1 << (j - 1);
      build_level(*lv, base.h / factor, base.count * factor, 0.5);
      refined[j - 1] = std::move(lv);
    });
    return *refined[j - 1];
  }

  int row(int ell) const { return ell - p.m; }

  // Weights are w1[k] * w2[k], or w1[k - k0] alone when w2 is null.
  static void accumulate(const Level& lv, int k0, int k1, const double* w1, const double* w2,
                         const double* q1, const double* q2, RawArray& even, RawArray& odd,
                         int parity_offset) {
    if (!w2) {
      static thread_local std::vector<double> ones;
      if (ones.size() < static_cast<std::size_t>(lv.count)) ones.assign(lv.count, 1.0);
      w2 = ones.data();
      w1 -= k0;
    }
    const double* fa = lv.fa.data();
    const double* fb = lv.fb.data();
    const double* rtm = lv.rtm.data();
    const double* rte = lv.rte.data();
    for (int parity = 0; parity < 2; ++parity) {
      const int start = ((k0 + parity_offset) & 1) == parity ? k0 : k0 + 1;
      double s0 = 0, s1 = 0, s2 = 0, s3 = 0, s4 = 0, s5 = 0, s6 = 0, s7 = 0;
#pragma omp simd reduction(+ : s0, s1, s2, s3, s4, s5, s6, s7)
      for (int k = start; k <= k1; k += 2) {
        const double b = w1[k] * w2[k];
        const double a = b * fa[k];
        const double bb = b * fb[k] * q1[k] * q2[k];
        const double c12 = b * q2[k];
        const double c21 = b * q1[k];
        s0 += a * rtm[k];
        s1 += a * rte[k];
        s2 += bb * rtm[k];
        s3 += bb * rte[k];
        s4 += c12 * rtm[k];
        s5 += c12 * rte[k];
        s6 += c21 * rtm[k];
        s7 += c21 * rte[k];
      }
      RawArray& s = parity ? odd : even;
      s[A_TM] += s0;
      s[A_TE] += s1;
      s[B_TM] += s2;
      s[B_TE] += s3;
      s[C12_TM] += s4;
      s[C12_TE] += s5;
      s[C21_TM] += s6;
      s[C21_TE] += s7;
    }
  }

  // Level-0 sums over the window around the product peak.
  WindowSums window_sums(int ell1, int ell2) const {
    const int r1 = row(ell1), r2 = row(ell2);
    const int n = base.count;
    const double* lp1 = &base.lp[static_cast<std::size_t>(r1) * n];
    const double* lp2 = &base.lp[static_cast<std::size_t>(r2) * n];
    const double* lw = base.lw.data();
    const auto g = [&](int k) { return lp1[k] + lp2[k] + lw[k]; };

    int kp = (peak[r1] + peak[r2]) / 2;
    double gp = g(kp);
    while (kp + 1 < n && g(kp + 1) > gp) gp = g(++kp);
    while (kp > 0 && g(kp - 1) > gp) gp = g(--kp);
    const double floor_g = gp - kWindowDrop;
    // The integrand is unimodal: exponential search for the window edges.
    const auto edge = [&](int dir) {
      int k = kp, step = 1;
      for (;;) {
        const int next = k + dir * step;
        if (next < 0 || next >= n || g(next) < floor_g) {
          if (step == 1) return k;
          step /= 2;
        } else {
          k = next;
          step *= 2;
        }
      }
    };
    const int lo = std::max(0, edge(-1) - 1);
    const int hi = std::min(n - 1, edge(1) + 1);

    WindowSums out;
    out.lo = lo;
    out.hi = hi;
    const double* q1 = &base.q[static_cast<std::size_t>(r1) * n];
    const double* q2 = &base.q[static_cast<std::size_t>(r2) * n];
    const double s12 = shift[r1] + shift[r2];
    if (gp - s12 >= kFastPathFloor) {
      const double* pe1 = &pe[static_cast<std::size_t>(r1) * n];
      const double* pe2 = &pe[static_cast<std::size_t>(r2) * n];
      out.log_scale = s12;
      accumulate(base, lo, hi, pe1, pe2, q1, q2, out.even, out.odd, 0);
    } else {
      thread_local std::vector<double> values;
      values.resize(static_cast<std::size_t>(hi - lo + 1));
      for (int k = lo; k <= hi; ++k) values[k - lo] = std::exp(g(k) - gp);
      out.log_scale = gp;
      accumulate(base, lo, hi, values.data(), nullptr, q1, q2, out.even, out.odd, 0);
    }
    return out;
  }

  // Sums of refinement level j over the window [lo, hi] of level 0.
  RawArray refined_sums(int j, int ell1, int ell2, int lo, int hi, double log_scale) const {
    const Level& lv = level(j);
    const int factor = 1 << (j - 1);
    const int k0 = std::max(0, (lo - 1) * factor);
    const int k1 = std::min(lv.count - 1, (hi + 1) * factor - 1);
    const int n = lv.count;
    const double* lp1 = &lv.lp[static_cast<std::size_t>(row(ell1)) * n];
    const double* lp2 = &lv.lp[static_cast<std::size_t>(row(ell2)) * n];
    thread_local std::vector<double> values;
    values.resize(static_cast<std::size_t>(std::max(0, k1 - k0 + 1)));
    for (int k = k0; k <= k1; ++k) values[k - k0] = std::exp(lp1[k] + lp2[k] + lv.lw[k] - log_scale);
    RawArray s{}, unused{};
    accumulate(lv, k0, k1, values.data(), nullptr, &lv.q[static_cast<std::size_t>(row(ell1)) * n],
               &lv.q[static_cast<std::size_t>(row(ell2)) * n], s, unused, 0);
    for (int i = 0; i < kRawCount; ++i) s[i] += unused[i];
    return s;
  }

  // Converged raw integrals for the pair. `select` projects raw sums onto the
  // quantities whose convergence is checked.
  template <class Select>
  RawArray converged(int ell1, int ell2, double& log_norm, Select select) const {
    const WindowSums w = window_sums(ell1, ell2);
    RawArray total{};
    for (int i = 0; i < kRawCount; ++i) total[i] = w.even[i] + w.odd[i];
    double h = base.h;
    RawArray coarse{};
    for (int i = 0; i < kRawCount; ++i) coarse[i] = 2.0 * w.even[i];
    double coarse_h = 1.0;  // coarse estimates are already scaled to the fine step

    for (int j = 0;; ++j) {
      const auto fine_q = select(total);
      const auto coarse_q = select(coarse);
      bool ok = true;
      double worst_fine = 0.0, worst_coarse = 0.0;
      for (std::size_t i = 0; i < fine_q.size(); ++i) {
        const double f = fine_q[i], c = coarse_q[i] * coarse_h;
        if (f == 0.0 && c == 0.0) continue;
        if (!(std::fabs(f - c) <= p.quad_rel_tol * std::fabs(f))) {
          ok = false;
          worst_fine = f;
          worst_coarse = c;
        }
      }
      if (ok) break;
      if (j == kMaxRefinements) {
        std::ostringstream msg;
        msg << "round trip quadrature did not converge for (l1, l2) = (" << ell1 << ", " << ell2
            << "), m = " << p.m << ", alpha = " << alpha;
        const double scale = std::exp(w.log_scale + std::log(h) - 2.0 * alpha);
        throw ConvergenceError(msg.str(), worst_coarse * scale, worst_fine * scale);
      }
      const RawArray extra = refined_sums(j + 1, ell1, ell2, w.lo, w.hi, w.log_scale);
      coarse = total;
      coarse_h = 2.0;  // raw sums at step h carry weight 2 relative to step h/2
      for (int i = 0; i < kRawCount; ++i) total[i] += extra[i];
      h *= 0.5;
    }
    log_norm = w.log_scale + std::log(h) - 2.0 * alpha + log_lambda[ell1] + log_lambda[ell2];
    return total;
  }

  void check_pair(int ell1, int ell2) const {
    if (ell1 < lmin || ell2 < lmin || ell1 > p.ell_dim || ell2 > p.ell_dim) {
      throw DomainError("round trip: multipole index out of range");
    }
  }

  // Combined quantities EE, MM, EM, ME before Mie weights.
  std::array<double, 4> combos(int ell1, int ell2, double& log_norm) const {
    const double m = p.m;
    const auto select = [m](const RawArray& s) {
      return std::array<double, 4>{s[B_TM] - s[A_TE], s[A_TM] - s[B_TE],
                                   m * (s[C12_TM] - s[C21_TE]), m * (s[C21_TM] - s[C12_TE])};
    };
    const RawArray s = converged(ell1, ell2, log_norm, select);
    return select(s);
  }

  LogScaled single(int ell1, int ell2, Raw tm, Raw te, PlanePolarization pol, double factor) const {
    check_pair(ell1, ell2);
    if (zero) return LogScaled::zero();
    const Raw which = pol == PlanePolarization::TM ? tm : te;
    double log_norm = 0.0;
    const auto select = [which](const RawArray& s) { return std::array<double, 1>{s[which]}; };
    const RawArray s = converged(ell1, ell2, log_norm, select);
    return LogScaled::from_value(factor * s[which]) * LogScaled::from_log(log_norm);
  }
};

RoundTripOperator::RoundTripOperator(const RoundTripParams& params)
    : impl_(std::make_unique<Impl>(params)) {}
RoundTripOperator::~RoundTripOperator() = default;
RoundTripOperator::RoundTripOperator(RoundTripOperator&&) noexcept = default;
RoundTripOperator& RoundTripOperator::operator=(RoundTripOperator&&) noexcept = default;

const RoundTripParams& RoundTripOperator::params() const { return impl_->p; }
int RoundTripOperator::ell_min() const { return impl_->lmin; }
int RoundTripOperator::block_dim() const { return impl_->d; }
bool RoundTripOperator::sphere_transparent() const { return impl_->zero; }
const std::vector<MiePair>& RoundTripOperator::mie() const { return impl_->mie; }

PairEntries RoundTripOperator::pair(int ell1, int ell2) const {
  const Impl& s = *impl_;
  s.check_pair(ell1, ell2);
  if (s.zero) return {};
  const MiePair& r1 = s.mie[ell1];
  const MiePair& r2 = s.mie[ell2];
  if (r1.a.is_zero() && r1.b.is_zero()) return {};
  if (r2.a.is_zero() && r2.b.is_zero()) return {};
  if (ell1 > ell2) {
    // Exact transpose of the canonical ordering.
    const PairEntries t = pair(ell2, ell1);
    return {t.EE, t.ME, t.EM, t.MM};
  }
  double log_norm = 0.0;
  const auto c = s.combos(ell1, ell2, log_norm);
  const auto weight = [&](const LogScaled& u, const LogScaled& v) {
    if (u.is_zero() || v.is_zero()) return 0.0;
    return std::exp(0.5 * (u.log_magnitude + v.log_magnitude) + log_norm);
  };
  PairEntries out;
  out.EE = weight(r1.a, r2.a) * c[0];
  out.MM = weight(r1.b, r2.b) * c[1];
  out.EM = weight(r1.a, r2.b) * c[2];
  out.ME = weight(r1.b, r2.a) * c[3];
  return out;
}

std::array<LogScaled, 4> RoundTripOperator::pair_unsymmetrized(int ell1, int ell2) const {
  const Impl& s = *impl_;
  s.check_pair(ell1, ell2);
  std::array<LogScaled, 4> out{};
  if (s.zero) return out;
  double log_norm = 0.0;
  const auto c = s.combos(ell1, ell2, log_norm);
  const LogScaled norm = LogScaled::from_log(log_norm);
  const MiePair& r1 = s.mie[ell1];
  out[0] = r1.a.abs() * LogScaled::from_value(c[0]) * norm;
  out[1] = r1.a.abs() * LogScaled::from_value(c[2]) * norm;
  out[2] = r1.b.abs() * LogScaled::from_value(c[3]) * norm;
  out[3] = r1.b.abs() * LogScaled::from_value(c[1]) * norm;
  return out;
}

LogScaled RoundTripOperator::integral_A(int ell1, int ell2, PlanePolarization p) const {
  return impl_->single(ell1, ell2, A_TM, A_TE, p, 1.0);
}
LogScaled RoundTripOperator::integral_B(int ell1, int ell2, PlanePolarization p) const {
  return impl_->single(ell1, ell2, B_TM, B_TE, p, 1.0);
}
LogScaled RoundTripOperator::integral_C(int ell1, int ell2, PlanePolarization p) const {
  return impl_->single(ell1, ell2, C12_TM, C12_TE, p, static_cast<double>(impl_->p.m));
}

double RoundTripOperator::scattering_entry(int i, int j) const {
  double v = 0.0;
  scattering_block(i, i + 1, j, j + 1, &v, 1);
  return v;
}

void RoundTripOperator::scattering_block(int r0, int r1, int c0, int c1, double* out,
                                         int ld) const {
  const int lmin = impl_->lmin;
  for (int j = c0; j < c1; ++j) {
    for (int i = r0; i < r1; ++i) out[static_cast<std::size_t>(j - c0) * ld + (i - r0)] = 0.0;
  }
  // Visit each multipole pair once and scatter its four entries.
  const int l_r0 = r0 / 2, l_r1 = (r1 - 1) / 2;
  const int l_c0 = c0 / 2, l_c1 = (c1 - 1) / 2;
  for (int b = l_c0; b <= l_c1; ++b) {
    for (int a = l_r0; a <= l_r1; ++a) {
      const PairEntries e = pair(a + lmin, b + lmin);
      const double vals[2][2] = {{e.EE, e.EM}, {e.ME, e.MM}};
      for (int pa = 0; pa < 2; ++pa) {
        const int i = 2 * a + pa;
        if (i < r0 || i >= r1) continue;
        for (int pb = 0; pb < 2; ++pb) {
          const int j = 2 * b + pb;
          if (j < c0 || j >= c1) continue;
          out[static_cast<std::size_t>(j - c0) * ld + (i - r0)] = (i == j ? 1.0 : 0.0) - vals[pa][pb];
        }
      }
    }
  }
}

Eigen::MatrixXd RoundTripOperator::scattering_matrix() const {
  const int n = matrix_dim();
  Eigen::MatrixXd A(n, n);
  const int d = block_dim();
  const int lmin = ell_min();
  for (int b = 0; b < d; ++b) {
    for (int a = b; a < d; ++a) {
      const PairEntries e = pair(a + lmin, b + lmin);
      A(2 * a, 2 * b) = -e.EE;
      A(2 * a, 2 * b + 1) = -e.EM;
      A(2 * a + 1, 2 * b) = -e.ME;
      A(2 * a + 1, 2 * b + 1) = -e.MM;
      A(2 * b, 2 * a) = -e.EE;
      A(2 * b + 1, 2 * a) = -e.EM;
      A(2 * b, 2 * a + 1) = -e.ME;
      A(2 * b + 1, 2 * a + 1) = -e.MM;
    }
  }
  A.diagonal().array() += 1.0;
  return A;
}

const Eigen::MatrixXd& RoundTripBlock::block(Polarization p1, Polarization p2) const {
  if (p1 == Polarization::E) return p2 == Polarization::E ? EE : EM;
  return p2 == Polarization::E ? ME : MM;
}

Eigen::MatrixXd RoundTripBlock::full() const {
  const int d = dim();
  Eigen::MatrixXd out(2 * d, 2 * d);
  out << EE, EM, ME, MM;
  return out;
}

namespace roundtrip {

LogScaled kernel_f(const RoundTripParams& params, double x, int j, PlanePolarization p, int ell1,
                   int ell2) {
  params.validate();
  if (!(x >= 1.0)) throw DomainError("kernel_f: requires x >= 1");
  if (j < -1 || j > 1) throw DomainError("kernel_f: j must be -1, 0 or 1");
  const int lmin = params.ell_min();
  if (ell1 < lmin || ell2 < lmin) throw DomainError("kernel_f: multipole index out of range");
  if (materials::is_transparent(params.plane_model)) return LogScaled::zero();
  const double xi = params.xi;
  const FresnelPair r = reflection::fresnel_x(x, materials::epsilon(params.plane_model, xi));
  double rp = p == PlanePolarization::TM ? r.r_tm : r.r_te;
  if (p == PlanePolarization::TE && params.plane_te_dropped) rp = 0.0;
  if (rp == 0.0) return LogScaled::zero();
  // m^{1-j} (x^2 - 1)^j with the powers of m cancelled analytically.
  const double x2m1 = (x - 1.0) * (x + 1.0);
  const double m = params.m;
  LogScaled factor;
  if (j == 1) {
    factor = LogScaled::from_value(x2m1);
  } else if (j == 0) {
    factor = LogScaled::from_value(m);
  } else {
    factor = m == 0.0 ? LogScaled::zero()
                      : LogScaled::from_value(m * m) / LogScaled::from_value(x2m1);
  }
  const double log_rest = specfun::log_lambda_factor(ell1, params.m) +
                          specfun::log_lambda_factor(ell2, params.m) - 2.0 * params.alpha() * x;
  return LogScaled::from_value(rp) * factor * LogScaled::from_log(log_rest);
}

LogScaled integral_A(const RoundTripParams& params, int ell1, int ell2, PlanePolarization p) {
  RoundTripParams q = params;
  q.ell_dim = std::max({params.ell_dim, ell1, ell2});
  return RoundTripOperator(q).integral_A(ell1, ell2, p);
}
LogScaled integral_B(const RoundTripParams& params, int ell1, int ell2, PlanePolarization p) {
  RoundTripParams q = params;
  q.ell_dim = std::max({params.ell_dim, ell1, ell2});
  return RoundTripOperator(q).integral_B(ell1, ell2, p);
}
LogScaled integral_C(const RoundTripParams& params, int ell1, int ell2, PlanePolarization p) {
  RoundTripParams q = params;
  q.ell_dim = std::max({params.ell_dim, ell1, ell2});
  return RoundTripOperator(q).integral_C(ell1, ell2, p);
}

RoundTripBlock assemble_block(const RoundTripParams& params) {
  const RoundTripOperator op(params);
  RoundTripBlock blk;
  blk.ell_min = op.ell_min();
  blk.ell_dim = params.ell_dim;
  const int d = op.block_dim();
  blk.EE.setZero(d, d);
  blk.EM.setZero(d, d);
  blk.ME.setZero(d, d);
  blk.MM.setZero(d, d);
  for (int a = 0; a < d; ++a) {
    for (int b = a; b < d; ++b) {
      const PairEntries e = op.pair(a + blk.ell_min, b + blk.ell_min);
      blk.EE(a, b) = blk.EE(b, a) = e.EE;
      blk.MM(a, b) = blk.MM(b, a) = e.MM;
      blk.EM(a, b) = e.EM;
      blk.EM(b, a) = e.ME;
    }
  }
  blk.ME = blk.EM.transpose();
  return blk;
}

LogRoundTripBlock assemble_block_unsymmetrized(const RoundTripParams& params) {
  const RoundTripOperator op(params);
  LogRoundTripBlock blk;
  blk.ell_min = op.ell_min();
  blk.ell_dim = params.ell_dim;
  const int d = op.block_dim();
  for (auto& b : blk.blocks) b.assign(static_cast<std::size_t>(d) * d, LogScaled::zero());
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < d; ++b) {
      const auto e = op.pair_unsymmetrized(a + blk.ell_min, b + blk.ell_min);
      for (int k = 0; k < 4; ++k) blk.blocks[k][static_cast<std::size_t>(a) * d + b] = e[k];
    }
  }
  return blk;
}

Eigen::MatrixXd scattering_matrix(const RoundTripParams& params) {
  return RoundTripOperator(params).scattering_matrix();
}

namespace {
const char* kPairNames[4] = {"EE", "EM", "ME", "MM"};
}

void write_block_csv(const RoundTripBlock& block, std::ostream& out) {
  out << "row,col,pair,value\n";
  out << std::setprecision(17);
  const Eigen::MatrixXd* mats[4] = {&block.EE, &block.EM, &block.ME, &block.MM};
  for (int k = 0; k < 4; ++k) {
    for (int i = 0; i < block.dim(); ++i) {
      for (int j = 0; j < block.dim(); ++j) {
        out << i + block.ell_min << ',' << j + block.ell_min << ',' << kPairNames[k] << ','
            << (*mats[k])(i, j) << '\n';
      }
    }
  }
}

void write_block_csv(const LogRoundTripBlock& block, std::ostream& out) {
  out << "row,col,pair,log10_abs_value\n";
  out << std::setprecision(17);
  const int d = block.dim();
  for (int k = 0; k < 4; ++k) {
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        const LogScaled& v = block.blocks[k][static_cast<std::size_t>(i) * d + j];
        out << i + block.ell_min << ',' << j + block.ell_min << ',' << kPairNames[k] << ',';
        if (v.is_zero()) {
          out << "-inf\n";
        } else {
          out << v.log10_abs() << '\n';
        }
      }
    }
  }
}

double diagonal_dominance_ratio(const Eigen::MatrixXd& scattering) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < scattering.rows(); ++i) {
    const double off = scattering.row(i).cwiseAbs().sum() - std::fabs(scattering(i, i));
    worst = std::max(worst, off / scattering(i, i));
  }
  return worst;
}

}  // namespace roundtrip
}  // namespace casimir
