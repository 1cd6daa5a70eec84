#include "casimir/casimir.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

#include "casimir/constants.hpp"
#include "casimir/errors.hpp"
#include "casimir/quadrature.hpp"
#include "casimir/reflection.hpp"

namespace casimir {

namespace {

using steady = std::chrono::steady_clock;
constexpr double kZeroFractions[3] = {1e-3, 5e-4, 2.5e-4};
constexpr std::size_t kMaxWarnings = 20;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Single rows and columns are fetched together with their partner polarization,
// which comes from the same multipole pairs, and the partner is kept for reuse.
class RoundTripSource final : public lindet::EntrySource {
 public:
  explicit RoundTripSource(const RoundTripOperator& op) : op_(op) {}
  int size() const override { return op_.matrix_dim(); }
  void block(int r0, int r1, int c0, int c1, double* out, int ld) const override {
    // The matrix is symmetric, so column j over [r0, r1) is row j over the same range.
    if (r1 - r0 == 1 && c1 - c0 > 1) {
      fetch(r0, c0, c1, out);
    } else if (c1 - c0 == 1 && r1 - r0 > 1) {
      fetch(c0, r0, r1, out);
    } else {
      op_.scattering_block(r0, r1, c0, c1, out, ld);
    }
  }

 private:
  using Key = std::tuple<int, int, int>;  // multipole index, range begin, range end

  void fetch(int index, int b, int e, double* out) const {
    const int len = e - b;
    const int first = index & ~1;
    {
      std::lock_guard<std::mutex> lock(mu_);
      const auto it = cache_.find({first / 2, b, e});
      if (it != cache_.end()) {
        const double* src = it->second.data() + (index - first);
        for (int k = 0; k < len; ++k) out[k] = src[2 * k];
        cache_.erase(it);
        return;
      }
    }
    const int pair_end = std::min(first + 2, size());
    std::vector<double> both(static_cast<std::size_t>(2) * len, 0.0);
    op_.scattering_block(first, pair_end, b, e, both.data(), 2);
    for (int k = 0; k < len; ++k) out[k] = both[2 * k + (index - first)];
    if (pair_end - first == 2) {
      std::lock_guard<std::mutex> lock(mu_);
      if (cache_.size() >= kMaxCached) cache_.clear();
      cache_[{first / 2, b, e}] = std::move(both);
    }
  }

  static constexpr std::size_t kMaxCached = 256;
  const RoundTripOperator& op_;
  mutable std::mutex mu_;
  mutable std::map<Key, std::vector<double>> cache_;
};

// Runs fn(0..count-1) on up to `jobs` threads; the first failure by index is rethrown.
template <class Fn>
void parallel_for(int count, int jobs, Fn&& fn) {
  if (jobs <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(count);
  const auto worker = [&] {
    for (;;) {
      const int i = next++;
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> threads;
  for (int t = 1; t < std::min(jobs, count); ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// Zero-frequency substitute of one body.
struct ZeroBody {
  DielectricModel model;
  bool dropped = false;  // TE of the plane, magnetic multipoles of the sphere
  ZeroFrequencyKind kind = ZeroFrequencyKind::PerfectConductorLike;
  double omega_p = 0.0;
  double epsilon0 = 1.0;
  std::string label;
};

ZeroBody zero_body(const DielectricModel& model, const ZeroFrequencyPolicy& policy) {
  ZeroBody out;
  ZeroFrequencyClass cls = materials::zero_frequency_class(model);
  if (!materials::is_transparent(model)) {
    switch (policy.kind) {
      case ZeroFrequencyPolicy::Kind::Auto: break;
      case ZeroFrequencyPolicy::Kind::Drude: cls = {ZeroFrequencyKind::DrudeLike, 0.0, 1.0}; break;
      case ZeroFrequencyPolicy::Kind::Plasma:
        cls = {ZeroFrequencyKind::PlasmaLike, policy.omega_p, 1.0};
        break;
      case ZeroFrequencyPolicy::Kind::Perfect:
        cls = {ZeroFrequencyKind::PerfectConductorLike, 0.0, 1.0};
        break;
    }
  }
  out.kind = cls.kind;
  out.omega_p = cls.omega_p;
  out.epsilon0 = cls.epsilon0;
  std::ostringstream label;
  switch (cls.kind) {
    case ZeroFrequencyKind::PerfectConductorLike:
      out.model = PerfectReflector{};
      label << "perfect";
      break;
    case ZeroFrequencyKind::DrudeLike:
      out.model = PerfectReflector{};
      out.dropped = true;
      label << "drude";
      break;
    case ZeroFrequencyKind::PlasmaLike:
      if (!(cls.omega_p > 0.0)) throw DomainError("plasma zero-frequency policy needs omega_p > 0");
      out.model = Plasma{cls.omega_p};
      label << "plasma:" << cls.omega_p;
      break;
    case ZeroFrequencyKind::DielectricLike:
      out.model = Constant{cls.epsilon0};
      label << "dielectric:" << cls.epsilon0;
      break;
  }
  out.label = label.str();
  return out;
}

double richardson_zero(const double v[3]) {
  const double r1 = 2.0 * v[1] - v[0];
  const double r2 = 2.0 * v[2] - v[1];
  return (4.0 * r2 - r1) / 3.0;
}

class Evaluator {
 public:
  Evaluator(const JobSpec& spec, double L, int ell_dim, Diagnostics& diag)
      : spec_(spec), L_(L), ell_dim_(ell_dim), diag_(diag),
        zero_plane_(zero_body(spec.plane, spec.zero_frequency)),
        zero_sphere_(zero_body(spec.sphere, spec.zero_frequency)) {}

  std::string zero_label() const {
    return "plane=" + zero_plane_.label + ", sphere=" + zero_sphere_.label;
  }

  RoundTripParams params(double xi, int m, bool zero_frequency) const {
    RoundTripParams p;
    p.R = spec_.R;
    p.L = L_;
    p.xi = xi;
    p.m = m;
    p.ell_dim = ell_dim_;
    p.quad_rel_tol = spec_.tol.quad_rel;
    if (zero_frequency) {
      p.plane_model = zero_plane_.model;
      p.sphere_model = zero_sphere_.model;
      p.plane_te_dropped = zero_plane_.dropped;
      p.sphere_magnetic_dropped = zero_sphere_.dropped;
    } else {
      p.plane_model = spec_.plane;
      p.sphere_model = spec_.sphere;
    }
    return p;
  }

  double logdet(double xi, int m, bool zero_frequency) {
    int rank = 0;
    const double v = block_logdet(params(xi, m, zero_frequency), spec_.backend, spec_.hodlr, &rank);
    std::lock_guard<std::mutex> lock(mu_);
    ++diag_.blocks;
    diag_.hodlr_max_rank = std::max(diag_.hodlr_max_rank, rank);
    diag_.max_logdet = std::max(diag_.max_logdet, v);
    if (v > 1e-12 && diag_.warnings.size() < kMaxWarnings) {
      std::ostringstream msg;
      msg << "positive logdet " << v << " at xi = " << xi << ", m = " << m;
      diag_.warnings.push_back(msg.str());
    }
    return v;
  }

  // Zero-frequency term of block m at the given extrapolation frequencies.
  double zero_logdet(int m, const std::vector<double>& xis) {
    double v[3];
    for (int k = 0; k < 3; ++k) v[k] = logdet(xis[k], m, true);
    return richardson_zero(v);
  }

  std::vector<double> zero_xis() const {
    std::vector<double> out;
    for (double f : kZeroFractions) out.push_back(f * constants::c / (L_ + spec_.R));
    return out;
  }

  // sum_m w_m logdet_m; fixed_m_max >= 0 disables adaptive truncation.
  template <class Block>
  double m_sum(Block block, int fixed_m_max, int& m_max, std::vector<double>& values) {
    values.clear();
    const int jobs = std::max(1, spec_.jobs);
    if (fixed_m_max >= 0) {
      const int count = std::min(fixed_m_max, ell_dim_) + 1;
      values.assign(count, 0.0);
      parallel_for(count, jobs, [&](int m) { values[m] = block(m); });
      double s = 0.0;
      for (int m = 0; m < count; ++m) s += (m == 0 ? 1.0 : 2.0) * values[m];
      m_max = count - 1;
      return s;
    }
    double sum = 0.0;
    int small = 0;
    for (int start = 0; start <= ell_dim_; start += jobs) {
      const int count = std::min(jobs, ell_dim_ - start + 1);
      std::vector<double> batch(count);
      parallel_for(count, jobs, [&](int i) { batch[i] = block(start + i); });
      for (int i = 0; i < count; ++i) {
        const int m = start + i;
        const double term = (m == 0 ? 1.0 : 2.0) * batch[i];
        sum += term;
        values.push_back(batch[i]);
        if (std::fabs(term) <= spec_.tol.m_sum_rel * std::fabs(sum)) {
          ++small;
        } else {
          small = 0;
        }
        if (small >= 3) {
          m_max = m;
          return sum;
        }
      }
    }
    m_max = ell_dim_;
    return sum;
  }

 private:
  const JobSpec& spec_;
  double L_;
  int ell_dim_;
  Diagnostics& diag_;
  ZeroBody zero_plane_, zero_sphere_;
  std::mutex mu_;
};

void add_ledger(CasimirResult& res, int n, double xi, double weight,
                const std::vector<double>& values) {
  for (std::size_t m = 0; m < values.size(); ++m) {
    res.ledger.push_back({n, static_cast<int>(m), xi, weight * (m == 0 ? 1.0 : 2.0), values[m]});
  }
}

CasimirResult evaluate(const JobSpec& spec, double L, int ell_dim, TruncationPlan* plan,
                       bool reuse) {
  const auto t0 = steady::now();
  CasimirResult res;
  Diagnostics& diag = res.diagnostics;
  diag.ell_dim = ell_dim;
  diag.backend = to_string(spec.backend);
  diag.jobs = std::max(1, spec.jobs);
  Evaluator ev(spec, L, ell_dim, diag);
  diag.zero_frequency = ev.zero_label();
  TruncationPlan local;
  TruncationPlan& pl = plan ? *plan : local;
  if (!reuse) pl = TruncationPlan{};
  std::vector<double> values;

  if (spec.T > 0.0) {
    diag.method = "matsubara";
    const double kT = constants::k_B * spec.T;
    const double xi1 = 2.0 * constants::pi * kT / constants::hbar;
    if (reuse) {
      for (std::size_t k = 0; k < pl.xi.size(); ++k) {
        const double xi = pl.xi[k];
        int mm = 0;
        double s;
        if (xi == 0.0) {
          s = ev.m_sum([&](int m) { return ev.zero_logdet(m, pl.zero_xi); }, pl.m_max[k], mm,
                       values);
        } else {
          s = ev.m_sum([&](int m) { return ev.logdet(xi, m, false); }, pl.m_max[k], mm, values);
        }
        res.free_energy += pl.weight[k] * s;
        add_ledger(res, static_cast<int>(k), xi, pl.weight[k], values);
        diag.m_max.push_back(mm);
      }
    } else {
      pl.zero_xi = ev.zero_xis();
      int small = 0;
      for (int n = 0;; ++n) {
        const double xi = n * xi1;
        const double weight = (n == 0 ? 1.0 : 2.0) * 0.5 * kT;
        int mm = 0;
        double s;
        if (n == 0) {
          s = ev.m_sum([&](int m) { return ev.zero_logdet(m, pl.zero_xi); }, -1, mm, values);
        } else {
          s = ev.m_sum([&](int m) { return ev.logdet(xi, m, false); }, -1, mm, values);
        }
        const double term = weight * s;
        res.free_energy += term;
        pl.xi.push_back(xi);
        pl.weight.push_back(weight);
        pl.m_max.push_back(mm);
        add_ledger(res, n, xi, weight, values);
        diag.m_max.push_back(mm);
        if (std::fabs(term) <= spec.tol.matsubara_rel * std::fabs(res.free_energy)) {
          ++small;
        } else {
          small = 0;
        }
        if (small >= 3) break;
        if (n > 100000) {
          throw ConvergenceError("Matsubara sum did not converge", res.free_energy - term,
                                 res.free_energy);
        }
      }
    }
  } else {
    diag.method = "xi-quadrature";
    const double xi_unit = constants::c / (L + spec.R);
    const double prefactor = constants::hbar / (2.0 * constants::pi);
    if (reuse) {
      for (std::size_t k = 0; k < pl.xi.size(); ++k) {
        int mm = 0;
        const double xi = pl.xi[k];
        const double s =
            ev.m_sum([&](int m) { return ev.logdet(xi, m, false); }, pl.m_max[k], mm, values);
        res.free_energy += pl.weight[k] * s;
        add_ledger(res, static_cast<int>(k), xi, pl.weight[k], values);
        diag.m_max.push_back(mm);
      }
    } else {
      std::map<double, std::pair<int, std::vector<double>>> cache;  // xi -> (m_max, values)
      const auto integrand = [&](double u) {
        const double xi = u * xi_unit;
        int mm = 0;
        std::vector<double> vals;
        const double s = ev.m_sum([&](int m) { return ev.logdet(xi, m, false); }, -1, mm, vals);
        cache[xi] = {mm, std::move(vals)};
        return s;
      };
      const double scale = (L + spec.R) / (2.0 * L);
      const auto q = quadrature::exp_sinh(integrand, scale, spec.tol.xi_quad_rel);
      res.free_energy = 0.0;
      int k = 0;
      for (const auto& node : q.nodes) {
        const double xi = node.x * xi_unit;
        const auto it = cache.find(xi);
        if (it == cache.end()) continue;
        const double weight = prefactor * xi_unit * node.w;
        double s = 0.0;
        const auto& vals = it->second.second;
        for (std::size_t m = 0; m < vals.size(); ++m) s += (m == 0 ? 1.0 : 2.0) * vals[m];
        res.free_energy += weight * s;
        pl.xi.push_back(xi);
        pl.weight.push_back(weight);
        pl.m_max.push_back(it->second.first);
        add_ledger(res, k++, xi, weight, vals);
        diag.m_max.push_back(it->second.first);
      }
    }
  }
  diag.frequency_terms = static_cast<int>(pl.xi.size());
  diag.wall_time_s = std::chrono::duration<double>(steady::now() - t0).count();
  return res;
}

}  // namespace

std::string to_string(Backend b) { return b == Backend::Cholesky ? "cholesky" : "hodlr"; }

std::string to_string(const ZeroFrequencyPolicy& p) {
  switch (p.kind) {
    case ZeroFrequencyPolicy::Kind::Auto: return "auto";
    case ZeroFrequencyPolicy::Kind::Drude: return "drude";
    case ZeroFrequencyPolicy::Kind::Perfect: return "perfect";
    case ZeroFrequencyPolicy::Kind::Plasma: {
      std::ostringstream s;
      s << "plasma:" << p.omega_p;
      return s.str();
    }
  }
  return "auto";
}

void JobSpec::validate() const {
  if (!(R > 0.0) || !(L > 0.0) || !std::isfinite(R) || !std::isfinite(L)) {
    throw DomainError("job: R and L must be positive");
  }
  if (!(T >= 0.0) || !std::isfinite(T)) throw DomainError("job: T must be >= 0");
  for (double t : {tol.matsubara_rel, tol.m_sum_rel, tol.quad_rel, tol.xi_quad_rel}) {
    if (!(t > 0.0 && t < 1.0)) throw DomainError("job: tolerances must lie in (0, 1)");
  }
  if (ell_dim < 0) throw DomainError("job: ell_dim must be >= 0 (0 = auto)");
  if (zero_frequency.kind == ZeroFrequencyPolicy::Kind::Plasma && !(zero_frequency.omega_p > 0.0)) {
    throw DomainError("job: plasma zero-frequency policy needs omega_p > 0");
  }
}

int JobSpec::resolved_ell_dim() const { return ell_dim > 0 ? ell_dim : default_ell_dim(R, L); }

double block_logdet(const RoundTripParams& params, Backend backend,
                    const lindet::HodlrOptions& hodlr, int* max_rank) {
  if (max_rank) *max_rank = 0;
  if (params.m > params.ell_dim) return 0.0;
  const RoundTripOperator op(params);
  if (op.sphere_transparent()) return 0.0;
  bool any = false;
  for (int l = op.ell_min(); l <= params.ell_dim; ++l) {
    const auto& c = op.mie()[l];
    if (!c.a.is_zero() || !c.b.is_zero()) any = true;
  }
  if (!any) return 0.0;
  if (backend == Backend::Cholesky) {
    Eigen::MatrixXd A = op.scattering_matrix();
    return lindet::logdet_cholesky_inplace(A);
  }
  const RoundTripSource source(op);
  const auto F = lindet::hodlr_factorize(source, hodlr);
  if (max_rank) *max_rank = F.max_rank();
  return F.logdet();
}

CasimirResult compute_free_energy(const JobSpec& spec, TruncationPlan* plan, bool reuse_plan) {
  spec.validate();
  if (reuse_plan && (!plan || plan->xi.empty())) {
    throw DomainError("compute_free_energy: reuse requested without a plan");
  }
  return evaluate(spec, spec.L, spec.resolved_ell_dim(), plan, reuse_plan);
}

CasimirResult free_energy(const JobSpec& spec) {
  if (!(spec.T > 0.0)) throw DomainError("free_energy: requires T > 0 (use free_energy_T0)");
  return compute_free_energy(spec);
}

CasimirResult free_energy_T0(const JobSpec& spec) {
  if (spec.T != 0.0) throw DomainError("free_energy_T0: requires T == 0");
  return compute_free_energy(spec);
}

CasimirResult force(const JobSpec& spec) {
  spec.validate();
  const auto t0 = steady::now();
  const double L = spec.L;
  const double h = 1e-4 * L;
  const int ell_dim = spec.resolved_ell_dim();
  TruncationPlan plan;
  const CasimirResult fp = evaluate(spec, L + h, ell_dim, &plan, false);
  const CasimirResult fm = evaluate(spec, L - h, ell_dim, &plan, true);
  const CasimirResult gp = evaluate(spec, L + 0.5 * h, ell_dim, &plan, true);
  const CasimirResult gm = evaluate(spec, L - 0.5 * h, ell_dim, &plan, true);

  const double d1 = -(fp.free_energy - fm.free_energy) / (2.0 * h);
  const double d2 = -(gp.free_energy - gm.free_energy) / h;
  CasimirResult res;
  res.diagnostics = fp.diagnostics;
  Diagnostics& diag = res.diagnostics;
  for (const auto* r : {&fm, &gp, &gm}) {
    diag.blocks += r->diagnostics.blocks;
    for (const auto& w : r->diagnostics.warnings) {
      if (diag.warnings.size() < kMaxWarnings) diag.warnings.push_back(w);
    }
  }
  diag.fd_step_m = h;
  diag.fd_derivative_h = d1;
  diag.fd_derivative_h2 = d2;
  const double scale = std::max(std::fabs(d2), std::fabs(d1));
  diag.fd_relative_change = scale > 0.0 ? std::fabs(d2 - d1) / scale : 0.0;
  if (scale > 0.0 && diag.fd_relative_change > 1e-4) {
    throw ConvergenceError("force: finite-difference derivative not converged", d1, d2);
  }
  res.force = (4.0 * d2 - d1) / 3.0;

  // F(L) from the symmetric averages, accurate to O(h^4).
  const auto central = [](double a_h, double a_h2) { return (4.0 * a_h2 - a_h) / 3.0; };
  res.free_energy =
      central(0.5 * (fp.free_energy + fm.free_energy), 0.5 * (gp.free_energy + gm.free_energy));
  res.ledger = fp.ledger;
  for (std::size_t i = 0; i < res.ledger.size(); ++i) {
    res.ledger[i].logdet =
        central(0.5 * (fp.ledger[i].logdet + fm.ledger[i].logdet),
                0.5 * (gp.ledger[i].logdet + gm.ledger[i].logdet));
  }
  res.f_pfa = pfa_force(spec);
  if (*res.f_pfa != 0.0) res.correction = 1.0 - *res.force / *res.f_pfa;
  diag.wall_time_s = std::chrono::duration<double>(steady::now() - t0).count();
  return res;
}

namespace {

// Product of the plane and sphere-material Fresnel coefficients at xi = 0.
std::pair<double, double> zero_frequency_fresnel(const ZeroBody& b, double kappa) {
  switch (b.kind) {
    case ZeroFrequencyKind::PerfectConductorLike: return {-1.0, 1.0};
    case ZeroFrequencyKind::DrudeLike: return {0.0, 1.0};
    case ZeroFrequencyKind::PlasmaLike: {
      const double w = b.omega_p / constants::c;
      const double s = kappa + std::sqrt(kappa * kappa + w * w);
      return {-(w * w) / (s * s), 1.0};
    }
    case ZeroFrequencyKind::DielectricLike:
      return {0.0, (b.epsilon0 - 1.0) / (b.epsilon0 + 1.0)};
  }
  return {0.0, 0.0};
}

// ln(1 - rr e^{-a}), exact for rr = 1 as a -> 0.
double log_term(double rr, double a) {
  if (rr == 1.0 && a < 0.6931471805599453) return std::log(-std::expm1(-a));
  return std::log1p(-rr * std::exp(-a));
}

}  // namespace

double plane_plane_free_energy(const JobSpec& spec, double L) {
  if (!(L > 0.0)) throw DomainError("plane_plane_free_energy: L must be positive");
  if (materials::is_transparent(spec.plane) || materials::is_transparent(spec.sphere)) return 0.0;
  const double tol = std::max(1e-13, 0.1 * spec.tol.quad_rel);
  const auto fresnel_product = [&](double xi, double x) {
    const double e1 = materials::epsilon(spec.plane, xi);
    const double e2 = materials::epsilon(spec.sphere, xi);
    const FresnelPair a = reflection::fresnel_x(x, e1);
    const FresnelPair b = reflection::fresnel_x(x, e2);
    return std::pair<double, double>{a.r_te * b.r_te, a.r_tm * b.r_tm};
  };

  if (spec.T == 0.0) {
    // E = hbar c / (4 pi^2) int_0^inf kappa^2 dkappa int_0^1 dtau sum_p ln(1 - r r e^{-2 kappa L}),
    // with xi = c kappa tau and s = 2 kappa L.
    const auto outer = [&](double s) {
      const double kappa = s / (2.0 * L);
      const auto inner = [&](double tau) {
        const double xi = constants::c * kappa * tau;
        const auto rr = fresnel_product(xi, 1.0 / tau);
        return log_term(rr.first, s) + log_term(rr.second, s);
      };
      // The outer weight s^2 makes the inner integral irrelevant near s = 0.
      const double abs_tol = 1e-2 * tol / (s * s);
      return s * s * quadrature::tanh_sinh(inner, 0.0, 1.0, tol, 7, abs_tol).value;
    };
    const double I = quadrature::exp_sinh(outer, 1.0, tol).value;
    return constants::hbar * constants::c / (4.0 * constants::pi * constants::pi) * I /
           (8.0 * L * L * L);
  }

  const double kT = constants::k_B * spec.T;
  const double xi1 = 2.0 * constants::pi * kT / constants::hbar;
  const ZeroBody zp = zero_body(spec.plane, spec.zero_frequency);
  const ZeroBody zs = zero_body(spec.sphere, spec.zero_frequency);
  double total = 0.0;
  int small = 0;
  for (int n = 0;; ++n) {
    double term;
    if (n == 0) {
      const auto f = [&](double s) {
        const double kappa = s / (2.0 * L);
        const auto a = zero_frequency_fresnel(zp, kappa);
        const auto b = zero_frequency_fresnel(zs, kappa);
        return kappa * (log_term(a.first * b.first, s) + log_term(a.second * b.second, s));
      };
      term = 0.5 * quadrature::exp_sinh(f, 1.0, tol).value / (2.0 * L);
    } else {
      const double xi = n * xi1;
      const double k0 = xi / constants::c;
      const auto f = [&](double s) {
        const double kappa = k0 + s / (2.0 * L);
        const auto rr = fresnel_product(xi, 1.0 + constants::c * s / (2.0 * L * xi));
        const double a = 2.0 * k0 * L + s;
        return kappa * (log_term(rr.first, a) + log_term(rr.second, a));
      };
      term = quadrature::exp_sinh(f, 1.0, tol).value / (2.0 * L);
    }
    total += term;
    if (std::fabs(term) <= spec.tol.matsubara_rel * std::fabs(total)) {
      ++small;
    } else {
      small = 0;
    }
    if (small >= 3 || total == 0.0) break;
    if (n > 1000000) throw ConvergenceError("plane-plane Matsubara sum did not converge", 0, total);
  }
  return kT / (2.0 * constants::pi) * total;
}

double pfa_force(const JobSpec& spec) {
  spec.validate();
  if (spec.T == 0.0 && materials::is_perfect(spec.plane) && materials::is_perfect(spec.sphere)) {
    return -std::pow(constants::pi, 3) * constants::hbar * constants::c * spec.R /
           (360.0 * spec.L * spec.L * spec.L);
  }
  return 2.0 * constants::pi * spec.R * plane_plane_free_energy(spec, spec.L);
}

std::vector<SweepRow> pfa_correction_sweep(const JobSpec& base, const std::vector<double>& radii,
                                           const std::vector<double>& gaps) {
  std::vector<SweepRow> rows;
  for (double R : radii) {
    for (double L : gaps) {
      SweepRow row;
      row.R = R;
      row.L = L;
      row.T = base.T;
      try {
        JobSpec s = base;
        s.R = R;
        s.L = L;
        const CasimirResult r = force(s);
        row.free_energy = r.free_energy;
        row.force = *r.force;
        row.f_pfa = r.f_pfa.value_or(0.0);
        row.correction = r.correction.value_or(std::nan(""));
        row.ok = true;
      } catch (const std::exception& e) {
        row.ok = false;
        row.error = e.what();
        row.correction = row.free_energy = row.force = row.f_pfa = std::nan("");
      }
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<LevelSetPoint> extract_level_sets(const std::vector<SweepRow>& rows,
                                              const std::vector<double>& targets) {
  std::map<double, std::vector<const SweepRow*>> by_radius;
  for (const auto& r : rows) {
    if (r.ok && r.correction > 0.0) by_radius[r.R].push_back(&r);
  }
  std::vector<LevelSetPoint> out;
  for (double target : targets) {
    for (auto& [R, list] : by_radius) {
      std::sort(list.begin(), list.end(), [](auto* a, auto* b) { return a->L < b->L; });
      for (std::size_t i = 0; i + 1 < list.size(); ++i) {
        const double c0 = list[i]->correction, c1 = list[i + 1]->correction;
        if ((c0 - target) * (c1 - target) > 0.0 || c0 == c1) continue;
        const double w = (std::log(target) - std::log(c0)) / (std::log(c1) - std::log(c0));
        const double logL = (1.0 - w) * std::log(list[i]->L) + w * std::log(list[i + 1]->L);
        out.push_back({target, R, std::exp(logL)});
        break;
      }
    }
  }
  return out;
}

}  // namespace casimir
