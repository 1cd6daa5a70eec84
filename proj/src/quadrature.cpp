#include "casimir/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "casimir/constants.hpp"
#include "casimir/errors.hpp"

namespace casimir::quadrature {

namespace {

constexpr double kHalfPi = 0.5 * constants::pi;
constexpr double kTailMin = 1e-18;
constexpr double kTailFactor = 1e-3;  // tail cutoff relative to rel_tol

// Generic driver over a transformed rule: point(t) returns {x, dx/dt}, with
// dx/dt = 0 marking an unusable node.
template <class Point>
Result double_exponential(const std::function<double(double)>& f, Point point, double t_lo,
                          double t_hi, double rel_tol, int max_refinements, double abs_tol) {
  if (!(rel_tol > 0.0)) throw DomainError("quadrature: rel_tol must be positive");
  Result res;
  std::map<double, double> samples;  // t -> f(x(t)) dx/dt
  const auto eval = [&](double t) {
    auto it = samples.find(t);
    if (it != samples.end()) return it->second;
    const Node n = point(t);
    double v = 0.0;
    if (n.w != 0.0) {
      v = f(n.x) * n.w;
      ++res.evaluations;
    }
    samples.emplace(t, v);
    return v;
  };

  const double tail = std::max(kTailMin, kTailFactor * rel_tol);
  double h = 0.5;
  double sum = eval(0.0);
  // Level 0: walk outward until the tail terms are negligible.
  double lo = 0.0, hi = 0.0;
  for (int dir : {1, -1}) {
    int small = 0;
    for (int k = 1;; ++k) {
      const double t = dir * k * h;
      if (t > t_hi || t < t_lo) break;
      const double v = eval(t);
      sum += v;
      (dir > 0 ? hi : lo) = t;
      if (std::fabs(v) <= tail * std::fabs(sum)) {
        if (++small >= 2) break;
      } else {
        small = 0;
      }
    }
  }
  double estimate = h * sum;
  double previous = estimate;
  double last_diff = 0.0;
  for (int level = 1;; ++level) {
    h *= 0.5;
    double extra = 0.0;
    const long k_lo = std::lround(lo / h) - 1, k_hi = std::lround(hi / h) + 1;
    for (long k = k_lo; k <= k_hi; ++k) {
      const double t = k * h;
      if ((k & 1) == 0 || t < t_lo || t > t_hi) continue;
      extra += eval(t);
    }
    sum += extra;
    previous = estimate;
    estimate = h * sum;
    res.refinements = level;
    const double diff = std::fabs(estimate - previous);
    res.error = diff;
    // Digits roughly double per level: error ~ 10^(d1^2 / d2) with d1, d2 the
    // log10 relative differences of the last two levels.
    const double mag = std::fabs(estimate);
    if (last_diff > 0.0 && diff > 0.0 && mag > 0.0 && diff < last_diff && last_diff < mag) {
      const double d1 = std::log10(diff / mag), d2 = std::log10(last_diff / mag);
      res.error = std::min(diff, mag * std::max(std::pow(10.0, d1 * d1 / d2),
                                                std::pow(10.0, 2.0 * d1)));
    }
    last_diff = diff;
    if (res.error <= std::max(rel_tol * std::fabs(estimate), abs_tol)) break;
    if (level >= max_refinements) {
      throw ConvergenceError("double-exponential quadrature did not converge", previous,
                             estimate);
    }
  }
  res.value = estimate;
  for (const auto& entry : samples) {
    const Node n = point(entry.first);
    if (n.w != 0.0) res.nodes.push_back({n.x, h * n.w});
  }
  return res;
}

}  // namespace

Result exp_sinh(const std::function<double(double)>& f, double scale, double rel_tol,
                int max_refinements, double abs_tol) {
  if (!(scale > 0.0)) throw DomainError("exp_sinh: scale must be positive");
  const auto point = [scale](double t) {
    const double s = kHalfPi * std::sinh(t);
    const double u = scale * std::exp(s);
    const double w = u * kHalfPi * std::cosh(t);
    if (!std::isfinite(u) || !std::isfinite(w) || u == 0.0) return Node{u, 0.0};
    return Node{u, w};
  };
  return double_exponential(f, point, -4.5, 4.0, rel_tol, max_refinements, abs_tol);
}

Result tanh_sinh(const std::function<double(double)>& f, double a, double b, double rel_tol,
                 int max_refinements, double abs_tol) {
  if (!(b > a)) throw DomainError("tanh_sinh: requires b > a");
  const double hw = 0.5 * (b - a);
  const auto point = [=](double t) {
    const double s = kHalfPi * std::sinh(t);
    // Distance to the nearer endpoint, computed without cancellation.
    const double delta = hw * 2.0 / (std::exp(2.0 * std::fabs(s)) + 1.0);
    const double x = s >= 0.0 ? b - delta : a + delta;
    const double ch = std::cosh(s);
    const double w = hw * kHalfPi * std::cosh(t) / (ch * ch);
    if (delta == 0.0 || x <= a || x >= b || !std::isfinite(w)) return Node{x, 0.0};
    return Node{x, w};
  };
  return double_exponential(f, point, -3.5, 3.5, rel_tol, max_refinements, abs_tol);
}

double apply(const std::vector<Node>& rule, const std::function<double(double)>& f) {
  double s = 0.0;
  for (const auto& n : rule) s += n.w * f(n.x);
  return s;
}

}  // namespace casimir::quadrature
