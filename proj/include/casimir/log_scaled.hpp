#pragma once

#include <cmath>
#include <limits>

namespace casimir {

// Real number stored as sign * exp(log_magnitude).
struct LogScaled {
  double log_magnitude = -std::numeric_limits<double>::infinity();
  int sign = 0;

  static LogScaled zero() { return {}; }
  static LogScaled from_log(double log_mag, int s = 1) {
    if (s == 0 || log_mag == -std::numeric_limits<double>::infinity()) return {};
    return {log_mag, s > 0 ? 1 : -1};
  }
  static LogScaled from_value(double v) {
    if (v == 0.0) return {};
    return {std::log(std::fabs(v)), v > 0 ? 1 : -1};
  }

  bool is_zero() const { return sign == 0; }
  double value() const { return sign == 0 ? 0.0 : sign * std::exp(log_magnitude); }
  double log10_abs() const {
    return sign == 0 ? -std::numeric_limits<double>::infinity()
                     : log_magnitude / 2.302585092994045684;
  }
  LogScaled abs() const { return sign == 0 ? LogScaled{} : LogScaled{log_magnitude, 1}; }
  LogScaled sqrt_abs() const {
    return sign == 0 ? LogScaled{} : LogScaled{0.5 * log_magnitude, 1};
  }
  LogScaled operator-() const { return {log_magnitude, -sign}; }
};

inline LogScaled operator*(LogScaled a, LogScaled b) {
  if (a.sign == 0 || b.sign == 0) return {};
  return {a.log_magnitude + b.log_magnitude, a.sign * b.sign};
}

inline LogScaled operator/(LogScaled a, LogScaled b) {
  if (b.sign == 0) {
    return {std::numeric_limits<double>::infinity(), a.sign == 0 ? 1 : a.sign};
  }
  if (a.sign == 0) return {};
  return {a.log_magnitude - b.log_magnitude, a.sign * b.sign};
}

// Signed sum without leaving the log domain.
inline LogScaled operator+(LogScaled a, LogScaled b) {
  if (a.sign == 0) return b;
  if (b.sign == 0) return a;
  if (a.log_magnitude < b.log_magnitude) std::swap(a, b);
  const double d = std::exp(b.log_magnitude - a.log_magnitude);
  if (a.sign == b.sign) return {a.log_magnitude + std::log1p(d), a.sign};
  if (d == 1.0) return {};
  return {a.log_magnitude + std::log1p(-d), a.sign};
}

inline LogScaled operator-(LogScaled a, LogScaled b) { return a + (-b); }

}  // namespace casimir
