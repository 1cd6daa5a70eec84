#pragma once

#include <stdexcept>
#include <string>

namespace casimir {

// Invalid argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// An iterative procedure (quadrature, series, recurrence) did not converge.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double previous, double last)
      : std::runtime_error(what), previous_(previous), last_(last) {}
  double previous_estimate() const { return previous_; }
  double last_estimate() const { return last_; }

 private:
  double previous_;
  double last_;
};

class NotPositiveDefinite : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input data; line is 1-based, 0 when not applicable.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line)
      : std::runtime_error(what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace casimir
