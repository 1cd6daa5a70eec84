#pragma once

#include <functional>
#include <vector>

namespace casimir::quadrature {

struct Node {
  double x = 0.0;
  double w = 0.0;
};

struct Result {
  double value = 0.0;
  double error = 0.0;       // |I_h - I_2h| at the final step
  int evaluations = 0;
  int refinements = 0;
  std::vector<Node> nodes;  // final rule (abscissae and weights)
};

// Double-exponential rule for int_0^inf f(u) du, with u = scale exp(pi/2 sinh t).
// `scale` should be the decay length of f. Step halving until the last two
// estimates agree to rel_tol (or abs_tol, if larger); throws ConvergenceError otherwise.
Result exp_sinh(const std::function<double(double)>& f, double scale, double rel_tol,
                int max_refinements = 6, double abs_tol = 0.0);

// Double-exponential rule for int_a^b f(x) dx; endpoints are never evaluated.
Result tanh_sinh(const std::function<double(double)>& f, double a, double b, double rel_tol,
                 int max_refinements = 7, double abs_tol = 0.0);

// Evaluates a fixed rule.
double apply(const std::vector<Node>& rule, const std::function<double(double)>& f);

}  // namespace casimir::quadrature
