#pragma once

#include <functional>
#include <vector>

namespace measchrod {

struct QuadratureRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1]; exact for degree 2n - 1.
const QuadratureRule& gauss_legendre(int n);

/// Integral of f over [a, b] with `panels` composite Gauss-Legendre panels.
double integrate_gl(const std::function<double(double)>& f, double a, double b, int points = 16,
                    int panels = 1);

/// Adaptive Simpson on [a, b] to absolute tolerance `tol`.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b, double tol,
                          int max_depth = 40);

/// Integral of f over [a, inf) via the map x = a + s / (1 - s).
double integrate_to_infinity(const std::function<double(double)>& f, double a, double tol);

}  // namespace measchrod
