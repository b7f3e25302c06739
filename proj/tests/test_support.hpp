#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "measchrod/measure.hpp"
#include "measchrod/quadrature.hpp"

namespace measchrod::testing {

/// Random mix of atoms and a piecewise cubic density on [-1.5, 1.5].
inline SignedMeasure random_test_measure(std::mt19937& rng, int atoms = 3, int pieces = 2,
                                         bool with_atoms = true) {
  std::uniform_real_distribution<double> pos(-1.5, 1.5);
  std::uniform_real_distribution<double> w(-2.0, 2.0);
  std::vector<Atom> at;
  if (with_atoms)
    for (int i = 0; i < atoms; ++i) at.push_back({pos(rng), w(rng)});
  std::vector<double> bp;
  for (int i = 0; i <= pieces; ++i) bp.push_back(pos(rng));
  std::sort(bp.begin(), bp.end());
  std::vector<Cubic> cf;
  for (int i = 0; i < pieces; ++i) cf.push_back({w(rng), w(rng), w(rng), w(rng)});
  return SignedMeasure(std::move(at), PiecewiseDensity(std::move(bp), std::move(cf)), {-2.0, 2.0});
}

/// Random polynomial of degree <= 4 with coefficients in [-1, 1].
struct RandomPolynomial {
  std::vector<double> c;
  explicit RandomPolynomial(std::mt19937& rng, int degree = 4) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i <= degree; ++i) c.push_back(u(rng));
  }
  double operator()(double x) const {
    double s = 0.0;
    for (std::size_t k = c.size(); k-- > 0;) s = s * x + c[k];
    return s;
  }
  double derivative(double x) const {
    double s = 0.0;
    for (std::size_t k = c.size(); k-- > 1;) s = s * x + static_cast<double>(k) * c[k];
    return s;
  }
};

inline double relative_error(double a, double b) {
  return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

/// Atom positions and density breakpoints of both measures, sorted.
inline std::vector<double> atom_positions(const SignedMeasure& a, const SignedMeasure& b) {
  std::vector<double> out;
  for (const Atom& x : a.atoms()) out.push_back(x.position);
  for (const Atom& x : b.atoms()) out.push_back(x.position);
  for (double x : a.density().breakpoints()) out.push_back(x);
  for (double x : b.density().breakpoints()) out.push_back(x);
  std::sort(out.begin(), out.end());
  return out;
}

/// Integral of g over [a, b] split at `breaks` (g smooth between them).
inline double piecewise_integral(const std::function<double(double)>& g, double a, double b,
                                 std::vector<double> breaks) {
  breaks.push_back(a);
  breaks.push_back(b);
  std::sort(breaks.begin(), breaks.end());
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double lo = std::max(a, breaks[i]);
    const double hi = std::min(b, breaks[i + 1]);
    if (hi > lo) s += integrate_gl(g, lo, hi, 16, 1);
  }
  return s;
}

}  // namespace measchrod::testing
