#pragma once

#include <functional>
#include <string>
#include <vector>

#include "measchrod/fem.hpp"
#include "measchrod/measure.hpp"

namespace measchrod {

/// Explicit Carleman constants. C itself overflows quickly as h -> 0, so the
/// logarithms are the primary fields; `c` is exp(log_c) and may be +inf.
struct CarlemanConstants {
  double tv = 0.0, energy = 0.0, h = 0.0, delta = 0.0;
  double c1 = 0.0;
  double log_c = 0.0;
  double c = 0.0;
  /// Literal reading of the printed constant (first term without e^{C1}).
  double log_c_literal = 0.0;
  /// Calibrated C~(E, delta) and log of the envelope exp(C~ (1 + tv) / h).
  double c_tilde = 0.0;
  double log_simplified = 0.0;
};

/// C1 = 2/delta + tv/(sqrt(E) h);
/// C = e^{C1} (4 e^{C1}/h^2 + 2/h + (2 + 2E + tv^2/h^2)^2 e^{C1} / (E h^2)).
CarlemanConstants constants(double tv, double energy, double h, double delta);

/// Smallest C~ with exp(C~ (1 + tv)/h) >= C on h in [1e-2, 1] and a
/// log-spaced tv grid in [0, 1e4], times a 1e-3 safety factor. Cached.
double calibrate_c_tilde(double energy, double delta);

struct WeightProfile {
  double eta = 0.0, energy = 0.0, h = 0.0, delta = 0.0;
  std::vector<double> x;
  std::vector<double> exponent;
  std::vector<double> values;  // exp(exponent)
};

/// Closed form of the integral of (|t| + 1)^{-1-delta} over (-inf, x].
double polynomial_weight_cumulative(double x, double delta);

/// w_eta on the given points: exp of the cumulative of |V_c|/(sqrt(E) h), of
/// the Gaussian-smoothed atoms over sqrt(E) h, and of (|x|+1)^{-1-delta}.
WeightProfile weight_eta(const SignedMeasure& m, double energy, double h, double delta, double eta,
                         const std::vector<double>& x);

/// Discretization settings shared by the inequality checks.
struct CheckSetup {
  double half_width = 0.0;   // 0: R0 + 10
  double resolution = 0.0;   // 0: min(0.02, 0.1 h / sqrt(E))
  Boundary boundary = Boundary::Outgoing;
};

struct CarlemanReport {
  double energy = 0.0, eps = 0.0, h = 0.0, delta = 0.0;
  int sign = 1;
  double resolution = 0.0;
  double lhs = 0.0;
  double rhs_integral = 0.0;  // weighted integral of |f|^2
  double log_rhs = 0.0;
  double ratio = 0.0;
  double log10_ratio = 0.0;
  CarlemanConstants constants;
  bool skipped = false;  // eps = 0 near a box eigenvalue
  std::string note;

  [[nodiscard]] double tolerance() const { return 1.0 + 10.0 * resolution * resolution; }
  [[nodiscard]] bool pass() const { return skipped || ratio <= tolerance(); }
};

/// Solves (P - E +- i eps) u = f on the grid (sign = +1 picks +i eps) and
/// compares int (|x|+1)^{-1-delta}(E|u|^2 + |hu'|^2) with
/// C int (|x|+1)^{1+delta}|f|^2. With the outgoing boundary the exterior tail
/// of the left side is added in closed form.
CarlemanReport carleman_check(const SignedMeasure& m, double energy, double eps, double h, double delta,
                              int sign, const std::function<cplx(double)>& f, const CheckSetup& setup = {});

struct ResolventBoundReport {
  double energy = 0.0, eps = 0.0, h = 0.0, delta = 0.0;
  int sign = 1;
  double measured_norm = 0.0;
  double log_paper_bound = 0.0;  // log sqrt(C/E)
  double paper_bound = 0.0;
  double ratio = 0.0;
  bool converged = false;
  [[nodiscard]] bool pass() const { return ratio <= 1.0; }
};

/// Norm of w R(E -+ i eps) w with w = (|x|+1)^{-(1+delta)/2}, in the FEM
/// space with the mass inner product, against sqrt(C/E).
ResolventBoundReport resolvent_bound_check(const SignedMeasure& m, double energy, double eps, double h,
                                           double delta, int sign = 1, const CheckSetup& setup = {});

struct HScanReport {
  std::vector<double> h;
  std::vector<double> energy;
  std::vector<double> norm;
  /// Least-squares slope of log(norm) against 1/h.
  double slope = 0.0;
  double intercept = 0.0;
  /// C~(E, delta)(1 + tv) for the first energy of the scan.
  double envelope_slope = 0.0;
};

/// resolvent_bound_check over an h grid. `energy_of_h` defaults to E(h) = E.
HScanReport resolvent_h_scan(const SignedMeasure& m, double energy, double eps, double delta,
                             const std::vector<double>& hs,
                             const std::function<double(double)>& energy_of_h = {}, int workers = 1);

struct ExteriorReport {
  double h0 = 0.0;
  double r0 = 0.0;
  std::vector<double> h;
  std::vector<double> norm;
  double slope = 0.0;  // of log(norm) against log(h)
  double empirical_c = 0.0;
  [[nodiscard]] bool slope_in_band(double lo = -1.15, double hi = -0.85) const {
    return slope >= lo && slope <= hi;
  }
};

/// h0 = 1 / (2 delta (1 + R0)^delta).
double exterior_h0(double r0, double delta);

/// Norm of w 1_{|x|>R0} R(E -+ i eps) 1_{|x|>R0} w for every h (all must be
/// <= h0), with the log-log slope and max(norm h).
ExteriorReport exterior_scan(const SignedMeasure& m, double energy, double eps, double delta,
                             const std::vector<double>& hs, int sign = 1, const CheckSetup& setup = {},
                             int workers = 1);

struct ScalarInequalityReport {
  bool pass = false;
  std::size_t points = 0;
  double min_positive = 0.0;  // smallest value on x > 0
  double value_at_zero = 0.0;
  double value_at_two = 0.0;
};

/// e^x - 1 - x e^{x/2} = e^{x/2}(2 sinh(x/2) - x) >= 0 on a log grid in [0, 50].
double scalar_gap(double x);
ScalarInequalityReport scalar_inequality_check();

}  // namespace measchrod
