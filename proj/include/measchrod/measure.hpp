#pragma once

#include <array>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace measchrod {

/// Raised when a measure, grid or operator input violates its contract.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Point mass `weight * delta_{position}`.
struct Atom {
  double position = 0.0;
  double weight = 0.0;
};

/// Closed interval [lo, hi].
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  [[nodiscard]] bool contains(double x) const { return lo <= x && x <= hi; }
  [[nodiscard]] double length() const { return hi - lo; }
};

/// Cubic coefficients of one density piece, in the local variable
/// t = x - breakpoint[k]: c0 + c1 t + c2 t^2 + c3 t^3.
using Cubic = std::array<double, 4>;

double eval_cubic(const Cubic& c, double t);
/// Antiderivative of `c` vanishing at t = 0.
double integrate_cubic(const Cubic& c, double t);
/// Exact integral of |c(t)| over [t0, t1] (splits at real roots).
double integrate_abs_cubic(const Cubic& c, double t0, double t1);

/// Piecewise cubic density, zero outside [breakpoints.front(), breakpoints.back()].
class PiecewiseDensity {
 public:
  PiecewiseDensity() = default;
  PiecewiseDensity(std::vector<double> breakpoints, std::vector<Cubic> coeffs);

  /// Constant density `value` on [lo, hi].
  static PiecewiseDensity constant(double lo, double hi, double value);

  [[nodiscard]] bool empty() const { return coeffs_.empty(); }
  [[nodiscard]] std::size_t pieces() const { return coeffs_.size(); }
  [[nodiscard]] const std::vector<double>& breakpoints() const { return breakpoints_; }
  [[nodiscard]] const std::vector<Cubic>& coeffs() const { return coeffs_; }

  /// Density value; at a breakpoint the right piece wins.
  [[nodiscard]] double operator()(double x) const;
  /// Index of the piece containing x (half-open [b_k, b_{k+1})), or -1.
  [[nodiscard]] int piece_index(double x) const;
  /// Integral of the density over (-inf, x].
  [[nodiscard]] double cumulative(double x) const;
  /// Integral of |density| over (-inf, x].
  [[nodiscard]] double cumulative_abs(double x) const;
  [[nodiscard]] double total_abs() const;

 private:
  std::vector<double> breakpoints_;
  std::vector<Cubic> coeffs_;
};

/// Finite signed Borel measure: sorted atoms plus a piecewise cubic density,
/// supported in a declared closed interval. Immutable after construction.
class SignedMeasure {
 public:
  SignedMeasure() = default;
  /// Atoms closer than kMergeDistance are merged; zero-weight atoms dropped.
  SignedMeasure(std::vector<Atom> atoms, PiecewiseDensity density, Interval support);

  static constexpr double kMergeDistance = 1e-12;

  /// Measure that is identically zero, with support [-r0, r0].
  static SignedMeasure zero(double r0 = 1.0);
  /// Sum of point masses, support is the tightest symmetric interval of
  /// half-width >= 1 containing them.
  static SignedMeasure point_masses(std::vector<Atom> atoms);

  [[nodiscard]] const std::vector<Atom>& atoms() const { return atoms_; }
  [[nodiscard]] const PiecewiseDensity& density() const { return density_; }
  [[nodiscard]] const Interval& support() const { return support_; }
  /// Smallest R0 with support contained in [-R0, R0].
  [[nodiscard]] double radius() const;

  /// New measure with this measure's atoms and density plus `other`'s;
  /// supports are joined. Densities must not overlap.
  [[nodiscard]] SignedMeasure plus(const SignedMeasure& other) const;

 private:
  std::vector<Atom> atoms_;
  PiecewiseDensity density_;
  Interval support_;
};

/// |V|(R): sum of |weights| plus the integral of |density|.
double total_variation(const SignedMeasure& m);
/// Total variation of the atomic part only.
double atomic_variation(const SignedMeasure& m);

enum class Side { Left, Right };

/// Right: m((-inf, x]).  Left: m((-inf, x)).
double cdf(const SignedMeasure& m, double x, Side side);

/// m((a, b]).
double mass(const SignedMeasure& m, double a, double b);

/// Lebesgue-Stieltjes integral of `phi` over (a, b] against m. Density
/// pieces are split at atoms and at `extra_breaks` and integrated with
/// composite Gauss-Legendre (exact for polynomial integrands up to degree 31).
double stieltjes(const SignedMeasure& m, const std::function<double(double)>& phi, double a,
                 double b, std::span<const double> extra_breaks = {});

/// Right-continuous function of locally bounded variation,
/// f^R(x) = base + derivative((anchor, x]) for x >= anchor (and the
/// mirrored formula to the left).
struct BVFunction {
  double base = 0.0;
  SignedMeasure derivative;
  double anchor = 0.0;

  /// The cumulative distribution of `m`, anchored far left with base 0.
  static BVFunction cdf_of(SignedMeasure m);
};

struct BVValue {
  double left = 0.0;
  double right = 0.0;
  double average = 0.0;
};

/// (f^L, f^R, f^A) at x.
BVValue eval_bv(const BVFunction& f, double x);

/// Gaussian smoothing of the atomic part:
/// pi^{-1/2} eta^{-1} sum_j |V_j| exp(-((x - x_j)/eta)^2).
double smoothed_atoms(const SignedMeasure& m, double eta, double x);
/// Integral of smoothed_atoms over (-inf, x], in closed form via erf.
double smoothed_atoms_cumulative(const SignedMeasure& m, double eta, double x);

/// Atoms at the left endpoints of the 2^level middle-thirds intervals on [0, 1],
/// each carrying mass * 2^{-level}.
SignedMeasure cantor_approx(int level, double mass);

}  // namespace measchrod
