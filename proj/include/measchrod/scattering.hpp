#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

#include "measchrod/measure.hpp"

namespace measchrod {

using cplx = std::complex<double>;

/// Cauchy data (u, u') at a point.
struct CauchyData {
  cplx u;
  cplx du;
};

/// 2x2 map of Cauchy data, [[a, b], [c, d]].
struct TransferMatrix {
  cplx a{1.0}, b{0.0}, c{0.0}, d{1.0};

  [[nodiscard]] cplx det() const { return a * d - b * c; }
  [[nodiscard]] TransferMatrix inverse() const { return {d, -b, -c, a}; }  // unimodular
  [[nodiscard]] CauchyData operator()(const CauchyData& s) const {
    return {a * s.u + b * s.du, c * s.u + d * s.du};
  }
  friend TransferMatrix operator*(const TransferMatrix& l, const TransferMatrix& r) {
    return {l.a * r.a + l.b * r.c, l.a * r.b + l.b * r.d, l.c * r.a + l.d * r.c,
            l.c * r.b + l.d * r.d};
  }
  friend TransferMatrix operator+(const TransferMatrix& l, const TransferMatrix& r) {
    return {l.a + r.a, l.b + r.b, l.c + r.c, l.d + r.d};
  }
};

/// Transfer matrix together with its derivative in lambda.
struct TransferJet {
  TransferMatrix value;
  TransferMatrix derivative{0.0, 0.0, 0.0, 0.0};

  friend TransferJet operator*(const TransferJet& l, const TransferJet& r) {
    return {l.value * r.value, l.derivative * r.value + l.value * r.derivative};
  }
  [[nodiscard]] TransferJet inverse() const { return {value.inverse(), derivative.inverse()}; }
};

/// Jump across a point mass of weight c: (u, u') -> (u, u' + c u).
TransferMatrix atom_transfer(cplx lambda, double weight);

/// Free propagation of -u'' = lambda^2 u over a length `length` (closed form).
TransferJet free_transfer(cplx lambda, double length);

/// Propagation of -u'' + rho u = lambda^2 u across [x0, x1], with
/// rho(x) = cubic(x - base), by adaptive Dormand-Prince integration of the
/// fundamental matrix and its lambda-derivative (local tolerance 1e-10).
TransferJet density_transfer(cplx lambda, const Cubic& cubic, double base, double x0, double x1);

/// Raised when adaptive integration cannot meet its tolerance.
class StepUnderflow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Jost solutions sampled on nodes: f_-(x) = e^{-i lambda x} left of the
/// support, f_+(x) = e^{i lambda x} right of it. Derivatives at atoms are
/// the average of the one-sided limits.
struct JostPair {
  cplx lambda;
  std::vector<double> nodes;
  std::vector<cplx> minus, minus_prime;
  std::vector<cplx> plus, plus_prime;
  /// f_- f_+' - f_-' f_+ evaluated right of the support.
  cplx wronskian;

  /// Wronskian evaluated from the samples at node i (one-sided derivatives
  /// agree in the Wronskian, so averaged ones do too).
  [[nodiscard]] cplx wronskian_at(std::size_t i) const {
    return minus[i] * plus_prime[i] - minus_prime[i] * plus[i];
  }
};

/// Cached ordering of atoms and density pieces of a measure for repeated
/// propagation at many spectral parameters.
class Scatterer {
 public:
  explicit Scatterer(SignedMeasure m);

  [[nodiscard]] const SignedMeasure& measure() const { return m_; }
  /// Left/right ends of the propagation window (outside: V = 0).
  [[nodiscard]] double left() const { return left_; }
  [[nodiscard]] double right() const { return right_; }

  /// Map from left-limit data at x0 to left-limit data at x1 (x0 <= x1):
  /// atoms in [x0, x1) are applied.
  [[nodiscard]] TransferJet transfer(cplx lambda, double x0, double x1) const;

  /// W(lambda) and dW/dlambda.
  [[nodiscard]] std::pair<cplx, cplx> wronskian_jet(cplx lambda) const;
  [[nodiscard]] cplx wronskian(cplx lambda) const { return wronskian_jet(lambda).first; }

  [[nodiscard]] JostPair jost(cplx lambda, const std::vector<double>& nodes) const;

  /// Weight of an atom located exactly at x, or 0.
  [[nodiscard]] double atom_weight_at(double x) const;

 private:
  struct Segment {
    double x0, x1;
    int piece;  // density piece index, or -1 for a free gap
  };
  SignedMeasure m_;
  std::vector<Segment> segments_;  // tiles [left_, right_]
  double left_ = 0.0;
  double right_ = 0.0;
};

JostPair jost(const SignedMeasure& m, cplx lambda, const std::vector<double>& nodes);

/// W(lambda) = f_- f_+' - f_-' f_+, so that W = 2 i lambda for V = 0.
cplx wronskian(const SignedMeasure& m, cplx lambda);

/// Samples of G(x, y; lambda) = f_-(min) f_+(max) / W(lambda). The resolvent
/// (H - lambda^2)^{-1} has kernel -G.
struct GreenKernel {
  cplx lambda;
  std::vector<double> nodes;
  std::vector<cplx> values;  // row-major n x n

  [[nodiscard]] cplx operator()(std::size_t i, std::size_t j) const {
    return values[i * nodes.size() + j];
  }
};

/// Raised when lambda is too close to a zero of the Wronskian.
class PoleProximity : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

GreenKernel green_kernel(const SignedMeasure& m, cplx lambda, const std::vector<double>& nodes);

/// Axis-aligned rectangle in the lambda plane.
struct Rect {
  double re_lo, re_hi, im_lo, im_hi;

  [[nodiscard]] bool contains(cplx z, double margin = 0.0) const {
    return z.real() >= re_lo - margin && z.real() <= re_hi + margin && z.imag() >= im_lo - margin &&
           z.imag() <= im_hi + margin;
  }
};

struct Resonance {
  cplx lambda;
  int multiplicity = 1;
  double newton_residual = 0.0;
  /// Zero in the open upper half-plane: lambda^2 is a negative eigenvalue.
  bool eigenvalue = false;
};

/// Number of zeros of W inside `rect` (argument principle, with W'/W from
/// the variational equations). Throws ContourTooClose when the contour
/// passes within 1e-6 of a zero.
class ContourTooClose : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
int winding_number(const Scatterer& s, const Rect& rect);

/// All zeros of W in `rect`, Newton-refined to |W| <= 1e-8 (1 + |lambda|).
/// The rectangle must keep a 1e-3 margin from lambda = 0.
std::vector<Resonance> find_resonances(const SignedMeasure& m, const Rect& rect);
std::vector<Resonance> find_resonances(const Scatterer& s, const Rect& rect);

enum class WeightMode { Cutoff, Polynomial };
enum class NormTarget { L2, H1, Graph };

struct CutoffNormOptions {
  WeightMode weight = WeightMode::Cutoff;
  NormTarget target = NormTarget::L2;
  double delta = 1.0;           // polynomial weight exponent (|x|+1)^{-(1+delta)/2}
  double resolution = 0.0;      // 0: min(0.02, 0.25/|lambda|)
  double cutoff_margin = 1.0;   // chi = 1 on [a - margin, b + margin]
  double weight_half_width = 0.0;  // polynomial mode box; 0: R0 + 20
  double rel_tol = 1e-6;
};

/// Largest singular value of the weighted, quadrature-discretized kernel of
/// chi (H - lambda^2)^{-1} chi into the chosen target norm.
double cutoff_resolvent_norm(const SignedMeasure& m, cplx lambda, const CutoffNormOptions& opt = {});
double cutoff_resolvent_norm(const Scatterer& s, cplx lambda, const CutoffNormOptions& opt = {});

struct StripSample {
  double re = 0.0;
  double im = 0.0;
  double norm = 0.0;
  double scaled = 0.0;  // norm * |Re lambda|^{1-k}
};

struct StripReport {
  double lambda0 = 0.0;
  double lambda_max = 0.0;
  double eps0 = 0.0;
  int k = 0;
  std::vector<Resonance> zeros;  // zeros found inside the strip (violations)
  std::vector<StripSample> samples;
  double empirical_constant = 0.0;
};

/// Resonance search over [lambda0, lambda_max] x [-eps0, 0] plus the sampled
/// sup of |chi R chi|_{L2 -> H^k} |Re lambda|^{1-k}. Sample abscissae are
/// lambda0 and the multiples of `step` inside the range.
StripReport strip_scan(const SignedMeasure& m, double lambda0, double lambda_max, double eps0,
                       double step, int k = 0, int workers = 1);

}  // namespace measchrod
