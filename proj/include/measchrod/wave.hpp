#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "measchrod/fem.hpp"
#include "measchrod/measure.hpp"
#include "measchrod/scattering.hpp"

namespace measchrod {

/// Bounded solution of H u = 0 (h = 1), if one exists. The stored solution
/// equals `left_value` left of the support and `right_value` right of it,
/// scaled so that left_value^2 + right_value^2 = 1. With that scaling the
/// long-time limit of the wave with data (0, w1) is u0 <u0, w1>.
struct ZeroResonanceState {
  bool exists = false;
  /// u' right of the support for the solution equal to 1 left of it.
  double slope = 0.0;
  double left_value = 0.0;
  double right_value = 0.0;
  /// Relative residual of the transfer-matrix construction (|slope| / scale).
  double residual = 0.0;

  /// u0(x) (zero when the state does not exist).
  [[nodiscard]] double operator()(double x) const;
  /// Nodal interpolant on a grid.
  [[nodiscard]] H1Function sample(const GridPtr& grid) const;

  std::optional<Scatterer> scatterer;
  double scale = 1.0;
};

/// Propagates u = 1 from the left at lambda = 0; a state exists iff the
/// outgoing slope vanishes (to 1e-8 relative).
ZeroResonanceState zero_resonance_state(const SignedMeasure& m);

struct WaveState {
  double t = 0.0;
  H1Function w;           // real values on the full grid
  std::vector<double> v;  // nodal values of dw/dt on the full grid
};

struct WaveRun {
  GridPtr grid;
  double dt = 0.0;
  double stability_limit = 0.0;
  double box = 0.0;
  double data_radius = 0.0;
  int negative_modes = 0;
  bool projected = false;
  /// max |E_n - E_0| / scale for the conserved discrete energy of the scheme.
  double energy_drift = 0.0;
  std::vector<WaveState> states;
};

/// Velocity Verlet for M w'' = -A w on the Dirichlet box with
/// A = stiffness + potential (h = 1). Interior-node vectors throughout.
class WaveSolver {
 public:
  /// dt = 0 picks half the stability limit 2 / sqrt(lambda_max).
  WaveSolver(const SignedMeasure& m, GridPtr grid, double dt = 0.0);

  [[nodiscard]] const GridPtr& grid() const { return grid_; }
  [[nodiscard]] double dt() const { return dt_; }
  [[nodiscard]] double stability_limit() const { return limit_; }
  [[nodiscard]] std::size_t size() const { return a_.size(); }
  [[nodiscard]] int negative_modes() const { return static_cast<int>(modes_.size()); }

  /// Orthogonal projection (in the mass inner product) onto the span of the
  /// eigenvectors with nonnegative eigenvalue.
  [[nodiscard]] std::vector<double> project_nonneg(std::vector<double> x) const;

  /// 1/2 v'Mv + 1/2 w'Aw - dt^2/8 a'Ma with a = -M^{-1}Aw; exactly
  /// conserved by the scheme.
  [[nodiscard]] double discrete_energy(const std::vector<double>& w, const std::vector<double>& v) const;

  /// Steps from (w, v) at time t0 over a duration T (negative T runs
  /// backwards), recording a state every `sample_interval`. The step is
  /// shrunk so that T is a whole number of steps.
  WaveRun run(std::vector<double> w, std::vector<double> v, double t0, double T,
              double sample_interval, bool project) const;

  /// Interior nodal values of a full-grid function and back.
  [[nodiscard]] std::vector<double> restrict_interior(const std::function<double(double)>& f) const;
  [[nodiscard]] H1Function extend(const std::vector<double>& interior) const;

 private:
  WaveSolver(const DiscreteOperator& op, double dt);
  void accelerate(const std::vector<double>& w, std::vector<double>& a) const;

  GridPtr grid_;
  SymTridiag a_;
  SymTridiag m_;
  TridiagCholesky chol_;
  double dt_ = 0.0;
  double limit_ = 0.0;
  std::vector<std::vector<double>> modes_;  // M-orthonormal negative eigenvectors
};

struct WaveOptions {
  double resolution = 0.025;
  double dt = 0.0;            // 0: half the stability limit
  double box = 0.0;           // half-width; 0: R + T + 2
  double sample_interval = 0.1;
  bool project_nonneg = true;
};

/// Wave evolution from (w0, w1) over [0, T]. The data radius R is the
/// largest |x| where either datum is nonzero on the grid; the box must
/// satisfy R < box - T so the walls are never reached.
WaveRun evolve(const SignedMeasure& m, const std::function<double(double)>& w0,
               const std::function<double(double)>& w1, double T, const WaveOptions& options = {});

struct EnergyTrace {
  double r1 = 0.0;
  std::vector<double> t;
  std::vector<double> energy;
};

/// |w(t) - w_inf|^2_{H1(-R1,R1)} + |dw/dt|^2_{L2(-R1,R1)}, exact for the
/// piecewise-linear states. An empty w_inf means zero.
EnergyTrace local_energy_trace(const std::vector<WaveState>& states, double r1,
                               const std::function<double(double)>& w_inf = {});

/// H1(-R1, R1) norm of w - w_inf for a single state (no velocity term).
double local_h1_distance(const WaveState& state, double r1, const std::function<double(double)>& w_inf);

struct DecayFit {
  double rate = 0.0;       // c in energy ~ C exp(-c t)
  double prefactor = 0.0;  // C
  double r_squared = 0.0;
  double t_start = 0.0;
  double t_end = 0.0;
  std::size_t points = 0;
  [[nodiscard]] bool decays(double min_r_squared = 0.9) const {
    return rate > 0.0 && r_squared >= min_r_squared;
  }
};

/// Least squares of log(energy) against t over samples in [t_start, t_end].
DecayFit fit_decay(const EnergyTrace& trace, double t_start, double t_end);

struct LedOptions {
  WaveOptions wave;
  double fit_start = 0.0;  // 0: 2 (R + R1), R the data/potential radius
  double fit_end = 0.0;    // 0: T
  Rect resonance_rect{-10.0, 10.0, -3.0, -0.02};
  bool cross_check = true;
};

struct LedReport {
  ZeroResonanceState zero_resonance;
  /// int u0 w1 (the limit is u0 times this).
  double limit_coefficient = 0.0;
  WaveRun run;
  EnergyTrace trace;
  DecayFit fit;
  /// |w(T) - w_inf|_{H1(-R1,R1)}.
  double limit_error = 0.0;
  std::optional<Resonance> slowest;
  /// c / |Im lambda_slowest| (2 for a pure resonance mode).
  double rate_ratio = 0.0;
  [[nodiscard]] bool rate_in_band(double lo = 1.5, double hi = 2.5) const {
    return slowest.has_value() && rate_ratio >= lo && rate_ratio <= hi;
  }
};

/// Evolves, traces the local energy against w_inf, fits the decay rate and
/// compares it with the slowest resonance in `resonance_rect`.
LedReport led_experiment(const SignedMeasure& m, const std::function<double(double)>& w0,
                         const std::function<double(double)>& w1, double r1, double T,
                         const LedOptions& options = {});

}  // namespace measchrod
