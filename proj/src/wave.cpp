#include "measchrod/wave.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace measchrod {

namespace {

double dot(const std::vector<double>& x, const std::vector<double>& y) {
  return std::inner_product(x.begin(), x.end(), y.begin(), 0.0);
}

std::vector<double> times(const SymTridiag& t, const std::vector<double>& x) {
  std::vector<double> y(x.size());
  t.apply(std::span<const double>(x), std::span<double>(y));
  return y;
}

}  // namespace

double ZeroResonanceState::operator()(double x) const {
  if (!exists) return 0.0;
  const Scatterer& s = *scatterer;
  if (x <= s.left()) return left_value;
  if (x >= s.right()) return right_value;
  const CauchyData d = s.transfer(0.0, s.left(), x).value({1.0, 0.0});
  return scale * d.u.real();
}

H1Function ZeroResonanceState::sample(const GridPtr& grid) const {
  H1Function u{grid, std::vector<cplx>(grid->size())};
  for (std::size_t i = 0; i < grid->size(); ++i) u.values[i] = (*this)(grid->nodes[i]);
  return u;
}

ZeroResonanceState zero_resonance_state(const SignedMeasure& m) {
  ZeroResonanceState z;
  Scatterer s(m);
  // one unit past the support so that an atom at right() is included
  const double xr = s.right() + 1.0;
  const CauchyData d = s.transfer(0.0, s.left(), xr).value({1.0, 0.0});
  z.slope = d.du.real();
  const double right = d.u.real() - z.slope;
  z.residual = std::abs(z.slope) / (1.0 + std::abs(right));
  z.exists = z.residual <= 1e-8;
  if (!z.exists) return z;
  z.scale = 1.0 / std::hypot(1.0, right);
  z.left_value = z.scale;
  z.right_value = z.scale * right;
  z.scatterer.emplace(std::move(s));
  return z;
}

WaveSolver::WaveSolver(const SignedMeasure& m, GridPtr grid, double dt)
    : WaveSolver(assemble(m, 1.0, grid), dt) {}

WaveSolver::WaveSolver(const DiscreteOperator& op, double dt)
    : grid_(op.grid()), a_(op.interior_operator()), m_(op.interior_mass()), chol_(m_) {
  limit_ = 2.0 / std::sqrt(largest_eigenvalue(op));
  dt_ = dt > 0.0 ? dt : 0.5 * limit_;
  if (dt_ >= limit_)
    throw InvalidInput("dt = " + std::to_string(dt_) + " violates the stability limit " +
                       std::to_string(limit_));
  for (const Eigenpair& e : eigenpairs_below(op, 0.0)) {
    std::vector<double> x(size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = e.vector.values[i + 1].real();
    // two passes of mass-weighted Gram-Schmidt
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : modes_) {
        const double c = dot(q, times(m_, x));
        for (std::size_t i = 0; i < x.size(); ++i) x[i] -= c * q[i];
      }
      const double nrm = std::sqrt(dot(x, times(m_, x)));
      for (double& v : x) v /= nrm;
    }
    modes_.push_back(std::move(x));
  }
}

std::vector<double> WaveSolver::project_nonneg(std::vector<double> x) const {
  if (modes_.empty()) return x;
  const std::vector<double> mx = times(m_, x);
  for (const auto& q : modes_) {
    const double c = dot(q, mx);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] -= c * q[i];
  }
  return x;
}

void WaveSolver::accelerate(const std::vector<double>& w, std::vector<double>& a) const {
  a_.apply(std::span<const double>(w), std::span<double>(a));
  for (double& v : a) v = -v;
  chol_.solve(std::span<double>(a));
}

double WaveSolver::discrete_energy(const std::vector<double>& w, const std::vector<double>& v) const {
  std::vector<double> a(w.size());
  accelerate(w, a);
  return 0.5 * dot(v, times(m_, v)) + 0.5 * dot(w, times(a_, w)) -
         dt_ * dt_ / 8.0 * dot(a, times(m_, a));
}

std::vector<double> WaveSolver::restrict_interior(const std::function<double(double)>& f) const {
  std::vector<double> x(size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = f(grid_->nodes[i + 1]);
  return x;
}

H1Function WaveSolver::extend(const std::vector<double>& interior) const {
  H1Function u{grid_, std::vector<cplx>(grid_->size())};
  for (std::size_t i = 0; i < interior.size(); ++i) u.values[i + 1] = interior[i];
  return u;
}

WaveRun WaveSolver::run(std::vector<double> w, std::vector<double> v, double t0, double T,
                        double sample_interval, bool project) const {
  if (w.size() != size() || v.size() != size()) throw InvalidInput("state size does not match the grid");
  const double span = std::abs(T);
  const auto steps = static_cast<long>(std::ceil(span / dt_ - 1e-9));
  const double h = steps > 0 ? T / static_cast<double>(steps) : 0.0;
  const long every = std::max(1L, std::lround(sample_interval / std::max(std::abs(h), 1e-300)));

  WaveRun out;
  out.grid = grid_;
  out.dt = std::abs(h);
  out.stability_limit = limit_;
  out.box = grid_->half_width();
  out.negative_modes = negative_modes();
  out.projected = project;
  if (project) {
    w = project_nonneg(std::move(w));
    v = project_nonneg(std::move(v));
  }

  auto record = [&](double t) {
    WaveState s;
    s.t = t;
    s.w = extend(w);
    s.v.assign(grid_->size(), 0.0);
    std::copy(v.begin(), v.end(), s.v.begin() + 1);
    out.states.push_back(std::move(s));
  };

  // conserved quantity of the scheme with step h
  auto energy = [&](const std::vector<double>& a) {
    const double kin = 0.5 * dot(v, times(m_, v));
    const double pot = 0.5 * dot(w, times(a_, w));
    const double corr = h * h / 8.0 * dot(a, times(m_, a));
    return std::pair{kin + pot - corr, kin + std::abs(pot) + corr};
  };

  std::vector<double> a(size()), a_next(size());
  accelerate(w, a);
  const auto [e0, s0] = energy(a);
  double scale = s0;
  double drift = 0.0;
  record(t0);
  for (long n = 1; n <= steps; ++n) {
    for (std::size_t i = 0; i < w.size(); ++i) w[i] += h * v[i] + 0.5 * h * h * a[i];
    accelerate(w, a_next);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += 0.5 * h * (a[i] + a_next[i]);
    std::swap(a, a_next);
    const auto [e, s] = energy(a);
    scale = std::max(scale, s);
    drift = std::max(drift, std::abs(e - e0));
    if (n % every == 0 || n == steps) {
      if (project && negative_modes() > 0) {
        // removes the roundoff that the unstable modes would amplify
        w = project_nonneg(std::move(w));
        v = project_nonneg(std::move(v));
        accelerate(w, a);
      }
      record(t0 + h * static_cast<double>(n));
    }
  }
  out.energy_drift = scale > 0.0 ? drift / scale : 0.0;
  return out;
}

WaveRun evolve(const SignedMeasure& m, const std::function<double(double)>& w0,
               const std::function<double(double)>& w1, double T, const WaveOptions& options) {
  if (!(T >= 0.0)) throw InvalidInput("T must be nonnegative");
  if (!(options.resolution > 0.0)) throw InvalidInput("resolution must be positive");
  // data radius on a fine probe grid
  const double probe_half = options.box > 0.0 ? options.box : m.radius() + T + 1e3;
  double radius = 0.0;
  {
    const double step = std::min(options.resolution, 0.01);
    const auto n = static_cast<long>(std::ceil(2.0 * probe_half / step));
    for (long i = 0; i <= n; ++i) {
      const double x = -probe_half + 2.0 * probe_half * static_cast<double>(i) / static_cast<double>(n);
      if (w0(x) != 0.0 || w1(x) != 0.0) radius = std::max(radius, std::abs(x));
    }
  }
  // whole number of cells so that nodes sit on multiples of the resolution
  const double box = options.box > 0.0
                         ? options.box
                         : options.resolution * std::ceil((radius + T + 2.0) / options.resolution);
  if (!(radius < box - T))
    throw InvalidInput("data radius " + std::to_string(radius) + " must be below box - T = " +
                       std::to_string(box - T));
  if (m.radius() >= box) throw InvalidInput("potential support exceeds the box");
  auto grid = std::make_shared<const Grid>(build_grid(m, box, options.resolution));
  const WaveSolver solver(m, grid, options.dt);
  WaveRun run = solver.run(solver.restrict_interior(w0), solver.restrict_interior(w1), 0.0, T,
                           options.sample_interval, options.project_nonneg);
  run.data_radius = radius;
  return run;
}

namespace {

// Exact integrals over [-r1, r1] of |f|^2 and |f'|^2 for the piecewise-linear
// f with nodal values `f` on `nodes`.
std::pair<double, double> window_norms(const std::vector<double>& nodes, const std::vector<double>& f,
                                       double r1) {
  double l2 = 0.0, d2 = 0.0;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const double x0 = nodes[i], x1 = nodes[i + 1];
    const double p = std::max(x0, -r1), q = std::min(x1, r1);
    if (q <= p) continue;
    const double slope = (f[i + 1] - f[i]) / (x1 - x0);
    const double fp = f[i] + slope * (p - x0);
    const double fq = f[i] + slope * (q - x0);
    l2 += (q - p) * (fp * fp + fp * fq + fq * fq) / 3.0;
    d2 += (q - p) * slope * slope;
  }
  return {l2, d2};
}

std::vector<double> nodal(const GridPtr& grid, const std::function<double(double)>& f) {
  std::vector<double> out(grid->size(), 0.0);
  if (f)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(grid->nodes[i]);
  return out;
}

std::vector<double> difference(const WaveState& s, const std::vector<double>& w_inf) {
  std::vector<double> d(w_inf.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = s.w.values[i].real() - w_inf[i];
  return d;
}

}  // namespace

double local_h1_distance(const WaveState& state, double r1, const std::function<double(double)>& w_inf) {
  const auto [l2, d2] =
      window_norms(state.w.grid->nodes, difference(state, nodal(state.w.grid, w_inf)), r1);
  return std::sqrt(l2 + d2);
}

EnergyTrace local_energy_trace(const std::vector<WaveState>& states, double r1,
                               const std::function<double(double)>& w_inf) {
  if (!(r1 > 0.0)) throw InvalidInput("R1 must be positive");
  EnergyTrace tr;
  tr.r1 = r1;
  GridPtr grid;
  std::vector<double> limit;
  for (const WaveState& s : states) {
    if (r1 >= s.w.grid->half_width()) throw InvalidInput("R1 must be inside the box");
    if (s.w.grid != grid) {
      grid = s.w.grid;
      limit = nodal(grid, w_inf);
    }
    const auto [l2, d2] = window_norms(grid->nodes, difference(s, limit), r1);
    const double kin = window_norms(s.w.grid->nodes, s.v, r1).first;
    tr.t.push_back(s.t);
    tr.energy.push_back(l2 + d2 + kin);
  }
  return tr;
}

DecayFit fit_decay(const EnergyTrace& trace, double t_start, double t_end) {
  DecayFit f;
  f.t_start = t_start;
  f.t_end = t_end;
  std::vector<double> t, y;
  for (std::size_t i = 0; i < trace.t.size(); ++i) {
    if (trace.t[i] < t_start - 1e-12 || trace.t[i] > t_end + 1e-12) continue;
    if (!(trace.energy[i] > 0.0)) throw InvalidInput("nonpositive energy in the fit window");
    t.push_back(trace.t[i]);
    y.push_back(std::log(trace.energy[i]));
  }
  f.points = t.size();
  if (t.size() < 3) throw InvalidInput("fit window holds fewer than 3 samples");
  const double n = static_cast<double>(t.size());
  const double tm = std::accumulate(t.begin(), t.end(), 0.0) / n;
  const double ym = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double stt = 0.0, sty = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    stt += (t[i] - tm) * (t[i] - tm);
    sty += (t[i] - tm) * (y[i] - ym);
    syy += (y[i] - ym) * (y[i] - ym);
  }
  const double slope = sty / stt;
  f.rate = -slope;
  f.prefactor = std::exp(ym - slope * tm);
  f.r_squared = syy > 0.0 ? sty * sty / (stt * syy) : 1.0;
  return f;
}

LedReport led_experiment(const SignedMeasure& m, const std::function<double(double)>& w0,
                         const std::function<double(double)>& w1, double r1, double T,
                         const LedOptions& options) {
  LedReport rep;
  rep.zero_resonance = zero_resonance_state(m);
  rep.run = evolve(m, w0, w1, T, options.wave);
  const GridPtr& grid = rep.run.grid;

  std::function<double(double)> w_inf;
  if (rep.zero_resonance.exists) {
    // <u0, w1> in the mass inner product of the grid
    const H1Function u0 = rep.zero_resonance.sample(grid);
    const SymTridiag mass = assemble(m, 1.0, grid).matrices().mass;
    std::vector<double> u(grid->size()), w(grid->size());
    for (std::size_t i = 0; i < u.size(); ++i) {
      u[i] = u0.values[i].real();
      w[i] = w1(grid->nodes[i]);
    }
    rep.limit_coefficient = dot(u, times(mass, w));
    const ZeroResonanceState z = rep.zero_resonance;
    const double coef = rep.limit_coefficient;
    w_inf = [z, coef](double x) { return coef * z(x); };
  }
  rep.trace = local_energy_trace(rep.run.states, r1, w_inf);
  rep.limit_error = local_h1_distance(rep.run.states.back(), r1, w_inf);

  const double radius = std::max(rep.run.data_radius, m.radius());
  const double t0 = options.fit_start > 0.0 ? options.fit_start : 2.0 * (radius + r1);
  const double t1 = options.fit_end > 0.0 ? options.fit_end : T;
  rep.fit = fit_decay(rep.trace, t0, t1);

  if (options.cross_check) {
    for (const Resonance& r : find_resonances(m, options.resonance_rect)) {
      if (r.eigenvalue) continue;
      if (!rep.slowest || std::abs(r.lambda.imag()) < std::abs(rep.slowest->lambda.imag()))
        rep.slowest = r;
    }
    if (rep.slowest) rep.rate_ratio = rep.fit.rate / std::abs(rep.slowest->lambda.imag());
  }
  return rep;
}

}  // namespace measchrod
