#include "measchrod/carleman.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <cstdio>
#include <limits>
#include <mutex>
#include <tuple>

#include "measchrod/krylov.hpp"
#include "measchrod/parallel.hpp"
#include "measchrod/quadrature.hpp"

namespace measchrod {

namespace {

double log_sum_exp(std::initializer_list<double> xs) {
  const double mx = std::max(xs);
  double s = 0.0;
  for (double x : xs) s += std::exp(x - mx);
  return mx + std::log(s);
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw InvalidInput(std::string(what) + " must be positive");
}

double log_c_of(double tv, double e, double h, double c1) {
  const double lh = std::log(h);
  const double t1 = c1 + std::log(4.0) - 2.0 * lh;
  const double t2 = std::log(2.0) - lh;
  const double t3 = c1 + 2.0 * std::log(2.0 + 2.0 * e + tv * tv / (h * h)) - std::log(e) - 2.0 * lh;
  return c1 + log_sum_exp({t1, t2, t3});
}

// (|x| + 1)^{p}
double poly_weight(double x, double p) { return std::pow(std::abs(x) + 1.0, p); }

// Integral of wt(x) (a |u|^2 + b |u'|^2) over the grid for piecewise-linear u.
double weighted_energy(const Grid& g, std::span<const cplx> u, double p, double a, double b) {
  const auto& rule = gauss_legendre(4);
  double s = 0.0;
  auto piece = [&](double x0, cplx u0, cplx slope, double lo, double hi) {
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double x = mid + half * rule.nodes[q];
      const cplx ux = u0 + slope * (x - x0);
      s += half * rule.weights[q] * poly_weight(x, p) * (a * std::norm(ux) + b * std::norm(slope));
    }
  };
  for (std::size_t i = 0; i + 1 < g.size(); ++i) {
    const double x0 = g.nodes[i], x1 = g.nodes[i + 1];
    const cplx slope = (u[i + 1] - u[i]) / (x1 - x0);
    if (x0 < 0.0 && x1 > 0.0) {  // the weight has a kink at 0
      piece(x0, u[i], slope, x0, 0.0);
      piece(x0, u[i], slope, 0.0, x1);
    } else {
      piece(x0, u[i], slope, x0, x1);
    }
  }
  return s;
}

// Integral of (x + 1)^{-1-delta} e^{-2 kappa (x - L)} over [L, inf).
double exterior_tail_integral(double L, double delta, double kappa) {
  if (kappa <= 0.0) return std::pow(1.0 + L, -delta) / delta;
  return integrate_to_infinity(
      [&](double x) { return std::pow(x + 1.0, -1.0 - delta) * std::exp(-2.0 * kappa * (x - L)); }, L, 1e-14);
}

struct Resolved {
  double half_width;
  double resolution;
};

Resolved resolve_setup(const SignedMeasure& m, double energy, double h, const CheckSetup& s) {
  Resolved r{s.half_width, s.resolution};
  if (r.half_width <= 0.0) r.half_width = m.radius() + 10.0;
  if (r.resolution <= 0.0) r.resolution = std::min(0.02, 0.1 * h / std::sqrt(energy));
  if (r.half_width <= m.radius()) throw InvalidInput("box half width must exceed R0");
  return r;
}

}  // namespace

CarlemanConstants constants(double tv, double energy, double h, double delta) {
  require_positive(energy, "E");
  require_positive(h, "h");
  require_positive(delta, "delta");
  if (tv < 0.0) throw InvalidInput("total variation must be nonnegative");
  CarlemanConstants k;
  k.tv = tv;
  k.energy = energy;
  k.h = h;
  k.delta = delta;
  k.c1 = 2.0 / delta + tv / (std::sqrt(energy) * h);
  k.log_c = log_c_of(tv, energy, h, k.c1);
  k.c = std::exp(k.log_c);
  const double lh = std::log(h);
  k.log_c_literal = k.c1 + log_sum_exp({std::log(4.0) - 2.0 * lh, std::log(2.0) - lh,
                                        k.c1 + 2.0 * std::log(2.0 + 2.0 * energy + tv * tv / (h * h)) -
                                            std::log(energy) - 2.0 * lh});
  k.c_tilde = calibrate_c_tilde(energy, delta);
  k.log_simplified = k.c_tilde * (1.0 + tv) / h;
  return k;
}

double calibrate_c_tilde(double energy, double delta) {
  static std::mutex mu;
  static std::map<std::pair<double, double>, double> cache;
  {
    std::lock_guard lock(mu);
    if (auto it = cache.find({energy, delta}); it != cache.end()) return it->second;
  }
  double best = 0.0;
  std::vector<double> tvs{0.0};
  for (int i = 0; i <= 70; ++i) tvs.push_back(std::pow(10.0, -3.0 + 0.1 * i));
  for (double tv : tvs)
    for (int j = 0; j <= 100; ++j) {
      const double h = std::pow(10.0, -2.0 + 0.02 * j);
      const double c1 = 2.0 / delta + tv / (std::sqrt(energy) * h);
      best = std::max(best, h * log_c_of(tv, energy, h, c1) / (1.0 + tv));
    }
  best *= 1.001;
  std::lock_guard lock(mu);
  cache[{energy, delta}] = best;
  return best;
}

double polynomial_weight_cumulative(double x, double delta) {
  if (x <= 0.0) return std::pow(1.0 - x, -delta) / delta;
  return (2.0 - std::pow(1.0 + x, -delta)) / delta;
}

WeightProfile weight_eta(const SignedMeasure& m, double energy, double h, double delta, double eta,
                         const std::vector<double>& x) {
  require_positive(energy, "E");
  require_positive(h, "h");
  require_positive(delta, "delta");
  require_positive(eta, "eta");
  WeightProfile w{eta, energy, h, delta, x, {}, {}};
  const double scale = 1.0 / (std::sqrt(energy) * h);
  for (double xi : x) {
    const double e = scale * (m.density().cumulative_abs(xi) + smoothed_atoms_cumulative(m, eta, xi)) +
                     polynomial_weight_cumulative(xi, delta);
    w.exponent.push_back(e);
    w.values.push_back(std::exp(e));
  }
  return w;
}

CarlemanReport carleman_check(const SignedMeasure& m, double energy, double eps, double h, double delta,
                              int sign, const std::function<cplx(double)>& f, const CheckSetup& setup) {
  if (!(eps >= 0.0 && eps <= 1.0)) throw InvalidInput("eps must lie in [0, 1]");
  if (sign != 1 && sign != -1) throw InvalidInput("sign must be +1 or -1");
  const auto rs = resolve_setup(m, energy, h, setup);
  CarlemanReport rep;
  rep.energy = energy;
  rep.eps = eps;
  rep.h = h;
  rep.delta = delta;
  rep.sign = sign;
  rep.resolution = rs.resolution;
  rep.constants = constants(total_variation(m), energy, h, delta);

  auto grid = std::make_shared<const Grid>(build_grid(m, rs.half_width, rs.resolution));
  const DiscreteOperator op(m, h, grid);
  const H1Function fi = interpolate(grid, f);
  const double edge = std::max(std::abs(fi.values.front()), std::abs(fi.values.back()));
  if (edge > 1e-12 * std::max(1.0, fi.sup_norm())) throw InvalidInput("f must vanish at the box walls");

  if (eps == 0.0 && setup.boundary == Boundary::Dirichlet) {
    const int near = count_eigenvalues_below(op.interior_operator(), op.interior_mass(), energy + 1e-4) -
                     count_eigenvalues_below(op.interior_operator(), op.interior_mass(), energy - 1e-4);
    if (near > 0) {
      rep.skipped = true;
      rep.note = "E within 1e-4 of a Dirichlet eigenvalue of the box";
      return rep;
    }
  }

  // (P - E + i sign eps) u = f  <=>  (A - z M) u = M f, z = E - i sign eps
  const cplx z(energy, -sign * eps);
  const H1Function u = apply_resolvent(op, z, fi, setup.boundary, -sign);
  const Grid& g = *grid;
  rep.lhs = weighted_energy(g, u.values, -1.0 - delta, energy, h * h);
  if (setup.boundary == Boundary::Outgoing) {
    const ShiftedSystem sys(op, z, Boundary::Outgoing, -sign);
    const cplx k = sys.wavenumber();
    const double flux = energy + h * h * std::norm(k);
    const double tail = exterior_tail_integral(g.half_width(), delta, k.imag());
    rep.lhs += flux * tail * (std::norm(u.values.front()) + std::norm(u.values.back()));
  }
  rep.rhs_integral = weighted_energy(g, fi.values, 1.0 + delta, 1.0, 0.0);
  if (rep.rhs_integral <= 0.0) throw InvalidInput("f must be nonzero");
  rep.log_rhs = rep.constants.log_c + std::log(rep.rhs_integral);
  const double log_ratio = std::log(rep.lhs) - rep.log_rhs;
  rep.ratio = std::exp(log_ratio);
  rep.log10_ratio = log_ratio / std::log(10.0);
  return rep;
}

namespace {

// Largest singular value of D R D in the mass inner product, where D is the
// nodal multiplier `weight`.
SingularValueResult weighted_resolvent_norm(const DiscreteOperator& op, cplx z, Boundary boundary, int side,
                                            const std::function<double(double)>& weight) {
  const ShiftedSystem sys(op, z, boundary, side);
  const std::size_t n = sys.size();
  const std::size_t first = sys.first_node();
  const TridiagCholesky chol(sys.active_mass());
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = weight(op.grid()->nodes[first + i]);
  std::vector<cplx> tmp(n);
  // B = L^T D K^{-1} M D L^{-T};  B^H = L^{-1} D M K^{-H} D L
  auto apply = [&](std::span<const cplx> x, std::span<cplx> y) {
    std::copy(x.begin(), x.end(), y.begin());
    chol.solve_lt(y);
    for (std::size_t i = 0; i < n; ++i) y[i] *= d[i];
    sys.apply_mass(y, tmp);
    sys.solve(tmp);
    for (std::size_t i = 0; i < n; ++i) y[i] = d[i] * tmp[i];
    chol.apply_lt(y);
  };
  auto adjoint = [&](std::span<const cplx> x, std::span<cplx> y) {
    std::copy(x.begin(), x.end(), y.begin());
    chol.apply_l(y);
    for (std::size_t i = 0; i < n; ++i) y[i] *= d[i];
    sys.solve_adjoint(y);
    sys.apply_mass(y, tmp);
    for (std::size_t i = 0; i < n; ++i) y[i] = d[i] * tmp[i];
    chol.solve_l(y);
  };
  return largest_singular_value(n, n, apply, adjoint, 1e-8, 800);
}

}  // namespace

ResolventBoundReport resolvent_bound_check(const SignedMeasure& m, double energy, double eps, double h,
                                           double delta, int sign, const CheckSetup& setup) {
  if (!(eps > 0.0 && eps <= 1.0)) throw InvalidInput("eps must lie in (0, 1]");
  if (sign != 1 && sign != -1) throw InvalidInput("sign must be +1 or -1");
  const auto rs = resolve_setup(m, energy, h, setup);
  auto grid = std::make_shared<const Grid>(build_grid(m, rs.half_width, rs.resolution));
  const DiscreteOperator op(m, h, grid);
  const auto sv = weighted_resolvent_norm(op, cplx(energy, -sign * eps), setup.boundary, -sign,
                                          [&](double x) { return poly_weight(x, -(1.0 + delta) / 2.0); });
  ResolventBoundReport rep;
  rep.energy = energy;
  rep.eps = eps;
  rep.h = h;
  rep.delta = delta;
  rep.sign = sign;
  rep.measured_norm = sv.value;
  rep.converged = sv.converged;
  rep.log_paper_bound = 0.5 * (constants(total_variation(m), energy, h, delta).log_c - std::log(energy));
  rep.paper_bound = std::exp(rep.log_paper_bound);
  rep.ratio = std::exp(std::log(sv.value) - rep.log_paper_bound);
  return rep;
}

namespace {

std::pair<double, double> least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double den = n * sxx - sx * sx;
  if (x.size() < 2 || den == 0.0) return {0.0, n > 0 ? sy / n : 0.0};
  const double slope = (n * sxy - sx * sy) / den;
  return {slope, (sy - slope * sx) / n};
}

}  // namespace

HScanReport resolvent_h_scan(const SignedMeasure& m, double energy, double eps, double delta,
                             const std::vector<double>& hs, const std::function<double(double)>& energy_of_h,
                             int workers) {
  if (hs.empty()) throw InvalidInput("h grid empty");
  HScanReport rep;
  rep.h = hs;
  rep.energy.resize(hs.size());
  rep.norm.resize(hs.size());
  parallel_for(hs.size(), workers, [&](std::size_t i) {
    const double e = energy_of_h ? energy_of_h(hs[i]) : energy;
    rep.energy[i] = e;
    rep.norm[i] = resolvent_bound_check(m, e, eps, hs[i], delta).measured_norm;
  });
  std::vector<double> x, y;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    x.push_back(1.0 / hs[i]);
    y.push_back(std::log(rep.norm[i]));
  }
  std::tie(rep.slope, rep.intercept) = least_squares(x, y);
  rep.envelope_slope = calibrate_c_tilde(rep.energy.front(), delta) * (1.0 + total_variation(m));
  return rep;
}

double exterior_h0(double r0, double delta) { return 1.0 / (2.0 * delta * std::pow(1.0 + r0, delta)); }

ExteriorReport exterior_scan(const SignedMeasure& m, double energy, double eps, double delta,
                             const std::vector<double>& hs, int sign, const CheckSetup& setup, int workers) {
  require_positive(energy, "E");
  require_positive(delta, "delta");
  if (!(eps > 0.0 && eps <= 1.0)) throw InvalidInput("eps must lie in (0, 1]");
  if (hs.empty()) throw InvalidInput("h grid empty");
  ExteriorReport rep;
  rep.r0 = m.radius();
  rep.h0 = exterior_h0(rep.r0, delta);
  for (double h : hs) {
    require_positive(h, "h");
    if (h > rep.h0 * (1.0 + 1e-12)) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "h exceeds h₀ = %g", rep.h0);
      throw InvalidInput(buf);
    }
  }
  rep.h = hs;
  rep.norm.resize(hs.size());
  parallel_for(hs.size(), workers, [&](std::size_t i) {
    const double h = hs[i];
    const auto rs = resolve_setup(m, energy, h, setup);
    auto grid = std::make_shared<const Grid>(build_grid(m, rs.half_width, rs.resolution));
    const DiscreteOperator op(m, h, grid);
    const double r0 = rep.r0;
    rep.norm[i] = weighted_resolvent_norm(op, cplx(energy, -sign * eps), setup.boundary, -sign, [&](double x) {
                    return std::abs(x) > r0 ? poly_weight(x, -(1.0 + delta) / 2.0) : 0.0;
                  }).value;
  });
  std::vector<double> x, y;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    x.push_back(std::log(hs[i]));
    y.push_back(std::log(rep.norm[i]));
    rep.empirical_c = std::max(rep.empirical_c, rep.norm[i] * hs[i]);
  }
  rep.slope = least_squares(x, y).first;
  return rep;
}

double scalar_gap(double x) {
  const double y = 0.5 * x;
  double core;  // 2 sinh(y) - 2y
  if (std::abs(y) < 1e-2) {
    const double y2 = y * y;
    core = 2.0 * y * y2 * (1.0 / 6.0 + y2 * (1.0 / 120.0 + y2 / 5040.0));
  } else {
    core = 2.0 * std::sinh(y) - x;
  }
  return std::exp(y) * core;
}

ScalarInequalityReport scalar_inequality_check() {
  ScalarInequalityReport rep;
  rep.value_at_zero = scalar_gap(0.0);
  rep.value_at_two = scalar_gap(2.0);
  rep.min_positive = std::numeric_limits<double>::infinity();
  bool ok = rep.value_at_zero == 0.0;
  rep.points = 1;
  // log grid 1e-8 .. 50
  const int n = 2000;
  const double lo = std::log(1e-8), hi = std::log(50.0);
  for (int i = 0; i <= n; ++i) {
    const double x = std::exp(lo + (hi - lo) * i / n);
    const double g = scalar_gap(x);
    ok = ok && g > 0.0;
    rep.min_positive = std::min(rep.min_positive, g);
    ++rep.points;
  }
  rep.pass = ok;
  return rep;
}

}  // namespace measchrod
