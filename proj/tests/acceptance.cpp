// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "measchrod/carleman.hpp"
#include "measchrod/fem.hpp"
#include "measchrod/measure.hpp"
#include "measchrod/parallel.hpp"
#include "measchrod/scattering.hpp"
#include "measchrod/tridiag.hpp"
#include "measchrod/wave.hpp"
#include "test_support.hpp"

using namespace measchrod;
using measchrod::testing::atom_positions;
using measchrod::testing::piecewise_integral;
using measchrod::testing::random_test_measure;
using measchrod::testing::RandomPolynomial;

namespace {

const cplx I{0.0, 1.0};

struct Outcome {
  bool pass = true;
  std::string detail;
};

void note(std::string& detail, const char* fmt, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, fmt, args...);
  if (!detail.empty()) detail += "; ";
  detail += buf;
}

SignedMeasure delta(double x, double w) { return SignedMeasure::point_masses({{x, w}}); }
SignedMeasure two_deltas() { return SignedMeasure::point_masses({{0.0, 2.0}, {1.0, 2.0}}); }
SignedMeasure well_tophat() {
  return SignedMeasure({{0.0, -2.0}}, PiecewiseDensity::constant(-0.5, 0.5, 1.0), {-1.0, 1.0});
}
SignedMeasure cantor6() { return cantor_approx(6, 1.0); }

double bump(double x, double c, double r) {
  const double t = (x - c) / r;
  return std::abs(t) < 1.0 ? std::exp(-1.0 / (1.0 - t * t)) : 0.0;
}

// ---------------------------------------------------------------- 1

// max nodal error of the FEM outgoing resolvent column against -G(., y0)
double kernel_error(const SignedMeasure& m, cplx lam, double y0, double res) {
  std::vector<double> required{y0};
  for (const Atom& a : m.atoms()) required.push_back(a.position);
  for (double b : m.density().breakpoints()) required.push_back(b);
  auto grid = std::make_shared<const Grid>(build_grid(m.support(), 3.0, res, required));
  const DiscreteOperator op(m, 1.0, grid);
  const std::size_t n = grid->size();
  const std::size_t idx = *grid->find(y0);
  std::vector<cplx> e(n);
  e[idx] = 1.0;
  TridiagCholesky(op.matrices().mass).solve(std::span<cplx>(e));
  const auto u = apply_resolvent(op, lam * lam, H1Function{grid, e}, Boundary::Outgoing);
  const auto jp = jost(m, lam, grid->nodes);
  double err = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = std::min(i, idx), hi = std::max(i, idx);
    const cplx exact = -jp.minus[lo] * jp.plus[hi] / jp.wronskian;
    err = std::max(err, std::abs(u.values[i] - exact));
    scale = std::max(scale, std::abs(exact));
  }
  return err / scale;
}

Outcome criterion1() {
  Outcome o;
  const std::vector<std::pair<const char*, SignedMeasure>> cases{
      {"V=0", SignedMeasure::zero()}, {"2d0", delta(0.0, 2.0)}, {"-2d0+hat", well_tophat()}, {"Cantor6", cantor6()}};
  const cplx lam(1.4, 0.05);
  for (const auto& [name, m] : cases) {
    std::vector<double> errs;
    for (double res : {0.02, 0.01, 0.005}) errs.push_back(kernel_error(m, lam, -0.6, res));
    const double p1 = std::log2(errs[0] / errs[1]), p2 = std::log2(errs[1] / errs[2]);
    o.pass &= p1 >= 1.8 && p2 >= 1.8 && errs[2] < 1e-3;
    note(o.detail, "%s orders %.2f %.2f err %.1e", name, p1, p2, errs[2]);
  }
  return o;
}

// ---------------------------------------------------------------- 2

Outcome criterion2() {
  Outcome o;
  const auto attractive = delta(0.0, -2.0);
  const auto grid = std::make_shared<const Grid>(build_grid(attractive, 20.0, 0.01));
  const auto ev = eigenvalues_below(assemble(attractive, 1.0, grid), 0.0);
  const double e_err = ev.size() == 1 ? std::abs(ev[0] + 1.0) : 1.0;
  o.pass &= e_err < 1e-3;
  const auto up = find_resonances(attractive, Rect{-1, 1, 0.1, 3});
  const double up_err = up.size() == 1 ? std::abs(up[0].lambda - I) : 1.0;
  o.pass &= up_err < 1e-6;
  const auto down = find_resonances(delta(0.0, 2.0), Rect{-3, 3, -3, -0.01});
  const double down_err = down.size() == 1 ? std::abs(down[0].lambda + I) : 1.0;
  o.pass &= down_err < 1e-6;
  note(o.detail, "|E+1| %.1e, |zero-i| %.1e, |res+i| %.1e", e_err, up_err, down_err);
  return o;
}

// ---------------------------------------------------------------- 3, 4

struct Draw {
  std::size_t potential;
  double energy, eps, h, delta;
  int sign;
  double centre, width;
};

const std::vector<std::pair<const char*, SignedMeasure>>& suite_potentials() {
  static const std::vector<std::pair<const char*, SignedMeasure>> p{
      {"2d0", delta(0.0, 2.0)}, {"2d0+2d1", two_deltas()}, {"-2d0+hat", well_tophat()}, {"Cantor6", cantor6()}};
  return p;
}

std::vector<Draw> suite_draws() {
  std::mt19937 rng(20261019);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Draw> out;
  for (std::size_t p = 0; p < 4; ++p)
    for (int k = 0; k < 25; ++k) {
      Draw d;
      d.potential = p;
      d.energy = 0.5 + 1.5 * u(rng);
      d.eps = std::exp(std::log(1e-2) + u(rng) * std::log(50.0));
      d.h = std::exp(std::log(0.1) + u(rng) * std::log(10.0));
      d.delta = 0.5 + 1.5 * u(rng);
      d.sign = u(rng) < 0.5 ? 1 : -1;
      d.centre = -2.0 + 4.0 * u(rng);
      d.width = 0.2 + 0.8 * u(rng);
      out.push_back(d);
    }
  return out;
}

Outcome criterion3() {
  Outcome o;
  const auto draws = suite_draws();
  std::vector<CarlemanReport> r(draws.size());
  parallel_for(draws.size(), default_workers(), [&](std::size_t i) {
    const Draw& d = draws[i];
    r[i] = carleman_check(suite_potentials()[d.potential].second, d.energy, d.eps, d.h, d.delta, d.sign,
                          [&d](double x) { return cplx(std::exp(-std::pow((x - d.centre) / d.width, 2)), 0.0); });
  });
  int failures = 0;
  double worst = 0.0;
  for (const auto& x : r) {
    failures += x.pass() ? 0 : 1;
    worst = std::max(worst, x.ratio / x.tolerance());
  }
  o.pass = failures == 0;
  note(o.detail, "%zu tuples, %d failures, max ratio/tol %.2e", r.size(), failures, worst);
  return o;
}

Outcome criterion4() {
  Outcome o;
  const auto draws = suite_draws();
  std::vector<ResolventBoundReport> r(draws.size());
  parallel_for(draws.size(), default_workers(), [&](std::size_t i) {
    const Draw& d = draws[i];
    r[i] = resolvent_bound_check(suite_potentials()[d.potential].second, d.energy, d.eps, d.h, d.delta, d.sign);
  });
  int failures = 0;
  double worst = 0.0;
  for (const auto& x : r) {
    failures += x.pass() ? 0 : 1;
    worst = std::max(worst, x.ratio);
  }
  const auto scan = resolvent_h_scan(delta(0.0, 2.0), 1.0, 1e-3, 1.0, {1.0, 0.5, 0.25, 0.125}, {}, default_workers());
  o.pass = failures == 0 && scan.slope <= scan.envelope_slope;
  note(o.detail, "%zu checks, %d failures, max ratio %.2e; h-scan slope %.3f <= envelope %.3f", r.size(), failures,
       worst, scan.slope, scan.envelope_slope);
  return o;
}

// ---------------------------------------------------------------- 5

Outcome criterion5() {
  Outcome o;
  for (const auto& [name, m] : {std::pair{"2d0", delta(0.0, 2.0)}, std::pair{"2d0+2d1", two_deltas()}}) {
    const double h0 = exterior_h0(m.radius(), 1.0);
    const auto r = exterior_scan(m, 1.0, 1e-3, 1.0, {h0, h0 / 2, h0 / 4, h0 / 8}, 1, {}, default_workers());
    o.pass &= r.slope_in_band();
    note(o.detail, "%s slope %.3f (h0 %.3g)", name, r.slope, h0);
  }
  return o;
}

// ---------------------------------------------------------------- 6

Outcome criterion6() {
  Outcome o;
  for (const auto& [name, m] :
       {std::pair{"2d0", delta(0.0, 2.0)}, std::pair{"2d0+2d1", two_deltas()}, std::pair{"Cantor6", cantor6()}}) {
    const auto r = strip_scan(m, 0.5, 20.0, 0.3, 0.5, 0, default_workers());
    o.pass &= r.zeros.empty() && std::isfinite(r.empirical_constant) && r.empirical_constant > 0.0;
    note(o.detail, "%s zeros %zu, sup norm*|Re| %.3g", name, r.zeros.size(), r.empirical_constant);
  }
  return o;
}

// ---------------------------------------------------------------- 7

Outcome criterion7() {
  Outcome o;
  const auto zero_fn = [](double) { return 0.0; };
  LedOptions a;
  a.fit_start = 5.0;
  a.fit_end = 11.0;
  const auto r = led_experiment(delta(0.0, 2.0), [](double x) { return bump(x, 2.5, 1.0); }, zero_fn, 1.0, 12.0, a);
  const double gap = r.slowest ? -r.slowest->lambda.imag() : 0.0;
  const bool rate_ok = r.slowest && std::abs(r.fit.rate - 2.0 * gap) <= 0.25 * 2.0 * gap && r.fit.r_squared >= 0.9;
  note(o.detail, "2d0 rate %.3f vs 2|Im| %.3f, R^2 %.5f", r.fit.rate, 2.0 * gap, r.fit.r_squared);

  LedOptions b;
  b.cross_check = false;
  const auto tuned = SignedMeasure::point_masses({{0.0, 1.0}, {1.0, -0.5}});
  const auto z = led_experiment(tuned, zero_fn, [](double x) { return bump(x, 0.5, 1.0); }, 1.0, 80.0, b);
  const bool limit_ok = z.zero_resonance.exists && z.limit_error < 1e-2;
  note(o.detail, "tuned limit H1 error %.2e at T = 80", z.limit_error);
  o.pass = rate_ok && limit_ok;
  return o;
}

// ---------------------------------------------------------------- 8

Outcome criterion8() {
  Outcome o;
  int fails[4] = {0, 0, 0, 0};
  {
    std::mt19937 rng(101);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
      const auto m = random_test_measure(rng);
      const auto f = BVFunction::cdf_of(m);
      const RandomPolynomial phi(rng);
      double a = u(rng), b = u(rng);
      if (a > b) std::swap(a, b);
      const double lhs = stieltjes(m, phi, a, b) +
                         piecewise_integral([&](double x) { return phi.derivative(x) * eval_bv(f, x).right; }, a,
                                            b, atom_positions(m, m));
      const double rhs = eval_bv(f, b).right * phi(b) - eval_bv(f, a).right * phi(a);
      fails[0] += std::abs(lhs - rhs) < 1e-8 ? 0 : 1;
    }
  }
  {
    std::mt19937 rng(202);
    for (int trial = 0; trial < 20; ++trial) {
      const auto mf = random_test_measure(rng, 3, 2);
      const auto mg = random_test_measure(rng, 2, 2);
      const auto f = BVFunction::cdf_of(mf);
      const auto g = BVFunction::cdf_of(mg);
      const RandomPolynomial phi(rng);
      const double a = -2.0, b = 2.0;
      const auto breaks = atom_positions(mf, mg);
      auto fg = [&](double x) { return eval_bv(f, x).right * eval_bv(g, x).right; };
      const double lhs = phi(b) * fg(b) - phi(a) * fg(a) -
                         piecewise_integral([&](double x) { return phi.derivative(x) * fg(x); }, a, b, breaks);
      const double rhs = stieltjes(mg, [&](double x) { return phi(x) * eval_bv(f, x).average; }, a, b, breaks) +
                         stieltjes(mf, [&](double x) { return phi(x) * eval_bv(g, x).average; }, a, b, breaks);
      fails[1] += std::abs(lhs - rhs) <= 1e-8 * std::max(1.0, std::abs(lhs)) ? 0 : 1;
    }
  }
  {
    std::mt19937 rng(303);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    std::uniform_real_distribution<double> w(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> bp;
      for (int i = 0; i < 5; ++i) bp.push_back(u(rng));
      std::sort(bp.begin(), bp.end());
      std::vector<Cubic> cf;
      for (int i = 0; i < 4; ++i) cf.push_back({w(rng), 0, 0, 0});
      const SignedMeasure m({}, PiecewiseDensity(bp, cf), {-2, 2});
      const auto f = BVFunction::cdf_of(m);
      const double x = u(rng);
      const double lhs = std::exp(eval_bv(f, x).right) - std::exp(eval_bv(f, -2.0).right);
      const double rhs = stieltjes(m, [&](double s) { return std::exp(eval_bv(f, s).right); }, -2.0, x);
      fails[2] += std::abs(lhs - rhs) < 1e-8 ? 0 : 1;
    }
  }
  {
    std::mt19937 rng(404);
    std::uniform_real_distribution<double> eta_d(0.01, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
      const auto m = random_test_measure(rng, 4, 1);
      const double eta = eta_d(rng);
      const int panels = static_cast<int>(40.0 / eta) + 8;
      const double quad = integrate_gl([&](double x) { return smoothed_atoms(m, eta, x); }, -2.0 - 10 * eta,
                                       2.0 + 10 * eta, 16, panels);
      fails[3] += std::abs(quad - atomic_variation(m)) < 1e-8 ? 0 : 1;
    }
  }
  o.pass = fails[0] + fails[1] + fails[2] + fails[3] == 0;
  note(o.detail, "failures: parts %d, product %d, chain %d, smoothing %d (of 20 each)", fails[0], fails[1], fails[2],
       fails[3]);
  return o;
}

// ---------------------------------------------------------------- 9

Outcome criterion9() {
  Outcome o;
  std::vector<std::pair<const char*, SignedMeasure>> cases{{"V=0", SignedMeasure::zero()}};
  for (const auto& p : suite_potentials()) cases.push_back(p);
  const std::vector<double> eps{1e-1, 1e-2, 1e-3, 1e-4};
  std::vector<ResolventBoundReport> r(cases.size() * eps.size());
  parallel_for(r.size(), default_workers(), [&](std::size_t i) {
    r[i] = resolvent_bound_check(cases[i / eps.size()].second, 1.0, eps[i % eps.size()], 1.0, 1.0);
  });
  for (std::size_t c = 0; c < cases.size(); ++c) {
    double worst = 0.0;
    for (std::size_t k = 0; k < eps.size(); ++k) {
      const auto& x = r[c * eps.size() + k];
      o.pass &= x.pass() && std::isfinite(x.measured_norm);
      worst = std::max(worst, x.ratio);
    }
    const double growth = r[c * eps.size() + 3].measured_norm / r[c * eps.size() + 2].measured_norm;
    note(o.detail, "%s max ratio %.3f, norm(1e-4)/norm(1e-3) %.3f", cases[c].first, worst, growth);
  }
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"transfer-matrix kernel vs FEM resolvent, O(res^2)", criterion1},
      {"closed-form spectral data of +-2 delta_0", criterion2},
      {"Carleman inequality, 100 randomized tuples", criterion3},
      {"weighted resolvent bound and h-scan envelope", criterion4},
      {"exterior norm scales like 1/h", criterion5},
      {"resonance-free strip [0.5, 20] x [-0.3, 0]", criterion6},
      {"wave decay rate and zero-resonance limit", criterion7},
      {"BV calculus property suite", criterion8},
      {"no positive eigenvalue: bound uniform as eps -> 1e-4", criterion9},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %zu: %s [%.1fs] (%s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, secs,
                o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
