#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "measchrod/fem.hpp"
#include "measchrod/quadrature.hpp"

using namespace measchrod;

namespace {

GridPtr make_grid(const SignedMeasure& m, double L, double res) {
  return std::make_shared<const Grid>(build_grid(m, L, res));
}

H1Function random_function(const GridPtr& g, std::mt19937& rng, double support = 1e9) {
  std::normal_distribution<double> n;
  H1Function u{g, std::vector<cplx>(g->size())};
  for (std::size_t i = 1; i + 1 < g->size(); ++i)
    if (std::abs(g->nodes[i]) < support) u.values[i] = cplx(n(rng), n(rng));
  return u;
}

}  // namespace

TEST_CASE("build_grid") {
  auto contains = [](const Grid& g, double x) { return g.find(x).has_value(); };
  const Grid g1 = build_grid({-1, 1}, 2.0, 1.0, {0.0});
  for (double x : {-2.0, -1.0, 0.0, 1.0, 2.0}) CHECK(contains(g1, x));
  const Grid g2 = build_grid({-1, 1}, 1.0, 0.5, {});
  REQUIRE(g2.size() == 5);
  for (int i = 0; i < 5; ++i) CHECK(g2.nodes[i] == doctest::Approx(-1.0 + 0.5 * i));
  const Grid g3 = build_grid({-1, 1}, 1.0, 0.5, {0.3});
  CHECK(contains(g3, 0.3));
  CHECK(g3.max_spacing() <= 0.5 + 1e-15);
  // a uniform node crowding an atom is dropped when the spacing bound allows it
  const double d = 10.0 / std::ceil(10.0 / 0.105);
  const double near = -5.0 + 46 * d + 0.0005;
  const Grid g4 = build_grid({-1, 1}, 5.0, 0.105, {near});
  CHECK(contains(g4, near));
  CHECK(g4.max_spacing() <= 0.105 * (1 + 1e-12));
  CHECK(g4.min_spacing() > 0.05);
  // otherwise the short cell is kept
  const Grid g5 = build_grid({-1, 1}, 5.0, 0.1, {0.0001});
  CHECK(contains(g5, 0.0001));
  CHECK(g5.max_spacing() <= 0.1 * (1 + 1e-12));
  CHECK_THROWS_AS(build_grid({-1, 1}, 1.0, 0.5, {1.5}), InvalidInput);
  CHECK_THROWS_AS(build_grid({-3, 3}, 1.0, 0.5, {}), InvalidInput);
}

TEST_CASE("assemble") {
  SUBCASE("delta at a node") {
    const auto m = SignedMeasure::point_masses({{0.0, 2.5}});
    const auto g = make_grid(m, 2.0, 0.25);
    const auto op = assemble(m, 1.0, g);
    const std::size_t i0 = *g->find(0.0);
    const auto& v = op.matrices().potential;
    for (std::size_t i = 0; i < g->size(); ++i) CHECK(v.diag[i] == (i == i0 ? 2.5 : 0.0));
    for (double o : v.off) CHECK(o == 0.0);
  }
  SUBCASE("free operator on a uniform grid") {
    const auto m = SignedMeasure::zero();
    const auto g = make_grid(m, 2.0, 0.25);
    const double h = 0.7;
    const auto op = assemble(m, h, g);
    const auto& s = op.matrices().stiffness;
    for (std::size_t i = 1; i + 1 < g->size(); ++i) CHECK(s.diag[i] == doctest::Approx(2.0 / 0.25));
    for (double o : s.off) CHECK(o == doctest::Approx(-1.0 / 0.25));
    for (std::size_t i = 0; i < g->size(); ++i) CHECK(op.operator_matrix().diag[i] == doctest::Approx(h * h * s.diag[i]));
  }
  SUBCASE("density entries match quadrature of phi_i phi_j rho") {
    const SignedMeasure m({}, PiecewiseDensity({-0.8, 0.1, 0.9}, {Cubic{1, -2, 0.5, 3}, Cubic{-1, 0, 2, -4}}),
                          {-1, 1});
    const auto g = make_grid(m, 2.0, 0.13);
    const auto op = assemble(m, 1.0, g);
    const auto& x = g->nodes;
    for (std::size_t i = 1; i + 1 < x.size(); ++i) {
      auto phi = [&](std::size_t j, double s) {
        if (j > 0 && s >= x[j - 1] && s <= x[j]) return (s - x[j - 1]) / (x[j] - x[j - 1]);
        if (j + 1 < x.size() && s >= x[j] && s <= x[j + 1]) return (x[j + 1] - s) / (x[j + 1] - x[j]);
        return 0.0;
      };
      const double dii = integrate_adaptive([&](double s) { return phi(i, s) * phi(i, s) * m.density()(s); },
                                            x[i - 1], x[i + 1], 1e-13);
      const double dij = integrate_adaptive([&](double s) { return phi(i, s) * phi(i + 1, s) * m.density()(s); },
                                            x[i], x[i + 1], 1e-13);
      CHECK(op.matrices().potential.diag[i] == doctest::Approx(dii).epsilon(1e-8));
      CHECK(op.matrices().potential.off[i] == doctest::Approx(dij).epsilon(1e-8));
    }
  }
}

TEST_CASE("apply_resolvent") {
  const double L = 3.0;
  const auto m0 = SignedMeasure::zero();
  const auto g = make_grid(m0, L, 0.05);
  const double h = 0.8;
  const auto op = assemble(m0, h, g);
  const double d = 2.0 * L / static_cast<double>(g->size() - 1);

  SUBCASE("Dirichlet eigenfunction") {
    const auto f = interpolate(g, [&](double x) { return cplx(std::sin(std::numbers::pi * x / L)); });
    const cplx z(0.3, 0.2);
    const auto u = apply_resolvent(op, z, f);
    // exact discrete eigenvalue of the P1 pencil, and its continuum limit
    const double theta = std::numbers::pi * d / L;
    const double mu = 6.0 / (d * d) * (1.0 - std::cos(theta)) / (2.0 + std::cos(theta));
    const double mu_cont = std::pow(std::numbers::pi / L, 2);
    for (std::size_t i = 0; i < g->size(); ++i) {
      CHECK(std::abs(u.values[i] - f.values[i] / (h * h * mu - z)) < 1e-10);
      CHECK(std::abs(u.values[i] - f.values[i] / (h * h * mu_cont - z)) < 1e-3);
    }
  }
  SUBCASE("self-adjoint bound at z = -1") {
    std::mt19937 rng(5);
    const auto mv = SignedMeasure::point_masses({{0.0, 0.3}, {0.5, -0.2}});
    const auto gv = make_grid(mv, L, 0.05);
    const auto opv = assemble(mv, 1.0, gv);
    // spectrum bottom via Sturm bisection: smallest Dirichlet eigenvalue
    double lo = -10.0, hi = 10.0;
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      (count_eigenvalues_below(opv.interior_operator(), opv.interior_mass(), mid) > 0 ? hi : lo) = mid;
    }
    const double dist = lo + 1.0;
    REQUIRE(dist > 0.0);
    for (int trial = 0; trial < 5; ++trial) {
      const auto f = random_function(gv, rng);
      const auto u = apply_resolvent(opv, -1.0, f);
      CHECK(std::sqrt(u.norm2_squared()) <= std::sqrt(f.norm2_squared()) / dist * (1 + 1e-10));
    }
  }
  SUBCASE("first resolvent identity") {
    std::mt19937 rng(6);
    const auto mv = SignedMeasure::point_masses({{0.0, 2.0}, {1.0, -1.0}});
    const auto gv = make_grid(mv, L, 0.05);
    const auto opv = assemble(mv, 1.0, gv);
    const cplx z1(0.5, 0.3), z2(-0.2, -0.7);
    for (int trial = 0; trial < 3; ++trial) {
      const auto f = random_function(gv, rng);
      const auto r1 = apply_resolvent(opv, z1, f);
      const auto r2 = apply_resolvent(opv, z2, f);
      const auto r12 = apply_resolvent(opv, z1, r2);
      double err = 0.0, scale = 0.0;
      for (std::size_t i = 0; i < gv->size(); ++i) {
        err = std::max(err, std::abs(r1.values[i] - r2.values[i] - (z1 - z2) * r12.values[i]));
        scale = std::max(scale, std::abs(r1.values[i]));
      }
      CHECK(err < 1e-8 * std::max(1.0, scale));
    }
  }
  SUBCASE("singular shift is reported") {
    const auto f = interpolate(g, [&](double x) { return cplx(std::sin(std::numbers::pi * x / L)); });
    const auto eig = eigenvalues_below(op, 0.5);
    REQUIRE(!eig.empty());
    CHECK_THROWS_AS(apply_resolvent(op, eig.front(), f), SingularSystem);
  }
}

TEST_CASE("outgoing boundary reproduces the free line resolvent") {
  // -h^2 u'' - z u = f, kernel i e^{ik|x-y|}/(2 h^2 k)
  const auto m0 = SignedMeasure::zero();
  const double h = 0.5;
  const cplx z(1.0, 0.05);
  const cplx k = std::sqrt(z) / h;
  const double y0 = 0.2;
  double prev_err = 0.0;
  for (double res : {0.02, 0.01}) {
    for (double L : {2.0, 4.0}) {
      const auto g = make_grid(m0, L, res);
      const auto op = assemble(m0, h, g);
      // narrow hat source approximates delta_{y0}
      H1Function f{g, std::vector<cplx>(g->size())};
      const auto idx = static_cast<std::size_t>(
          std::min_element(g->nodes.begin(), g->nodes.end(),
                           [&](double a, double b) { return std::abs(a - y0) < std::abs(b - y0); }) -
          g->nodes.begin());
      // M f = e_idx  <=>  load vector of a delta at node idx
      std::vector<cplx> e(g->size());
      e[idx] = 1.0;
      const TridiagCholesky chol(op.matrices().mass);
      chol.solve(std::span<cplx>(e));
      f.values = e;
      const auto u = apply_resolvent(op, z, f, Boundary::Outgoing);
      double err = 0.0;
      const double yn = g->nodes[idx];
      for (std::size_t i = 0; i < g->size(); ++i) {
        const cplx exact = cplx(0, 1) * std::exp(cplx(0, 1) * k * std::abs(g->nodes[i] - yn)) / (2.0 * h * h * k);
        err = std::max(err, std::abs(u.values[i] - exact));
      }
      CHECK(err < 0.01);
      if (L == 4.0 && prev_err > 0.0) CHECK(err < prev_err);
      if (L == 4.0) prev_err = err;
    }
  }
}

TEST_CASE("eigenvalues_below") {
  const auto attractive = SignedMeasure::point_masses({{0.0, -2.0}});
  const auto g = make_grid(attractive, 20.0, 0.01);
  const auto ev = eigenvalues_below(assemble(attractive, 1.0, g), 0.0);
  REQUIRE(ev.size() == 1);
  CHECK(std::abs(ev[0] + 1.0) < 1e-3);

  const auto m0 = SignedMeasure::zero();
  CHECK(eigenvalues_below(assemble(m0, 1.0, make_grid(m0, 20.0, 0.05)), 0.0).empty());
  const auto repulsive = SignedMeasure::point_masses({{0.0, 2.0}});
  CHECK(eigenvalues_below(assemble(repulsive, 1.0, make_grid(repulsive, 20.0, 0.05)), 0.0).empty());

  SUBCASE("ground state converges at least linearly in the resolution") {
    std::vector<double> errs;
    for (double res : {0.1, 0.05, 0.025}) {
      const auto e = eigenvalues_below(assemble(attractive, 1.0, make_grid(attractive, 20.0, res)), 0.0);
      errs.push_back(std::abs(e.at(0) + 1.0));
    }
    CHECK(errs[1] <= 0.5 * errs[0] * 1.05);
    CHECK(errs[2] <= 0.5 * errs[1] * 1.05);
  }
  SUBCASE("box independence") {
    const auto two = SignedMeasure::point_masses({{-0.5, -2.0}, {0.5, -1.5}});
    const auto a = eigenvalues_below(assemble(two, 1.0, make_grid(two, 15.0, 0.02)), 0.0);
    const auto b = eigenvalues_below(assemble(two, 1.0, make_grid(two, 30.0, 0.02)), 0.0);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-6);
  }
  SUBCASE("eigenpairs are M-normalized solutions") {
    const auto op = assemble(attractive, 1.0, make_grid(attractive, 10.0, 0.02));
    const auto pairs = eigenpairs_below(op, 0.0);
    REQUIRE(pairs.size() == 1);
    const auto& u = pairs[0].vector;
    CHECK(u.norm2_squared() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(op.form(u) == doctest::Approx(pairs[0].value).epsilon(1e-8));
    // e^{-|x|}/sqrt(1) normalized: u(0)^2 = 1 for the continuum ground state
    CHECK(std::abs(u(0.0)) == doctest::Approx(1.0).epsilon(2e-3));
  }
}

TEST_CASE("form bounds and Sobolev embedding") {
  SUBCASE("free operator") {
    const auto m0 = SignedMeasure::zero();
    const auto g = make_grid(m0, 3.0, 0.1);
    const auto op = assemble(m0, 0.6, g);
    std::mt19937 rng(1);
    const auto u = random_function(g, rng);
    const auto r = form_bounds_check(op, u);
    CHECK(r.form == doctest::Approx(0.36 * u.derivative_norm2_squared()));
    CHECK(r.holds());
    CHECK(r.form > r.lower);
    CHECK(r.form < r.upper);
  }
  SUBCASE("delta with the hat at its atom") {
    const auto m = SignedMeasure::point_masses({{0.0, 1.0}});
    const auto g = make_grid(m, 3.0, 0.1);
    const auto op = assemble(m, 1.0, g);
    H1Function u{g, std::vector<cplx>(g->size())};
    u.values[*g->find(0.0)] = 1.0;
    const auto r = form_bounds_check(op, u);
    CHECK(r.form == doctest::Approx(u.derivative_norm2_squared() + 1.0));
    CHECK(r.holds());
  }
  SUBCASE("randomized atom measures with |V| <= 5") {
    std::mt19937 rng(77);
    std::uniform_real_distribution<double> pos(-1.0, 1.0);
    std::uniform_real_distribution<double> hs(0.2, 1.5);
    int violations = 0;
    int sobolev_violations = 0;
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<Atom> atoms;
      double budget = 5.0;
      for (int k = 0; k < 4; ++k) {
        std::uniform_real_distribution<double> w(-budget / 2, budget / 2);
        const double wk = w(rng);
        budget -= std::abs(wk);
        atoms.push_back({pos(rng), wk});
      }
      const auto m = SignedMeasure::point_masses(atoms);
      const auto g = make_grid(m, 2.0, 0.1);
      const auto op = assemble(m, hs(rng), g);
      const auto u = random_function(g, rng);
      if (!form_bounds_check(op, u).holds()) ++violations;
      const double sup2 = std::pow(u.sup_norm(), 2);
      if (sup2 > std::sqrt(u.norm2_squared() * u.derivative_norm2_squared()) * (1 + 1e-12)) ++sobolev_violations;
    }
    CHECK(violations == 0);
    CHECK(sobolev_violations == 0);
  }
}
