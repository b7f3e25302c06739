#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "measchrod/measure.hpp"
#include "measchrod/quadrature.hpp"
#include "test_support.hpp"

using namespace measchrod;
using measchrod::testing::RandomPolynomial;
using measchrod::testing::atom_positions;
using measchrod::testing::piecewise_integral;
using measchrod::testing::random_test_measure;

namespace {

// Brute-force oracle: adaptive quadrature of |density| plus atom sum.
double tv_oracle(const SignedMeasure& m) {
  double s = 0.0;
  for (const Atom& a : m.atoms()) s += std::abs(a.weight);
  const auto& bp = m.density().breakpoints();
  for (std::size_t k = 0; k + 1 < bp.size(); ++k)
    s += integrate_adaptive([&](double x) { return std::abs(m.density()(x)); }, bp[k],
                            bp[k + 1] - 1e-15, 1e-13);
  return s;
}

}  // namespace

TEST_CASE("total_variation") {
  CHECK(total_variation(SignedMeasure::point_masses({{0.0, 2.0}, {1.0, -3.0}})) == doctest::Approx(5.0));
  CHECK(total_variation(SignedMeasure({}, PiecewiseDensity::constant(0, 1, -1.0), {0, 1})) ==
        doctest::Approx(1.0));
  const SignedMeasure mixed({{0.0, 1.0}}, PiecewiseDensity::constant(0, 2, 1.0), {0, 2});
  const double oracle = tv_oracle(mixed);
  CHECK(oracle == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(total_variation(mixed) == doctest::Approx(oracle).epsilon(1e-12));

  SUBCASE("sign-changing cubic matches quadrature oracle") {
    std::mt19937 rng(11);
    for (int i = 0; i < 20; ++i) {
      const auto m = random_test_measure(rng, 2, 3);
      CHECK(total_variation(m) == doctest::Approx(tv_oracle(m)).epsilon(1e-9));
    }
  }
}

TEST_CASE("measure construction rules") {
  const auto m = SignedMeasure::point_masses({{0.5, 1.0}, {0.5 + 1e-13, 2.0}, {-0.2, 1.0}});
  REQUIRE(m.atoms().size() == 2);
  CHECK(m.atoms()[0].position == -0.2);
  CHECK(m.atoms()[1].weight == doctest::Approx(3.0));
  CHECK_THROWS_AS(PiecewiseDensity({0.0, 1.0, 0.5}, {Cubic{}, Cubic{}}), InvalidInput);
  CHECK_THROWS_AS(SignedMeasure({{3.0, 1.0}}, {}, {-1, 1}), InvalidInput);
}

TEST_CASE("cdf sides") {
  const auto delta = SignedMeasure::point_masses({{0.0, 1.0}});
  CHECK(cdf(delta, 0.0, Side::Right) == 1.0);
  CHECK(cdf(delta, 0.0, Side::Left) == 0.0);
  const SignedMeasure box({}, PiecewiseDensity::constant(0, 1, 1.0), {0, 1});
  CHECK(cdf(box, 0.5, Side::Left) == doctest::Approx(0.5));
  CHECK(cdf(box, 0.5, Side::Right) == doctest::Approx(0.5));

  SUBCASE("interval mass from cdf differences") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int i = 0; i < 50; ++i) {
      const auto m = random_test_measure(rng);
      double a = u(rng), b = u(rng);
      if (a > b) std::swap(a, b);
      const double diff = cdf(m, b, Side::Right) - cdf(m, a, Side::Right);
      CHECK(std::abs(diff - mass(m, a, b)) < 1e-12);
      // an interval endpoint placed exactly on an atom
      const double xa = m.atoms()[0].position;
      CHECK(std::abs(cdf(m, xa, Side::Right) - cdf(m, xa, Side::Left) - m.atoms()[0].weight) < 1e-12);
    }
  }
}

TEST_CASE("eval_bv left/right/average") {
  auto f = BVFunction::cdf_of(SignedMeasure::point_masses({{0.0, 1.0}}));
  auto v = eval_bv(f, 0.0);
  CHECK(v.left == 0.0);
  CHECK(v.right == 1.0);
  CHECK(v.average == 0.5);
  v = eval_bv(f, 1.0);
  CHECK(v.left == 1.0);
  CHECK(v.right == 1.0);
  CHECK(v.average == 1.0);
  auto g = BVFunction::cdf_of(SignedMeasure::point_masses({{0.0, 1.0}, {0.5, -2.0}}));
  v = eval_bv(g, 0.5);
  CHECK(v.left == doctest::Approx(1.0));
  CHECK(v.right == doctest::Approx(-1.0));
  CHECK(v.average == doctest::Approx(0.0));
}

TEST_CASE("smoothed_atoms") {
  const auto one = SignedMeasure::point_masses({{0.3, 1.0}});
  CHECK(smoothed_atoms(one, 1.0, 0.3) == doctest::Approx(1.0 / std::sqrt(std::numbers::pi)));
  CHECK(smoothed_atoms(one, 1.0, 100.3) < 1e-300);
  const SignedMeasure pair({{0.0, 1.0}, {0.0 + 1e-6, -1.0}}, {}, {-1, 1});
  const double eta = 0.25;
  // absolute weights add: 2 pi^{-1/2} eta^{-1} (up to the 1e-6 offset of the second atom)
  CHECK(smoothed_atoms(pair, eta, 0.0) ==
        doctest::Approx(2.0 / (std::sqrt(std::numbers::pi) * eta)).epsilon(1e-9));
  CHECK_THROWS_AS((void)smoothed_atoms(one, 0.0, 0.0), InvalidInput);
}

TEST_CASE("cantor_approx") {
  const auto c1 = cantor_approx(1, 1.0);
  REQUIRE(c1.atoms().size() == 2);
  CHECK(c1.atoms()[0].position == 0.0);
  CHECK(c1.atoms()[1].position == doctest::Approx(2.0 / 3.0));
  CHECK(c1.atoms()[1].weight == 0.5);
  const auto c2 = cantor_approx(2, 1.0);
  REQUIRE(c2.atoms().size() == 4);
  const double expect[] = {0.0, 2.0 / 9.0, 2.0 / 3.0, 8.0 / 9.0};
  for (int i = 0; i < 4; ++i) {
    CHECK(c2.atoms()[i].position == doctest::Approx(expect[i]));
    CHECK(c2.atoms()[i].weight == 0.25);
  }
  for (int level : {1, 3, 6, 10}) CHECK(total_variation(cantor_approx(level, -1.7)) == doctest::Approx(1.7));
  CHECK_THROWS_AS(cantor_approx(21, 1.0), InvalidInput);
  CHECK_THROWS_AS(cantor_approx(0, 1.0), InvalidInput);
}

// ---- BV calculus property suite (20 random cases each, 1e-8) ----

TEST_CASE("integration by parts") {
  std::mt19937 rng(101);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = random_test_measure(rng);
    const auto f = BVFunction::cdf_of(m);
    const RandomPolynomial phi(rng);
    double a = u(rng), b = u(rng);
    if (a > b) std::swap(a, b);
    const auto breaks = atom_positions(m, m);
    const double lhs = stieltjes(m, phi, a, b) +
                       piecewise_integral([&](double x) { return phi.derivative(x) * eval_bv(f, x).right; },
                                          a, b, breaks);
    const double rhs = eval_bv(f, b).right * phi(b) - eval_bv(f, a).right * phi(a);
    CHECK(std::abs(lhs - rhs) < 1e-8);
  }
}

TEST_CASE("Stieltjes product rule d(fg) = f^A dg + g^A df") {
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
    // left side through pointwise values of fg only
    const double lhs = phi(b) * fg(b) - phi(a) * fg(a) -
                       piecewise_integral([&](double x) { return phi.derivative(x) * fg(x); }, a, b, breaks);
    const double rhs =
        stieltjes(mg, [&](double x) { return phi(x) * eval_bv(f, x).average; }, a, b, breaks) +
        stieltjes(mf, [&](double x) { return phi(x) * eval_bv(g, x).average; }, a, b, breaks);
    CHECK(std::abs(lhs - rhs) <= 1e-8 * std::max(1.0, std::abs(lhs)));
  }
}

TEST_CASE("chain rule d(e^f) = e^f df for continuous piecewise-linear f") {
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
    const double a = -2.0;
    const double x = u(rng);
    const double lhs = std::exp(eval_bv(f, x).right) - std::exp(eval_bv(f, a).right);
    const double rhs = stieltjes(m, [&](double s) { return std::exp(eval_bv(f, s).right); }, a, x);
    CHECK(std::abs(lhs - rhs) < 1e-8);
  }
}

TEST_CASE("Gaussian smoothing preserves |V_d| mass") {
  std::mt19937 rng(404);
  std::uniform_real_distribution<double> eta_d(0.01, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = random_test_measure(rng, 4, 1);
    const double eta = eta_d(rng);
    double quad = 0.0;
    // panels fine enough to resolve the narrowest Gaussian
    const int panels = static_cast<int>(40.0 / eta) + 8;
    quad = integrate_gl([&](double x) { return smoothed_atoms(m, eta, x); }, -2.0 - 10 * eta,
                        2.0 + 10 * eta, 16, panels);
    CHECK(std::abs(quad - atomic_variation(m)) < 1e-8);
    const double x = 0.1 * trial - 1.0;
    const double cum = integrate_gl([&](double s) { return smoothed_atoms(m, eta, s); }, -2.0 - 10 * eta, x,
                                    16, panels);
    CHECK(std::abs(cum - smoothed_atoms_cumulative(m, eta, x)) < 1e-8);
  }
}
