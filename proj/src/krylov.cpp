#include "measchrod/krylov.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "measchrod/tridiag.hpp"

namespace measchrod {

namespace {

using Vec = std::vector<cplx>;

double norm2(const Vec& v) {
  double s = 0.0;
  for (const cplx& x : v) s += std::norm(x);
  return std::sqrt(s);
}

cplx dot(const Vec& a, const Vec& b) {
  cplx s{};
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

// Cyclic Jacobi on a small dense symmetric matrix; returns the largest
// eigenvalue and its eigenvector.
std::pair<double, std::vector<double>> top_eigenpair(std::vector<double> a, int k) {
  std::vector<double> v(static_cast<std::size_t>(k) * k, 0.0);
  for (int i = 0; i < k; ++i) v[i * k + i] = 1.0;
  auto at = [&](int i, int j) -> double& { return a[static_cast<std::size_t>(i) * k + j]; };
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < k; ++i)
      for (int j = i + 1; j < k; ++j) off += at(i, j) * at(i, j);
    if (off < 1e-30) break;
    for (int p = 0; p < k; ++p) {
      for (int q = p + 1; q < k; ++q) {
        if (std::abs(at(p, q)) < 1e-300) continue;
        const double theta = (at(q, q) - at(p, p)) / (2.0 * at(p, q));
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int r = 0; r < k; ++r) {
          const double arp = at(r, p);
          const double arq = at(r, q);
          at(r, p) = c * arp - s * arq;
          at(r, q) = s * arp + c * arq;
        }
        for (int r = 0; r < k; ++r) {
          const double apr = at(p, r);
          const double aqr = at(q, r);
          at(p, r) = c * apr - s * aqr;
          at(q, r) = s * apr + c * aqr;
        }
        for (int r = 0; r < k; ++r) {
          const double vrp = v[r * k + p];
          const double vrq = v[r * k + q];
          v[r * k + p] = c * vrp - s * vrq;
          v[r * k + q] = s * vrp + c * vrq;
        }
      }
    }
  }
  int best = 0;
  for (int i = 1; i < k; ++i)
    if (at(i, i) > at(best, best)) best = i;
  std::vector<double> vec(k);
  for (int r = 0; r < k; ++r) vec[r] = v[r * k + best];
  return {at(best, best), vec};
}

}  // namespace

SingularValueResult largest_singular_value(std::size_t n, std::size_t m, const LinearMap& apply,
                                           const LinearMap& apply_adjoint, double rel_tol,
                                           int max_iterations, unsigned seed) {
  constexpr int kCycle = 40;
  SingularValueResult result;
  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss;
  Vec start(n);
  for (auto& x : start) x = cplx(gauss(rng), gauss(rng));
  Vec tmp(m);
  auto op = [&](const Vec& x, Vec& y) {
    apply(x, tmp);
    apply_adjoint(tmp, y);
  };

  double previous = -1.0;
  int total = 0;
  while (total < max_iterations) {
    const double nrm = norm2(start);
    if (nrm == 0.0) return result;
    for (auto& x : start) x /= nrm;
    std::vector<Vec> basis{start};
    std::vector<double> alpha;
    std::vector<double> beta;
    Vec w(n);
    const int steps = static_cast<int>(std::min<std::size_t>(kCycle, n));
    double last_beta = 0.0;
    for (int j = 0; j < steps; ++j) {
      op(basis[j], w);
      ++total;
      const double a = std::real(dot(basis[j], w));
      alpha.push_back(a);
      // full reorthogonalization, twice
      for (int pass = 0; pass < 2; ++pass)
        for (const Vec& q : basis) {
          const cplx c = dot(q, w);
          for (std::size_t i = 0; i < n; ++i) w[i] -= c * q[i];
        }
      const double b = norm2(w);
      last_beta = b;
      if (j + 1 == steps || b <= 1e-14 * std::max(1.0, std::abs(a))) break;
      beta.push_back(b);
      Vec next(n);
      for (std::size_t i = 0; i < n; ++i) next[i] = w[i] / b;
      basis.push_back(std::move(next));
    }
    const int k = static_cast<int>(alpha.size());
    std::vector<double> t(static_cast<std::size_t>(k) * k, 0.0);
    for (int i = 0; i < k; ++i) {
      t[i * k + i] = alpha[i];
      if (i + 1 < k) t[i * k + i + 1] = t[(i + 1) * k + i] = beta[i];
    }
    auto [theta, s] = top_eigenpair(std::move(t), k);
    theta = std::max(theta, 0.0);
    Vec ritz(n, cplx{});
    for (int j = 0; j < k; ++j)
      for (std::size_t i = 0; i < n; ++i) ritz[i] += s[j] * basis[j][i];
    const double residual = last_beta * std::abs(s[k - 1]);
    result.value = std::sqrt(theta);
    result.iterations = total;
    result.right_vector = ritz;
    const bool invariant = k < steps || last_beta <= 1e-14 * std::max(1.0, theta);
    if (invariant || residual <= rel_tol * theta ||
        (previous >= 0.0 && std::abs(theta - previous) <= 1e-3 * rel_tol * theta)) {
      result.converged = true;
      return result;
    }
    previous = theta;
    start = std::move(ritz);
  }
  return result;
}

std::vector<double> symmetric_tridiagonal_eigenvalues(const std::vector<double>& diag,
                                                      const std::vector<double>& off) {
  const std::size_t n = diag.size();
  SymTridiag a{diag, off};
  SymTridiag id{std::vector<double>(n, 1.0), std::vector<double>(n > 0 ? n - 1 : 0, 0.0)};
  double lo = 0.0;
  double hi = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double r = 0.0;
    if (i > 0) r += std::abs(off[i - 1]);
    if (i + 1 < n) r += std::abs(off[i]);
    lo = std::min(lo, diag[i] - r);
    hi = std::max(hi, diag[i] + r);
  }
  lo -= 1.0;
  hi += 1.0;
  std::vector<double> out;
  for (std::size_t k = 0; k < n; ++k) {
    double a0 = lo;
    double b0 = hi;
    for (int it = 0; it < 200 && b0 - a0 > 1e-15 * std::max(1.0, std::abs(b0)); ++it) {
      const double mid = 0.5 * (a0 + b0);
      if (count_eigenvalues_below(a, id, mid) > static_cast<int>(k))
        b0 = mid;
      else
        a0 = mid;
    }
    out.push_back(0.5 * (a0 + b0));
  }
  return out;
}

}  // namespace measchrod
