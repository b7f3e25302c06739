#pragma once

#include <complex>
#include <span>
#include <vector>

namespace measchrod {

using cplx = std::complex<double>;

/// Symmetric tridiagonal matrix: `diag` of size n, `off` of size n - 1.
struct SymTridiag {
  std::vector<double> diag;
  std::vector<double> off;

  [[nodiscard]] std::size_t size() const { return diag.size(); }
  /// y = T x
  void apply(std::span<const double> x, std::span<double> y) const;
  void apply(std::span<const cplx> x, std::span<cplx> y) const;
  /// x^H T x (real for symmetric real T).
  [[nodiscard]] double quadratic_form(std::span<const cplx> x) const;
  /// Principal submatrix on rows/cols [first, first + count).
  [[nodiscard]] SymTridiag sub(std::size_t first, std::size_t count) const;
};

/// Number of eigenvalues of the pencil (a, m) strictly below sigma, by
/// Sylvester's law of inertia on the LDL^T pivots of a - sigma m.
int count_eigenvalues_below(const SymTridiag& a, const SymTridiag& m, double sigma);

/// Cholesky factor L (lower bidiagonal) of an SPD tridiagonal matrix.
class TridiagCholesky {
 public:
  explicit TridiagCholesky(const SymTridiag& m);

  void solve(std::span<cplx> x) const;          // x <- M^{-1} x
  void apply_l(std::span<cplx> x) const;        // x <- L x
  void apply_lt(std::span<cplx> x) const;       // x <- L^T x
  void solve_l(std::span<cplx> x) const;        // x <- L^{-1} x
  void solve_lt(std::span<cplx> x) const;       // x <- L^{-T} x
  void solve(std::span<double> x) const;

 private:
  std::vector<double> d_;  // diagonal of L
  std::vector<double> e_;  // subdiagonal of L
};

/// LU factorization with partial pivoting of a complex tridiagonal matrix
/// given by (sub, diag, super). Mirrors LAPACK zgttrf/zgttrs.
class TridiagLU {
 public:
  TridiagLU(std::vector<cplx> sub, std::vector<cplx> diag, std::vector<cplx> super);

  [[nodiscard]] std::size_t size() const { return d_.size(); }
  [[nodiscard]] bool singular() const { return singular_; }
  void solve(std::span<cplx> b) const;             // b <- K^{-1} b
  void solve_adjoint(std::span<cplx> b) const;     // b <- K^{-H} b
  /// Hager-Higham estimate of the 1-norm condition number.
  [[nodiscard]] double condition_estimate() const;
  [[nodiscard]] double norm1() const { return norm1_; }

 private:
  std::vector<cplx> dl_, d_, du_, du2_;
  std::vector<int> ipiv_;
  bool singular_ = false;
  double norm1_ = 0.0;
};

}  // namespace measchrod
