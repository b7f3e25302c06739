#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

namespace measchrod {

using LinearMap = std::function<void(std::span<const std::complex<double>>,
                                     std::span<std::complex<double>>)>;

struct SingularValueResult {
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<std::complex<double>> right_vector;
};

/// Largest singular value of B (n columns, m rows) by Lanczos on B^H B with
/// full reorthogonalization and thick restarts from the top Ritz vector.
/// `apply` computes B x (length m), `apply_adjoint` computes B^H y (length n).
SingularValueResult largest_singular_value(std::size_t n, std::size_t m, const LinearMap& apply,
                                           const LinearMap& apply_adjoint, double rel_tol = 1e-8,
                                           int max_iterations = 600, unsigned seed = 7);

/// Eigenvalues of a real symmetric tridiagonal matrix (ascending), via
/// bisection on Sturm counts.
std::vector<double> symmetric_tridiagonal_eigenvalues(const std::vector<double>& diag,
                                                      const std::vector<double>& off);

}  // namespace measchrod
