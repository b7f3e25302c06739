#include "measchrod/tridiag.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace measchrod {

void SymTridiag::apply(std::span<const double> x, std::span<double> y) const {
  const std::size_t n = size();
  for (std::size_t i = 0; i < n; ++i) {
    double s = diag[i] * x[i];
    if (i > 0) s += off[i - 1] * x[i - 1];
    if (i + 1 < n) s += off[i] * x[i + 1];
    y[i] = s;
  }
}

void SymTridiag::apply(std::span<const cplx> x, std::span<cplx> y) const {
  const std::size_t n = size();
  for (std::size_t i = 0; i < n; ++i) {
    cplx s = diag[i] * x[i];
    if (i > 0) s += off[i - 1] * x[i - 1];
    if (i + 1 < n) s += off[i] * x[i + 1];
    y[i] = s;
  }
}

double SymTridiag::quadratic_form(std::span<const cplx> x) const {
  const std::size_t n = size();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += diag[i] * std::norm(x[i]);
  for (std::size_t i = 0; i + 1 < n; ++i) s += 2.0 * off[i] * std::real(std::conj(x[i]) * x[i + 1]);
  return s;
}

SymTridiag SymTridiag::sub(std::size_t first, std::size_t count) const {
  SymTridiag t;
  t.diag.assign(diag.begin() + first, diag.begin() + first + count);
  if (count > 1) t.off.assign(off.begin() + first, off.begin() + first + count - 1);
  return t;
}

int count_eigenvalues_below(const SymTridiag& a, const SymTridiag& m, double sigma) {
  const std::size_t n = a.size();
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(a.diag[i] - sigma * m.diag[i]));
  const double tiny = std::max(scale, 1.0) * std::numeric_limits<double>::epsilon() * 1e-3;
  int count = 0;
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double t = a.diag[i] - sigma * m.diag[i];
    if (i > 0) {
      const double o = a.off[i - 1] - sigma * m.off[i - 1];
      t -= o * o / d;
    }
    if (std::abs(t) < tiny) t = -tiny;
    if (t < 0.0) ++count;
    d = t;
  }
  return count;
}

TridiagCholesky::TridiagCholesky(const SymTridiag& m) {
  const std::size_t n = m.size();
  d_.resize(n);
  e_.resize(n > 0 ? n - 1 : 0);
  for (std::size_t i = 0; i < n; ++i) {
    double t = m.diag[i];
    if (i > 0) t -= e_[i - 1] * e_[i - 1];
    if (!(t > 0.0)) throw std::runtime_error("cholesky: matrix is not positive definite");
    d_[i] = std::sqrt(t);
    if (i + 1 < n) e_[i] = m.off[i] / d_[i];
  }
}

void TridiagCholesky::solve_l(std::span<cplx> x) const {
  for (std::size_t i = 0; i < d_.size(); ++i) {
    if (i > 0) x[i] -= e_[i - 1] * x[i - 1];
    x[i] /= d_[i];
  }
}

void TridiagCholesky::solve_lt(std::span<cplx> x) const {
  for (std::size_t k = d_.size(); k-- > 0;) {
    if (k + 1 < d_.size()) x[k] -= e_[k] * x[k + 1];
    x[k] /= d_[k];
  }
}

void TridiagCholesky::apply_l(std::span<cplx> x) const {
  for (std::size_t k = d_.size(); k-- > 0;) {
    x[k] *= d_[k];
    if (k > 0) x[k] += e_[k - 1] * x[k - 1];
  }
}

void TridiagCholesky::apply_lt(std::span<cplx> x) const {
  for (std::size_t i = 0; i < d_.size(); ++i) {
    x[i] *= d_[i];
    if (i + 1 < d_.size()) x[i] += e_[i] * x[i + 1];
  }
}

void TridiagCholesky::solve(std::span<cplx> x) const {
  solve_l(x);
  solve_lt(x);
}

void TridiagCholesky::solve(std::span<double> x) const {
  for (std::size_t i = 0; i < d_.size(); ++i) {
    if (i > 0) x[i] -= e_[i - 1] * x[i - 1];
    x[i] /= d_[i];
  }
  for (std::size_t k = d_.size(); k-- > 0;) {
    if (k + 1 < d_.size()) x[k] -= e_[k] * x[k + 1];
    x[k] /= d_[k];
  }
}

TridiagLU::TridiagLU(std::vector<cplx> sub, std::vector<cplx> diag, std::vector<cplx> super)
    : dl_(std::move(sub)), d_(std::move(diag)), du_(std::move(super)) {
  const std::size_t n = d_.size();
  if (n == 0 || dl_.size() + 1 != n || du_.size() + 1 != n)
    throw std::invalid_argument("TridiagLU: inconsistent band sizes");
  for (std::size_t j = 0; j < n; ++j) {
    double col = std::abs(d_[j]);
    if (j > 0) col += std::abs(du_[j - 1]);
    if (j + 1 < n) col += std::abs(dl_[j]);
    norm1_ = std::max(norm1_, col);
  }
  du2_.assign(n > 2 ? n - 2 : 0, cplx{});
  ipiv_.resize(n);
  for (std::size_t i = 0; i < n; ++i) ipiv_[i] = static_cast<int>(i);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (std::abs(d_[i]) >= std::abs(dl_[i])) {
      if (d_[i] != cplx{}) {
        const cplx fact = dl_[i] / d_[i];
        dl_[i] = fact;
        d_[i + 1] -= fact * du_[i];
      }
    } else {
      const cplx fact = d_[i] / dl_[i];
      d_[i] = dl_[i];
      dl_[i] = fact;
      const cplx temp = du_[i];
      du_[i] = d_[i + 1];
      d_[i + 1] = temp - fact * d_[i + 1];
      if (i + 2 < n) {
        du2_[i] = du_[i + 1];
        du_[i + 1] = -fact * du_[i + 1];
      }
      ipiv_[i] = static_cast<int>(i + 1);
    }
  }
  for (const cplx& p : d_)
    if (p == cplx{}) singular_ = true;
}

void TridiagLU::solve(std::span<cplx> b) const {
  const std::size_t n = d_.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (ipiv_[i] == static_cast<int>(i)) {
      b[i + 1] -= dl_[i] * b[i];
    } else {
      const cplx temp = b[i];
      b[i] = b[i + 1];
      b[i + 1] = temp - dl_[i] * b[i];
    }
  }
  b[n - 1] /= d_[n - 1];
  if (n > 1) b[n - 2] = (b[n - 2] - du_[n - 2] * b[n - 1]) / d_[n - 2];
  for (std::size_t k = n > 2 ? n - 2 : 0; k-- > 0;)
    b[k] = (b[k] - du_[k] * b[k + 1] - du2_[k] * b[k + 2]) / d_[k];
}

void TridiagLU::solve_adjoint(std::span<cplx> b) const {
  const std::size_t n = d_.size();
  b[0] /= std::conj(d_[0]);
  if (n > 1) b[1] = (b[1] - std::conj(du_[0]) * b[0]) / std::conj(d_[1]);
  for (std::size_t i = 2; i < n; ++i)
    b[i] = (b[i] - std::conj(du_[i - 1]) * b[i - 1] - std::conj(du2_[i - 2]) * b[i - 2]) /
           std::conj(d_[i]);
  for (std::size_t k = n - 1; k-- > 0;) {
    if (ipiv_[k] == static_cast<int>(k)) {
      b[k] -= std::conj(dl_[k]) * b[k + 1];
    } else {
      const cplx temp = b[k + 1];
      b[k + 1] = b[k] - std::conj(dl_[k]) * temp;
      b[k] = temp;
    }
  }
}

double TridiagLU::condition_estimate() const {
  if (singular_) return std::numeric_limits<double>::infinity();
  const std::size_t n = d_.size();
  std::vector<cplx> x(n, cplx(1.0 / static_cast<double>(n)));
  double est = 0.0;
  for (int iter = 0; iter < 5; ++iter) {
    std::vector<cplx> y = x;
    solve(y);
    double norm = 0.0;
    for (const cplx& v : y) norm += std::abs(v);
    if (iter > 0 && norm <= est) break;
    est = norm;
    std::vector<cplx> xi(n);
    for (std::size_t i = 0; i < n; ++i) xi[i] = std::abs(y[i]) > 0 ? y[i] / std::abs(y[i]) : cplx(1.0);
    solve_adjoint(xi);
    std::size_t jmax = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (std::abs(xi[i]) > std::abs(xi[jmax])) jmax = i;
    std::fill(x.begin(), x.end(), cplx{});
    x[jmax] = 1.0;
  }
  return est * norm1_;
}

}  // namespace measchrod
