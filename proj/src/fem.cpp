#include "measchrod/fem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "measchrod/quadrature.hpp"

namespace measchrod {

double Grid::max_spacing() const {
  double d = 0.0;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) d = std::max(d, nodes[i + 1] - nodes[i]);
  return d;
}

double Grid::min_spacing() const {
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) d = std::min(d, nodes[i + 1] - nodes[i]);
  return d;
}

std::optional<std::size_t> Grid::find(double x) const {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), x - 1e-12);
  if (it != nodes.end() && std::abs(*it - x) <= 1e-12)
    return static_cast<std::size_t>(it - nodes.begin());
  return std::nullopt;
}

Grid build_grid(Interval support, double half_width, double resolution,
                const std::vector<double>& required) {
  if (!(half_width > 0.0)) throw InvalidInput("build_grid: box half-width must be positive");
  if (!(resolution > 0.0)) throw InvalidInput("build_grid: resolution must be positive");
  if (support.lo < -half_width || support.hi > half_width)
    throw InvalidInput("build_grid: support [" + std::to_string(support.lo) + ", " +
                       std::to_string(support.hi) + "] exceeds box half-width " +
                       std::to_string(half_width));
  const auto cells = static_cast<std::size_t>(std::ceil(2.0 * half_width / resolution - 1e-9));
  const double d = 2.0 * half_width / static_cast<double>(cells);

  struct Node {
    double x;
    bool fixed;
  };
  std::vector<Node> pts;
  pts.reserve(cells + 1 + required.size());
  for (std::size_t i = 0; i <= cells; ++i)
    pts.push_back({i == cells ? half_width : -half_width + static_cast<double>(i) * d, i == 0 || i == cells});
  for (double r : required) {
    if (!(r > -half_width && r < half_width))
      throw InvalidInput("build_grid: atom at " + std::to_string(r) + " lies outside the box");
    pts.push_back({r, true});
  }
  std::sort(pts.begin(), pts.end(), [](const Node& a, const Node& b) {
    return a.x < b.x || (a.x == b.x && a.fixed > b.fixed);
  });
  std::vector<Node> merged;
  for (const Node& p : pts) {
    if (!merged.empty() && p.x - merged.back().x <= 1e-12) {
      if (p.fixed && !merged.back().fixed) merged.back() = p;
      merged.back().fixed = merged.back().fixed || p.fixed;
      continue;
    }
    merged.push_back(p);
  }
  // drop free nodes crowding an inserted one, keeping spacing <= resolution
  std::vector<Node> out;
  out.reserve(merged.size());
  for (std::size_t i = 0; i < merged.size(); ++i) {
    const Node& p = merged[i];
    if (!p.fixed && !out.empty() && i + 1 < merged.size()) {
      const Node& prev = out.back();
      const Node& next = merged[i + 1];
      const bool crowded = (prev.fixed && p.x - prev.x < 0.1 * d) || (next.fixed && next.x - p.x < 0.1 * d);
      if (crowded && next.x - prev.x <= resolution) continue;
    }
    out.push_back(p);
  }
  Grid g;
  g.nodes.reserve(out.size());
  for (const Node& p : out) g.nodes.push_back(p.x);
  return g;
}

Grid build_grid(const SignedMeasure& m, double half_width, double resolution) {
  std::vector<double> required;
  for (const Atom& a : m.atoms()) required.push_back(a.position);
  for (double b : m.density().breakpoints()) required.push_back(b);
  return build_grid(m.support(), half_width, resolution, required);
}

cplx H1Function::operator()(double x) const {
  const auto& n = grid->nodes;
  if (x < n.front() || x > n.back()) return 0.0;
  auto it = std::upper_bound(n.begin(), n.end(), x);
  if (it == n.end()) return values.back();
  const std::size_t i = static_cast<std::size_t>(it - n.begin()) - 1;
  const double t = (x - n[i]) / (n[i + 1] - n[i]);
  return (1.0 - t) * values[i] + t * values[i + 1];
}

double H1Function::norm2_squared() const {
  const auto& n = grid->nodes;
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < n.size(); ++i) {
    const double d = n[i + 1] - n[i];
    s += d / 3.0 * (std::norm(values[i]) + std::norm(values[i + 1]) +
                    std::real(std::conj(values[i]) * values[i + 1]));
  }
  return s;
}

double H1Function::derivative_norm2_squared() const {
  const auto& n = grid->nodes;
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < n.size(); ++i) {
    const double d = n[i + 1] - n[i];
    s += std::norm(values[i + 1] - values[i]) / d;
  }
  return s;
}

double H1Function::sup_norm() const {
  double s = 0.0;
  for (const cplx& v : values) s = std::max(s, std::abs(v));
  return s;
}

H1Function interpolate(const GridPtr& grid, const std::function<cplx(double)>& f) {
  H1Function u{grid, {}};
  u.values.reserve(grid->size());
  for (double x : grid->nodes) u.values.push_back(f(x));
  return u;
}

DiscreteOperator::DiscreteOperator(const SignedMeasure& m, double h, GridPtr grid)
    : h_(h), tv_(measchrod::total_variation(m)), grid_(std::move(grid)) {
  if (!(h > 0.0)) throw InvalidInput("assemble: h must be positive");
  const auto& x = grid_->nodes;
  const std::size_t n = x.size();
  if (n < 3) throw InvalidInput("assemble: grid needs at least 3 nodes");
  auto zero = [n] { return SymTridiag{std::vector<double>(n, 0.0), std::vector<double>(n - 1, 0.0)}; };
  matrices_.stiffness = zero();
  matrices_.mass = zero();
  matrices_.potential = zero();
  auto& s = matrices_.stiffness;
  auto& mm = matrices_.mass;
  auto& v = matrices_.potential;
  const auto& gl = gauss_legendre(3);
  const auto& dens = m.density();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double d = x[i + 1] - x[i];
    s.diag[i] += 1.0 / d;
    s.diag[i + 1] += 1.0 / d;
    s.off[i] -= 1.0 / d;
    mm.diag[i] += d / 3.0;
    mm.diag[i + 1] += d / 3.0;
    mm.off[i] += d / 6.0;
    if (dens.empty()) continue;
    const int k = dens.piece_index(0.5 * (x[i] + x[i + 1]));
    if (k < 0) continue;
    const Cubic& c = dens.coeffs()[k];
    const double base = dens.breakpoints()[k];
    double v00 = 0.0, v01 = 0.0, v11 = 0.0;
    for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
      const double t = 0.5 * (gl.nodes[q] + 1.0);
      const double xq = x[i] + t * d;
      const double wq = 0.5 * d * gl.weights[q] * eval_cubic(c, xq - base);
      v00 += wq * (1.0 - t) * (1.0 - t);
      v01 += wq * (1.0 - t) * t;
      v11 += wq * t * t;
    }
    v.diag[i] += v00;
    v.diag[i + 1] += v11;
    v.off[i] += v01;
  }
  for (const Atom& a : m.atoms()) {
    const auto idx = grid_->find(a.position);
    if (!idx) throw InvalidInput("assemble: atom at " + std::to_string(a.position) + " is not a grid node");
    v.diag[*idx] += a.weight;
  }
  if (!dens.empty() && (dens.breakpoints().front() < x.front() || dens.breakpoints().back() > x.back()))
    throw InvalidInput("assemble: density extends outside the box");
  a_ = zero();
  for (std::size_t i = 0; i < n; ++i) a_.diag[i] = h * h * s.diag[i] + v.diag[i];
  for (std::size_t i = 0; i + 1 < n; ++i) a_.off[i] = h * h * s.off[i] + v.off[i];
  a_int_ = a_.sub(1, n - 2);
  m_int_ = mm.sub(1, n - 2);
}

double DiscreteOperator::form(const H1Function& u) const { return a_.quadratic_form(u.values); }

DiscreteOperator assemble(const SignedMeasure& m, double h, const GridPtr& grid) {
  return DiscreteOperator(m, h, grid);
}

namespace {

TridiagLU factor_shifted(const SymTridiag& a, const SymTridiag& m, cplx z, cplx corner) {
  const std::size_t n = a.size();
  std::vector<cplx> diag(n), off(n - 1);
  for (std::size_t i = 0; i < n; ++i) diag[i] = a.diag[i] - z * m.diag[i];
  for (std::size_t i = 0; i + 1 < n; ++i) off[i] = a.off[i] - z * m.off[i];
  diag.front() += corner;
  diag.back() += corner;
  return TridiagLU(off, diag, off);
}

cplx radiation_wavenumber(cplx z, double h, int side) {
  cplx k = std::sqrt(z) / h;
  if (z.imag() == 0.0 && z.real() > 0.0) return side >= 0 ? k : -k;
  if (k.imag() < 0.0) k = -k;
  return k;
}

}  // namespace

ShiftedSystem::ShiftedSystem(const DiscreteOperator& op, cplx z, Boundary boundary, int side)
    : boundary_(boundary),
      first_(boundary == Boundary::Dirichlet ? 1 : 0),
      z_(z),
      k_(boundary == Boundary::Outgoing ? radiation_wavenumber(z, op.h(), side) : cplx{}),
      a_(boundary == Boundary::Dirichlet ? op.interior_operator() : op.operator_matrix()),
      mass_(boundary == Boundary::Dirichlet ? op.interior_mass() : op.matrices().mass),
      corner_(boundary == Boundary::Outgoing ? cplx(0.0, -1.0) * op.h() * op.h() * k_ : cplx{}),
      lu_(factor_shifted(a_, mass_, z, corner_)),
      cond_(lu_.condition_estimate()) {}

void ShiftedSystem::solve(std::span<cplx> b) const { lu_.solve(b); }
void ShiftedSystem::solve_adjoint(std::span<cplx> b) const { lu_.solve_adjoint(b); }

void ShiftedSystem::apply(std::span<const cplx> x, std::span<cplx> y) const {
  const std::size_t n = size();
  for (std::size_t i = 0; i < n; ++i) {
    cplx s = (a_.diag[i] - z_ * mass_.diag[i]) * x[i];
    if (i > 0) s += (a_.off[i - 1] - z_ * mass_.off[i - 1]) * x[i - 1];
    if (i + 1 < n) s += (a_.off[i] - z_ * mass_.off[i]) * x[i + 1];
    y[i] = s;
  }
  y[0] += corner_ * x[0];
  y[n - 1] += corner_ * x[n - 1];
}

void ShiftedSystem::apply_mass(std::span<const cplx> x, std::span<cplx> y) const {
  mass_.apply(x, y);
}

namespace {

double vec_norm(std::span<const cplx> v) {
  double s = 0.0;
  for (const cplx& x : v) s += std::norm(x);
  return std::sqrt(s);
}

}  // namespace

H1Function apply_resolvent(const DiscreteOperator& op, cplx z, const H1Function& f,
                           Boundary boundary, int side) {
  if (f.grid.get() != op.grid().get() && f.grid->nodes != op.grid()->nodes)
    throw InvalidInput("apply_resolvent: f lives on a different grid");
  const ShiftedSystem sys(op, z, boundary, side);
  if (sys.condition_estimate() > 1e14 || !std::isfinite(sys.condition_estimate()))
    throw SingularSystem("apply_resolvent: A - zM is singular or ill-conditioned (condition ~ " +
                             std::to_string(sys.condition_estimate()) + ")",
                         sys.condition_estimate());
  const std::size_t n = op.grid()->size();
  std::vector<cplx> mf(n);
  op.matrices().mass.apply(f.values, mf);
  const std::size_t first = sys.first_node();
  const std::size_t count = sys.size();
  std::vector<cplx> rhs(mf.begin() + first, mf.begin() + first + count);
  std::vector<cplx> u = rhs;
  sys.solve(u);
  const double scale = std::max(vec_norm(rhs), std::numeric_limits<double>::min());
  std::vector<cplx> r(count);
  for (int refine = 0; refine < 3; ++refine) {
    sys.apply(u, r);
    for (std::size_t i = 0; i < count; ++i) r[i] = rhs[i] - r[i];
    if (vec_norm(r) <= 1e-10 * scale) break;
    if (refine == 2)
      throw SingularSystem("apply_resolvent: residual above 1e-10 after refinement (condition ~ " +
                               std::to_string(sys.condition_estimate()) + ")",
                           sys.condition_estimate());
    sys.solve(r);
    for (std::size_t i = 0; i < count; ++i) u[i] += r[i];
  }
  H1Function out{op.grid(), std::vector<cplx>(n, cplx{})};
  std::copy(u.begin(), u.end(), out.values.begin() + first);
  return out;
}

namespace {

double spectral_lower_bound(const DiscreteOperator& op) {
  const double tv = op.total_variation();
  return -(tv * tv) / (2.0 * op.h() * op.h()) - 1.0;
}

double bisect_eigenvalue(const SymTridiag& a, const SymTridiag& m, int index, double lo, double hi) {
  for (int it = 0; it < 200; ++it) {
    if (hi - lo <= 1e-14 * std::max(1.0, std::abs(lo) + std::abs(hi))) break;
    const double mid = 0.5 * (lo + hi);
    if (count_eigenvalues_below(a, m, mid) > index)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

std::vector<double> eigenvalues_below(const DiscreteOperator& op, double threshold) {
  const auto& a = op.interior_operator();
  const auto& m = op.interior_mass();
  double lo = spectral_lower_bound(op);
  while (count_eigenvalues_below(a, m, lo) > 0) lo = 2.0 * lo - 1.0;
  const int count = count_eigenvalues_below(a, m, threshold);
  std::vector<double> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) out.push_back(bisect_eigenvalue(a, m, k, lo, threshold));
  return out;
}

std::vector<Eigenpair> eigenpairs_below(const DiscreteOperator& op, double threshold) {
  const auto values = eigenvalues_below(op, threshold);
  std::vector<Eigenpair> out;
  const auto& mass = op.interior_mass();
  const std::size_t n = op.grid()->size();
  for (double lambda : values) {
    const double shift = lambda + 1e-9 * std::max(1.0, std::abs(lambda));
    const ShiftedSystem sys(op, shift, Boundary::Dirichlet);
    std::vector<cplx> x(sys.size(), cplx(1.0));
    std::vector<cplx> mx(sys.size());
    for (int it = 0; it < 4; ++it) {
      mass.apply(x, mx);
      sys.solve(mx);
      x = mx;
      mass.apply(x, mx);
      double nrm = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) nrm += std::real(std::conj(x[i]) * mx[i]);
      nrm = std::sqrt(nrm);
      for (auto& v : x) v = cplx(v.real() / nrm, 0.0);
    }
    // orthogonalize against previously found vectors (degenerate levels)
    for (const Eigenpair& prev : out) {
      mass.apply(x, mx);
      double c = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) c += prev.vector.values[i + 1].real() * mx[i].real();
      for (std::size_t i = 0; i < x.size(); ++i) x[i] -= c * prev.vector.values[i + 1];
    }
    double sum = 0.0;
    for (const auto& v : x) sum += v.real();
    if (sum < 0.0)
      for (auto& v : x) v = -v;
    H1Function u{op.grid(), std::vector<cplx>(n, cplx{})};
    std::copy(x.begin(), x.end(), u.values.begin() + 1);
    out.push_back({lambda, std::move(u)});
  }
  return out;
}

double largest_eigenvalue(const DiscreteOperator& op) {
  const auto& a = op.interior_operator();
  const auto& m = op.interior_mass();
  const int n = static_cast<int>(a.size());
  double hi = 1.0;
  while (count_eigenvalues_below(a, m, hi) < n) hi *= 2.0;
  double lo = spectral_lower_bound(op);
  while (count_eigenvalues_below(a, m, lo) > 0) lo = 2.0 * lo - 1.0;
  return bisect_eigenvalue(a, m, n - 1, lo, hi);
}

FormBoundsReport form_bounds_check(const DiscreteOperator& op, const H1Function& u) {
  const double tv = op.total_variation();
  const double h2 = op.h() * op.h();
  const double l2 = op.matrices().mass.quadratic_form(u.values);
  const double d2 = op.matrices().stiffness.quadratic_form(u.values);
  const double c = tv * tv / (2.0 * h2);
  return {op.form(u), -c * l2 + 0.5 * h2 * d2, c * l2 + 1.5 * h2 * d2};
}

double graph_norm_squared(const DiscreteOperator& op, const H1Function& u) {
  const std::size_t n = op.grid()->size();
  std::vector<cplx> au(n);
  op.operator_matrix().apply(u.values, au);
  std::vector<cplx> g(au.begin() + 1, au.end() - 1);
  const TridiagCholesky chol(op.interior_mass());
  std::vector<cplx> mg = g;
  chol.solve(mg);
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) s += std::real(std::conj(g[i]) * mg[i]);
  return s + op.matrices().mass.quadratic_form(u.values);
}

}  // namespace measchrod
