#pragma once

#include <complex>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "measchrod/measure.hpp"
#include "measchrod/tridiag.hpp"

namespace measchrod {

/// Sorted nodes on [-L, L]; every atom (and density breakpoint) inside the
/// box is a node.
struct Grid {
  std::vector<double> nodes;

  [[nodiscard]] std::size_t size() const { return nodes.size(); }
  [[nodiscard]] double half_width() const { return nodes.back(); }
  [[nodiscard]] double max_spacing() const;
  [[nodiscard]] double min_spacing() const;
  /// Index of the node equal to x (within 1e-12), if any.
  [[nodiscard]] std::optional<std::size_t> find(double x) const;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Uniform nodes of spacing <= resolution on [-L, L], with `required`
/// positions inserted. Uniform nodes closer than a tenth of a cell to an
/// inserted node are dropped when that keeps the spacing bound.
Grid build_grid(Interval support, double half_width, double resolution,
                const std::vector<double>& required);

/// Grid for a measure: its atoms and density breakpoints are nodes.
Grid build_grid(const SignedMeasure& m, double half_width, double resolution);

/// Tridiagonal matrices of the hat basis on all grid nodes (boundary included).
struct FormMatrices {
  SymTridiag stiffness;  // int phi_i' phi_j'
  SymTridiag mass;       // int phi_i phi_j
  SymTridiag potential;  // int phi_i phi_j dV
};

enum class Boundary {
  Dirichlet,  // u(+-L) = 0
  Outgoing,   // exact radiation condition u' = +-ik u at +-L (V = 0 near the walls)
};

/// Piecewise-linear function on a grid (the continuous representative).
struct H1Function {
  GridPtr grid;
  std::vector<cplx> values;

  [[nodiscard]] cplx operator()(double x) const;
  /// Squared L2 norm (exact for the interpolant).
  [[nodiscard]] double norm2_squared() const;
  /// Squared L2 norm of u'.
  [[nodiscard]] double derivative_norm2_squared() const;
  [[nodiscard]] double sup_norm() const;
};

H1Function interpolate(const GridPtr& grid, const std::function<cplx(double)>& f);

/// P(h) = -h^2 d^2 + V realized through its quadratic form on hat functions.
class DiscreteOperator {
 public:
  DiscreteOperator(const SignedMeasure& m, double h, GridPtr grid);

  [[nodiscard]] double h() const { return h_; }
  [[nodiscard]] const GridPtr& grid() const { return grid_; }
  [[nodiscard]] const FormMatrices& matrices() const { return matrices_; }
  [[nodiscard]] double total_variation() const { return tv_; }
  /// A = h^2 stiffness + potential on all nodes.
  [[nodiscard]] const SymTridiag& operator_matrix() const { return a_; }
  /// A and mass restricted to interior nodes (Dirichlet problem).
  [[nodiscard]] const SymTridiag& interior_operator() const { return a_int_; }
  [[nodiscard]] const SymTridiag& interior_mass() const { return m_int_; }

  /// q(u, u) = u^H A u.
  [[nodiscard]] double form(const H1Function& u) const;

 private:
  double h_;
  double tv_;
  GridPtr grid_;
  FormMatrices matrices_;
  SymTridiag a_;
  SymTridiag a_int_;
  SymTridiag m_int_;
};

DiscreteOperator assemble(const SignedMeasure& m, double h, const GridPtr& grid);

/// Raised when (A - z M) is singular or too ill-conditioned to solve.
class SingularSystem : public std::runtime_error {
 public:
  SingularSystem(const std::string& what, double condition)
      : std::runtime_error(what), condition(condition) {}
  double condition;
};

/// Factorization of K = A - z M (+ radiation terms), reusable across
/// right-hand sides. Vectors are indexed by the active nodes: interior nodes
/// for Dirichlet, all nodes for Outgoing.
class ShiftedSystem {
 public:
  /// `side` picks the radiation branch when Im z = 0: +1 means z + i0.
  ShiftedSystem(const DiscreteOperator& op, cplx z, Boundary boundary = Boundary::Dirichlet,
                int side = +1);

  [[nodiscard]] std::size_t size() const { return lu_.size(); }
  [[nodiscard]] std::size_t first_node() const { return first_; }
  [[nodiscard]] Boundary boundary() const { return boundary_; }
  /// Exterior wavenumber k with Im k >= 0 (Outgoing only).
  [[nodiscard]] cplx wavenumber() const { return k_; }
  [[nodiscard]] double condition_estimate() const { return cond_; }

  void solve(std::span<cplx> b) const;
  void solve_adjoint(std::span<cplx> b) const;
  /// y = K x
  void apply(std::span<const cplx> x, std::span<cplx> y) const;
  /// y = M x on active nodes.
  void apply_mass(std::span<const cplx> x, std::span<cplx> y) const;
  [[nodiscard]] const SymTridiag& active_mass() const { return mass_; }

 private:
  Boundary boundary_;
  std::size_t first_;
  cplx z_;
  cplx k_;
  SymTridiag a_;
  SymTridiag mass_;
  cplx corner_ = 0.0;
  TridiagLU lu_;
  double cond_;
};

/// u solving (A - z M) u = M f. Residual is checked against 1e-10 |M f|.
H1Function apply_resolvent(const DiscreteOperator& op, cplx z, const H1Function& f,
                           Boundary boundary = Boundary::Dirichlet, int side = +1);

/// Generalized eigenvalues of the Dirichlet pencil (A, M) strictly below
/// `threshold`, ascending.
std::vector<double> eigenvalues_below(const DiscreteOperator& op, double threshold);

struct Eigenpair {
  double value = 0.0;
  H1Function vector;  // M-normalized, real, positive sum
};

std::vector<Eigenpair> eigenpairs_below(const DiscreteOperator& op, double threshold);

/// Largest generalized eigenvalue of the Dirichlet pencil.
double largest_eigenvalue(const DiscreteOperator& op);

struct FormBoundsReport {
  double form = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  [[nodiscard]] bool holds(double tol = 1e-10) const {
    const double scale = 1.0 + std::abs(lower) + std::abs(upper);
    return lower <= form + tol * scale && form <= upper + tol * scale;
  }
};

/// -(|V|^2/2h^2)|u|^2 + (h^2/2)|u'|^2 <= q(u,u) <= (|V|^2/2h^2)|u|^2 + (3h^2/2)|u'|^2.
FormBoundsReport form_bounds_check(const DiscreteOperator& op, const H1Function& u);

/// Graph norm |A u|^2 + |u|^2 in the mass inner product (A u represented
/// through M^{-1} A u).
double graph_norm_squared(const DiscreteOperator& op, const H1Function& u);

}  // namespace measchrod
