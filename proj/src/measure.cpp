#include "measchrod/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "measchrod/quadrature.hpp"

namespace measchrod {

double eval_cubic(const Cubic& c, double t) { return c[0] + t * (c[1] + t * (c[2] + t * c[3])); }

double integrate_cubic(const Cubic& c, double t) {
  return t * (c[0] + t * (c[1] / 2.0 + t * (c[2] / 3.0 + t * c[3] / 4.0)));
}

namespace {

// Real roots of a*t^2 + b*t + c inside (lo, hi).
void quadratic_roots_in(double a, double b, double c, double lo, double hi,
                        std::vector<double>& out) {
  auto keep = [&](double r) {
    if (r > lo && r < hi) out.push_back(r);
  };
  if (a == 0.0) {
    if (b != 0.0) keep(-c / b);
    return;
  }
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return;
  const double sq = std::sqrt(disc);
  const double q = -0.5 * (b + std::copysign(sq, b));
  if (q != 0.0) {
    keep(q / a);
    keep(c / q);
  } else {
    keep(0.0);
  }
}

double bisect_root(const Cubic& c, double lo, double hi) {
  double flo = eval_cubic(c, lo);
  for (int i = 0; i < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = eval_cubic(c, mid);
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double integrate_abs_cubic(const Cubic& c, double t0, double t1) {
  if (t1 <= t0) return 0.0;
  // split at critical points so each piece is monotone, then at sign changes
  std::vector<double> cuts{t0};
  quadratic_roots_in(3.0 * c[3], 2.0 * c[2], c[1], t0, t1, cuts);
  cuts.push_back(t1);
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> pts{t0};
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i];
    const double b = cuts[i + 1];
    const double fa = eval_cubic(c, a);
    const double fb = eval_cubic(c, b);
    if ((fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0)) pts.push_back(bisect_root(c, a, b));
    pts.push_back(b);
  }
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    total += std::abs(integrate_cubic(c, pts[i + 1]) - integrate_cubic(c, pts[i]));
  return total;
}

PiecewiseDensity::PiecewiseDensity(std::vector<double> breakpoints, std::vector<Cubic> coeffs)
    : breakpoints_(std::move(breakpoints)), coeffs_(std::move(coeffs)) {
  if (breakpoints_.empty() && coeffs_.empty()) return;
  if (breakpoints_.size() != coeffs_.size() + 1)
    throw InvalidInput("density: need exactly one coefficient row per breakpoint interval");
  for (std::size_t i = 0; i + 1 < breakpoints_.size(); ++i)
    if (!(breakpoints_[i] < breakpoints_[i + 1]))
      throw InvalidInput("density: breakpoints must be strictly increasing");
  for (double b : breakpoints_)
    if (!std::isfinite(b)) throw InvalidInput("density: non-finite breakpoint");
}

PiecewiseDensity PiecewiseDensity::constant(double lo, double hi, double value) {
  return PiecewiseDensity({lo, hi}, {Cubic{value, 0.0, 0.0, 0.0}});
}

int PiecewiseDensity::piece_index(double x) const {
  if (empty() || x < breakpoints_.front() || x >= breakpoints_.back()) return -1;
  const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
  return static_cast<int>(it - breakpoints_.begin()) - 1;
}

double PiecewiseDensity::operator()(double x) const {
  const int k = piece_index(x);
  if (k < 0) return 0.0;
  return eval_cubic(coeffs_[k], x - breakpoints_[k]);
}

double PiecewiseDensity::cumulative(double x) const {
  double sum = 0.0;
  for (std::size_t k = 0; k < coeffs_.size(); ++k) {
    const double lo = breakpoints_[k];
    if (x <= lo) break;
    const double hi = std::min(x, breakpoints_[k + 1]);
    sum += integrate_cubic(coeffs_[k], hi - lo);
  }
  return sum;
}

double PiecewiseDensity::cumulative_abs(double x) const {
  double sum = 0.0;
  for (std::size_t k = 0; k < coeffs_.size(); ++k) {
    const double lo = breakpoints_[k];
    if (x <= lo) break;
    const double hi = std::min(x, breakpoints_[k + 1]);
    sum += integrate_abs_cubic(coeffs_[k], 0.0, hi - lo);
  }
  return sum;
}

double PiecewiseDensity::total_abs() const {
  return empty() ? 0.0 : cumulative_abs(breakpoints_.back());
}

SignedMeasure::SignedMeasure(std::vector<Atom> atoms, PiecewiseDensity density, Interval support)
    : density_(std::move(density)), support_(support) {
  if (!(support_.lo <= support_.hi) || !std::isfinite(support_.lo) || !std::isfinite(support_.hi))
    throw InvalidInput("measure: support must be a finite interval [a, b] with a <= b");
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& a, const Atom& b) { return a.position < b.position; });
  for (const Atom& a : atoms) {
    if (!std::isfinite(a.position) || !std::isfinite(a.weight))
      throw InvalidInput("measure: non-finite atom");
    if (!atoms_.empty() && a.position - atoms_.back().position < kMergeDistance) {
      atoms_.back().weight += a.weight;
      continue;
    }
    atoms_.push_back(a);
  }
  std::erase_if(atoms_, [](const Atom& a) { return a.weight == 0.0; });
  for (const Atom& a : atoms_)
    if (!support_.contains(a.position))
      throw InvalidInput("measure: atom at " + std::to_string(a.position) + " outside support");
  if (!density_.empty() && (density_.breakpoints().front() < support_.lo ||
                            density_.breakpoints().back() > support_.hi))
    throw InvalidInput("measure: density extends outside support");
}

SignedMeasure SignedMeasure::zero(double r0) { return SignedMeasure({}, {}, {-r0, r0}); }

SignedMeasure SignedMeasure::point_masses(std::vector<Atom> atoms) {
  double r = 1.0;
  for (const Atom& a : atoms) r = std::max(r, std::abs(a.position));
  return SignedMeasure(std::move(atoms), {}, {-r, r});
}

double SignedMeasure::radius() const { return std::max(std::abs(support_.lo), std::abs(support_.hi)); }

SignedMeasure SignedMeasure::plus(const SignedMeasure& other) const {
  std::vector<Atom> atoms = atoms_;
  atoms.insert(atoms.end(), other.atoms_.begin(), other.atoms_.end());
  PiecewiseDensity density = density_;
  if (density_.empty()) {
    density = other.density_;
  } else if (!other.density_.empty()) {
    // concatenate, inserting a zero piece between disjoint pieces
    const auto& a = density_.breakpoints().front() < other.density_.breakpoints().front()
                        ? density_
                        : other.density_;
    const auto& b = &a == &density_ ? other.density_ : density_;
    if (b.breakpoints().front() < a.breakpoints().back())
      throw InvalidInput("measure: overlapping densities cannot be added");
    std::vector<double> bp = a.breakpoints();
    std::vector<Cubic> cf = a.coeffs();
    if (b.breakpoints().front() > bp.back()) {
      cf.push_back(Cubic{});
      bp.push_back(b.breakpoints().front());
    }
    for (std::size_t k = 0; k < b.coeffs().size(); ++k) {
      cf.push_back(b.coeffs()[k]);
      bp.push_back(b.breakpoints()[k + 1]);
    }
    density = PiecewiseDensity(std::move(bp), std::move(cf));
  }
  const Interval support{std::min(support_.lo, other.support_.lo),
                         std::max(support_.hi, other.support_.hi)};
  return SignedMeasure(std::move(atoms), std::move(density), support);
}

double atomic_variation(const SignedMeasure& m) {
  double s = 0.0;
  for (const Atom& a : m.atoms()) s += std::abs(a.weight);
  return s;
}

double total_variation(const SignedMeasure& m) {
  return atomic_variation(m) + m.density().total_abs();
}

double cdf(const SignedMeasure& m, double x, Side side) {
  double s = m.density().cumulative(x);
  for (const Atom& a : m.atoms()) {
    if (a.position < x || (side == Side::Right && a.position == x))
      s += a.weight;
    else
      break;
  }
  return s;
}

double mass(const SignedMeasure& m, double a, double b) {
  if (b <= a) return 0.0;
  double s = m.density().cumulative(b) - m.density().cumulative(a);
  for (const Atom& at : m.atoms())
    if (at.position > a && at.position <= b) s += at.weight;
  return s;
}

double stieltjes(const SignedMeasure& m, const std::function<double(double)>& phi, double a,
                 double b, std::span<const double> extra_breaks) {
  if (b <= a) return 0.0;
  double s = 0.0;
  for (const Atom& at : m.atoms())
    if (at.position > a && at.position <= b) s += phi(at.position) * at.weight;
  const auto& dens = m.density();
  if (dens.empty()) return s;
  const double lo = std::max(a, dens.breakpoints().front());
  const double hi = std::min(b, dens.breakpoints().back());
  if (hi <= lo) return s;
  std::vector<double> cuts{lo, hi};
  for (double x : dens.breakpoints())
    if (x > lo && x < hi) cuts.push_back(x);
  for (const Atom& at : m.atoms())
    if (at.position > lo && at.position < hi) cuts.push_back(at.position);
  for (double x : extra_breaks)
    if (x > lo && x < hi) cuts.push_back(x);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const int k = dens.piece_index(0.5 * (cuts[i] + cuts[i + 1]));
    if (k < 0) continue;
    const Cubic& c = dens.coeffs()[k];
    const double base = dens.breakpoints()[k];
    s += integrate_gl([&](double x) { return phi(x) * eval_cubic(c, x - base); }, cuts[i],
                      cuts[i + 1], 16, 1);
  }
  return s;
}

BVFunction BVFunction::cdf_of(SignedMeasure m) {
  const double anchor = m.support().lo - 1.0;
  return BVFunction{0.0, std::move(m), anchor};
}

BVValue eval_bv(const BVFunction& f, double x) {
  const double ref = cdf(f.derivative, f.anchor, Side::Right);
  const double right = f.base + cdf(f.derivative, x, Side::Right) - ref;
  const double left = f.base + cdf(f.derivative, x, Side::Left) - ref;
  return {left, right, 0.5 * (left + right)};
}

double smoothed_atoms(const SignedMeasure& m, double eta, double x) {
  if (!(eta > 0.0)) throw InvalidInput("smoothed_atoms: eta must be positive");
  double s = 0.0;
  for (const Atom& a : m.atoms()) {
    const double t = (x - a.position) / eta;
    s += std::abs(a.weight) * std::exp(-t * t);
  }
  return s / (std::sqrt(std::numbers::pi) * eta);
}

double smoothed_atoms_cumulative(const SignedMeasure& m, double eta, double x) {
  if (!(eta > 0.0)) throw InvalidInput("smoothed_atoms: eta must be positive");
  double s = 0.0;
  for (const Atom& a : m.atoms()) s += std::abs(a.weight) * 0.5 * std::erfc(-(x - a.position) / eta);
  return s;
}

SignedMeasure cantor_approx(int level, double mass) {
  if (level < 1 || level > 20)
    throw InvalidInput("cantor_approx: level must be in [1, 20], got " + std::to_string(level));
  std::vector<double> lefts{0.0};
  double width = 1.0;
  for (int l = 0; l < level; ++l) {
    width /= 3.0;
    std::vector<double> next;
    next.reserve(lefts.size() * 2);
    for (double x : lefts) {
      next.push_back(x);
      next.push_back(x + 2.0 * width);
    }
    lefts = std::move(next);
  }
  const double w = mass / static_cast<double>(lefts.size());
  std::vector<Atom> atoms;
  atoms.reserve(lefts.size());
  for (double x : lefts) atoms.push_back({x, w});
  return SignedMeasure(std::move(atoms), {}, {0.0, 1.0});
}

}  // namespace measchrod
