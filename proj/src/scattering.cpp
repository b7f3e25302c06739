#include "measchrod/scattering.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <limits>

#include "measchrod/krylov.hpp"
#include "measchrod/parallel.hpp"

namespace measchrod {

namespace {

constexpr cplx kI{0.0, 1.0};

// Dormand-Prince 5(4) tableau.
constexpr double kC[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
constexpr double kB[7] = {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0.0};
constexpr double kBStar[7] = {5179.0 / 57600,    0.0,           7571.0 / 16695, 393.0 / 640,
                              -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

// State: T = [[a, b], [c, d]] and its lambda-derivative.
using State = std::array<cplx, 8>;

State rhs(const State& y, cplx q, cplx two_lambda) {
  return {y[2], y[3], q * y[0], q * y[1], y[6], y[7], q * y[4] - two_lambda * y[0],
          q * y[5] - two_lambda * y[1]};
}

}  // namespace

TransferMatrix atom_transfer(cplx /*lambda*/, double weight) { return {1.0, 0.0, weight, 1.0}; }

TransferJet free_transfer(cplx lambda, double length) {
  const double l = length;
  const cplx t = lambda * l;
  const cplx c = std::cos(t);
  const cplx s = std::sin(t);
  cplx sinc_l;  // sin(lambda l) / lambda
  cplx dsinc;   // its lambda-derivative
  if (std::abs(t) < 1e-3) {
    const cplx t2 = t * t;
    sinc_l = l * (1.0 - t2 / 6.0 + t2 * t2 / 120.0);
    dsinc = l * l * l * lambda * (-1.0 / 3.0 + t2 / 30.0);
  } else {
    sinc_l = s / lambda;
    dsinc = (t * c - s) / (lambda * lambda);
  }
  TransferJet j;
  j.value = {c, sinc_l, -lambda * s, c};
  j.derivative = {-l * s, dsinc, -s - t * c, -l * s};
  return j;
}

TransferJet density_transfer(cplx lambda, const Cubic& cubic, double base, double x0, double x1) {
  constexpr double rtol = 1e-10;
  constexpr double atol = 1e-12;
  const double len = x1 - x0;
  State y{1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0};
  if (len <= 0.0) return {};
  const cplx l2 = lambda * lambda;
  const cplx two_lambda = 2.0 * lambda;
  auto f = [&](double x, const State& s) { return rhs(s, eval_cubic(cubic, x - base) - l2, two_lambda); };

  double x = x0;
  double h = std::min(len, 0.1 / std::max(1.0, std::abs(lambda)));
  std::array<State, 7> k;
  k[0] = f(x, y);
  while (x < x1) {
    if (x + h > x1) h = x1 - x;
    if (h < 1e-14 * std::max(1.0, len)) throw StepUnderflow("density_transfer: step size underflow");
    for (int st = 1; st < 7; ++st) {
      State tmp = y;
      for (int j = 0; j < st; ++j)
        if (kA[st][j] != 0.0)
          for (int i = 0; i < 8; ++i) tmp[i] += h * kA[st][j] * k[j][i];
      k[st] = f(x + kC[st] * h, tmp);
    }
    State yn = y;
    double err = 0.0;
    for (int i = 0; i < 8; ++i) {
      cplx e = 0.0;
      for (int st = 0; st < 7; ++st) {
        yn[i] += h * kB[st] * k[st][i];
        e += h * (kB[st] - kBStar[st]) * k[st][i];
      }
      const double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(yn[i]));
      err = std::max(err, std::abs(e) / sc);
    }
    if (err <= 1.0) {
      x += h;
      y = yn;
      k[0] = k[6];  // first-same-as-last
    }
    const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
    h *= fac;
  }
  TransferJet j;
  j.value = {y[0], y[1], y[2], y[3]};
  j.derivative = {y[4], y[5], y[6], y[7]};
  return j;
}

Scatterer::Scatterer(SignedMeasure m) : m_(std::move(m)) {
  std::vector<double> pts;
  for (const Atom& a : m_.atoms()) pts.push_back(a.position);
  for (double b : m_.density().breakpoints()) pts.push_back(b);
  pts.push_back(m_.support().lo);
  pts.push_back(m_.support().hi);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  left_ = pts.front();
  right_ = pts.back();
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double mid = 0.5 * (pts[i] + pts[i + 1]);
    segments_.push_back({pts[i], pts[i + 1], m_.density().empty() ? -1 : m_.density().piece_index(mid)});
  }
}

double Scatterer::atom_weight_at(double x) const {
  const auto& at = m_.atoms();
  auto it = std::lower_bound(at.begin(), at.end(), x,
                             [](const Atom& a, double v) { return a.position < v; });
  return (it != at.end() && it->position == x) ? it->weight : 0.0;
}

TransferJet Scatterer::transfer(cplx lambda, double x0, double x1) const {
  // continuous part between y0 < y1 (no atoms)
  auto smooth = [&](double y0, double y1) {
    TransferJet t;
    if (y1 <= y0) return t;
    double cur = y0;
    auto step = [&](double to, int piece) {
      if (to <= cur) return;
      if (piece < 0) {
        t = free_transfer(lambda, to - cur) * t;
      } else {
        const double base = m_.density().breakpoints()[piece];
        t = density_transfer(lambda, m_.density().coeffs()[piece], base, cur, to) * t;
      }
      cur = to;
    };
    if (cur < left_) step(std::min(y1, left_), -1);
    if (cur < y1 && cur < right_) {
      auto it = std::upper_bound(segments_.begin(), segments_.end(), cur,
                                 [](double v, const Segment& s) { return v < s.x1; });
      for (; it != segments_.end() && cur < y1; ++it) step(std::min(y1, it->x1), it->piece);
    }
    if (cur < y1) step(y1, -1);
    return t;
  };

  TransferJet total;
  const auto& at = m_.atoms();
  auto it = std::lower_bound(at.begin(), at.end(), x0,
                             [](const Atom& a, double v) { return a.position < v; });
  double cur = x0;
  for (; it != at.end() && it->position < x1; ++it) {
    total = smooth(cur, it->position) * total;
    total = TransferJet{atom_transfer(lambda, it->weight), {0.0, 0.0, 0.0, 0.0}} * total;
    cur = it->position;
  }
  return smooth(cur, x1) * total;
}

std::pair<cplx, cplx> Scatterer::wronskian_jet(cplx lambda) const {
  // Both Jost solutions are carried to the middle of the support, which keeps
  // exponential growth for Im lambda < 0 at e^{|Im lambda| width}.
  const double xl = left_;
  const double xr = right_;
  const double xm = 0.5 * (xl + xr);
  const cplx el = std::exp(-kI * lambda * xl);
  const CauchyData fm{el, -kI * lambda * el};
  const CauchyData dfm{-kI * xl * el, (-kI - lambda * xl) * el};
  const TransferJet tl = transfer(lambda, xl, xm);
  const CauchyData m = tl.value(fm);
  const CauchyData ma = tl.derivative(fm), mb = tl.value(dfm);
  const CauchyData dm{ma.u + mb.u, ma.du + mb.du};

  // left-limit data of f_+ at xr (an atom there is undone)
  const double cr = atom_weight_at(xr);
  const cplx er = std::exp(kI * lambda * xr);
  const CauchyData fp0{er, (kI * lambda - cr) * er};
  const CauchyData dfp0{kI * xr * er, (kI + (kI * lambda - cr) * kI * xr) * er};
  const TransferJet tr = transfer(lambda, xm, xr).inverse();
  const CauchyData p = tr.value(fp0);
  const CauchyData pa = tr.derivative(fp0), pb = tr.value(dfp0);
  const CauchyData dp{pa.u + pb.u, pa.du + pb.du};

  const cplx w = m.u * p.du - m.du * p.u;
  const cplx dw = dm.u * p.du + m.u * dp.du - dm.du * p.u - m.du * dp.u;
  return {w, dw};
}

JostPair Scatterer::jost(cplx lambda, const std::vector<double>& nodes) const {
  if (!std::is_sorted(nodes.begin(), nodes.end()) || nodes.empty())
    throw InvalidInput("jost: nodes must be non-empty and sorted");
  const std::size_t n = nodes.size();
  JostPair jp;
  jp.lambda = lambda;
  jp.nodes = nodes;
  jp.minus.resize(n);
  jp.minus_prime.resize(n);
  jp.plus.resize(n);
  jp.plus_prime.resize(n);
  jp.wronskian = wronskian(lambda);

  const double xl = std::min(left_, nodes.front()) - 1.0;
  const double xr = std::max(right_, nodes.back()) + 1.0;
  const cplx el = std::exp(-kI * lambda * xl);
  CauchyData s{el, -kI * lambda * el};
  double cur = xl;
  for (std::size_t i = 0; i < n; ++i) {
    s = transfer(lambda, cur, nodes[i]).value(s);
    cur = nodes[i];
    jp.minus[i] = s.u;
    jp.minus_prime[i] = s.du + 0.5 * atom_weight_at(cur) * s.u;
  }
  const cplx er = std::exp(kI * lambda * xr);
  s = {er, kI * lambda * er};
  cur = xr;
  for (std::size_t i = n; i-- > 0;) {
    s = transfer(lambda, nodes[i], cur).value.inverse()(s);
    cur = nodes[i];
    jp.plus[i] = s.u;
    jp.plus_prime[i] = s.du + 0.5 * atom_weight_at(cur) * s.u;
  }
  return jp;
}

JostPair jost(const SignedMeasure& m, cplx lambda, const std::vector<double>& nodes) {
  return Scatterer(m).jost(lambda, nodes);
}

cplx wronskian(const SignedMeasure& m, cplx lambda) { return Scatterer(m).wronskian(lambda); }

namespace {

double wronskian_scale(cplx lambda) { return std::max(1.0, std::abs(lambda)); }

}  // namespace

GreenKernel green_kernel(const SignedMeasure& m, cplx lambda, const std::vector<double>& nodes) {
  const JostPair jp = jost(m, lambda, nodes);
  if (std::abs(jp.wronskian) < 1e-10 * wronskian_scale(lambda))
    throw PoleProximity("green_kernel: lambda is at a zero of the Wronskian");
  const std::size_t n = nodes.size();
  GreenKernel g{lambda, nodes, std::vector<cplx>(n * n)};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t lo = std::min(i, j), hi = std::max(i, j);
      g.values[i * n + j] = jp.minus[lo] * jp.plus[hi] / jp.wronskian;
    }
  return g;
}

// ---------------------------------------------------------------- zeros

namespace {

struct ComplexSimpson {
  const std::function<cplx(double)>& f;
  double tol;
  int evals = 0;

  cplx segment(double a, double b, cplx fa, cplx fm, cplx fb, cplx whole, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const cplx flm = f(lm), frm = f(rm);
    evals += 2;
    const cplx left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const cplx right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const cplx diff = left + right - whole;
    // the floor on b - a stops refinement driven by rounding noise in W'/W
    if (depth <= 0 || b - a < 1e-9 || std::abs(diff) <= 15.0 * std::max(tol * (b - a), 1e-13 * std::abs(whole)))
      return left + right + diff / 15.0;
    return segment(a, m, fa, flm, fm, left, depth - 1) + segment(m, b, fm, frm, fb, right, depth - 1);
  }

  cplx integrate(double a, double b, int panels) {
    cplx sum = 0.0;
    const double w = (b - a) / panels;
    cplx fa = f(a);
    for (int p = 0; p < panels; ++p) {
      const double x0 = a + p * w, x1 = x0 + w, xm = 0.5 * (x0 + x1);
      const cplx fm = f(xm), fb = f(x1);
      sum += segment(x0, x1, fa, fm, fb, w / 6.0 * (fa + 4.0 * fm + fb), 24);
      fa = fb;
    }
    return sum;
  }
};

// (1/2 pi i) integral of W'/W along the boundary of r, counterclockwise.
double contour_count(const Scatterer& s, const Rect& r, double tol) {
  const std::array<cplx, 5> corners = {cplx(r.re_lo, r.im_lo), cplx(r.re_hi, r.im_lo), cplx(r.re_hi, r.im_hi),
                                       cplx(r.re_lo, r.im_hi), cplx(r.re_lo, r.im_lo)};
  cplx total = 0.0;
  for (int e = 0; e < 4; ++e) {
    const cplx z0 = corners[e], z1 = corners[e + 1];
    const cplx dz = z1 - z0;
    std::function<cplx(double)> g = [&](double t) {
      const auto [w, dw] = s.wronskian_jet(z0 + t * dz);
      if (std::abs(w) < 1e-6 * std::abs(dw))
        throw ContourTooClose("contour passes within 1e-6 of a zero");
      return dw / w * dz;
    };
    const int panels = std::clamp(static_cast<int>(std::abs(dz) * 4.0), 4, 400);
    ComplexSimpson q{g, tol};
    total += q.integrate(0.0, 1.0, panels);
  }
  return (total / (2.0 * std::numbers::pi * kI)).real();
}

}  // namespace

int winding_number(const Scatterer& s, const Rect& rect) {
  double tol = 1e-6;
  for (int attempt = 0; attempt < 3; ++attempt, tol *= 0.01) {
    const double c = contour_count(s, rect, tol);
    const double n = std::round(c);
    if (std::abs(c - n) < 0.05) return static_cast<int>(n);
  }
  throw ContourTooClose("winding number did not settle near an integer");
}

namespace {

struct ZeroSearch {
  const Scatterer& s;
  std::vector<Resonance> out;

  bool newton(cplx& z, int mult, double& residual) {
    for (int it = 0; it < 60; ++it) {
      const auto [w, dw] = s.wronskian_jet(z);
      residual = std::abs(w);
      if (dw == 0.0) return false;
      const cplx step = static_cast<double>(mult) * w / dw;
      z -= step;
      if (std::abs(step) < 1e-14 * (1.0 + std::abs(z))) break;
    }
    residual = std::abs(s.wronskian(z));
    return residual <= 1e-8 * (1.0 + std::abs(z));
  }

  void record(cplx z, int mult, double residual) {
    Resonance r;
    r.lambda = z;
    r.multiplicity = mult;
    r.newton_residual = residual;
    r.eigenvalue = z.imag() > 1e-10 && std::abs(z.real()) < 1e-8;
    out.push_back(r);
  }

  void locate(const Rect& r, int n, int depth) {
    if (n <= 0) return;
    const cplx centre(0.5 * (r.re_lo + r.re_hi), 0.5 * (r.im_lo + r.im_hi));
    const double diam = std::hypot(r.re_hi - r.re_lo, r.im_hi - r.im_lo);
    const double pad = 1e-9 * (1.0 + diam);
    if (n == 1 || diam < 1e-7 || depth > 60) {
      const int mult = (n > 1 && (diam < 1e-7 || depth > 60)) ? n : 1;
      cplx z = centre;
      double residual = 0.0;
      if (newton(z, mult, residual) && r.contains(z, pad)) {
        record(z, mult, residual);
        return;
      }
      if (diam < 1e-7 || depth > 60) {
        record(centre, n, std::abs(s.wronskian(centre)));
        return;
      }
    }
    // split off-centre so children rarely share a zero on their edges
    for (int attempt = 0; attempt < 5; ++attempt) {
      const double fx = 0.5 + 0.0137 * (attempt + 1) * (attempt % 2 ? -1.0 : 1.0);
      const double fy = 0.5 + 0.0113 * (attempt + 1) * (attempt % 2 ? 1.0 : -1.0);
      const double xm = r.re_lo + fx * (r.re_hi - r.re_lo);
      const double ym = r.im_lo + fy * (r.im_hi - r.im_lo);
      const std::array<Rect, 4> kids = {Rect{r.re_lo, xm, r.im_lo, ym}, Rect{xm, r.re_hi, r.im_lo, ym},
                                        Rect{r.re_lo, xm, ym, r.im_hi}, Rect{xm, r.re_hi, ym, r.im_hi}};
      std::array<int, 4> counts{};
      try {
        int sum = 0;
        for (int k = 0; k < 4; ++k) sum += counts[k] = winding_number(s, kids[k]);
        if (sum != n) continue;
      } catch (const ContourTooClose&) {
        continue;
      }
      for (int k = 0; k < 4; ++k) locate(kids[k], counts[k], depth + 1);
      return;
    }
    throw ContourTooClose("could not subdivide rectangle away from zeros");
  }
};

}  // namespace

std::vector<Resonance> find_resonances(const Scatterer& s, const Rect& rect) {
  if (!(rect.re_lo < rect.re_hi && rect.im_lo < rect.im_hi)) throw InvalidInput("degenerate rectangle");
  if (rect.contains(0.0, 1e-3)) throw InvalidInput("rectangle must exclude λ=0");
  const double wx = rect.re_hi - rect.re_lo, wy = rect.im_hi - rect.im_lo;
  for (int attempt = 0; attempt < 5; ++attempt) {
    // perturb the contour outwards/inwards alternately on retries
    const double e = attempt == 0 ? 0.0 : 1e-4 * attempt * (attempt % 2 ? 1.0 : -1.0);
    Rect r{rect.re_lo - e * wx, rect.re_hi + e * wx * 0.7, rect.im_lo - e * wy * 0.9, rect.im_hi + e * wy * 0.3};
    if (r.contains(0.0, 1e-3)) r = rect;
    try {
      const int n = winding_number(s, r);
      ZeroSearch z{s, {}};
      z.locate(r, n, 0);
      std::vector<Resonance> out;
      for (const Resonance& res : z.out)
        if (rect.contains(res.lambda, 1e-6)) out.push_back(res);
      std::sort(out.begin(), out.end(), [](const Resonance& a, const Resonance& b) {
        return a.lambda.real() != b.lambda.real() ? a.lambda.real() < b.lambda.real()
                                                  : a.lambda.imag() < b.lambda.imag();
      });
      return out;
    } catch (const ContourTooClose&) {
      if (attempt == 4) throw;
    }
  }
  return {};
}

std::vector<Resonance> find_resonances(const SignedMeasure& m, const Rect& rect) {
  return find_resonances(Scatterer(m), rect);
}

// ------------------------------------------------------- cutoff norms

namespace {

// K_ij = L_i R_j (j < i), U_i S_j (j > i), D_i (i = j).
struct SemiSeparable {
  std::vector<cplx> l, r, u, s, d;

  void apply(std::span<const cplx> v, std::span<cplx> y, cplx scale = 1.0) const {
    const std::size_t n = d.size();
    cplx acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      y[i] += scale * (l[i] * acc + d[i] * v[i]);
      acc += r[i] * v[i];
    }
    acc = 0.0;
    for (std::size_t i = n; i-- > 0;) {
      y[i] += scale * u[i] * acc;
      acc += s[i] * v[i];
    }
  }
  void apply_adjoint(std::span<const cplx> v, std::span<cplx> y, cplx scale = 1.0) const {
    const std::size_t n = d.size();
    const cplx cs = std::conj(scale);
    cplx acc = 0.0;
    for (std::size_t j = n; j-- > 0;) {
      y[j] += cs * (std::conj(r[j]) * acc + std::conj(d[j]) * v[j]);
      acc += std::conj(l[j]) * v[j];
    }
    acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      y[j] += cs * std::conj(s[j]) * acc;
      acc += std::conj(u[j]) * v[j];
    }
  }
};

}  // namespace

double cutoff_resolvent_norm(const Scatterer& sc, cplx lambda, const CutoffNormOptions& opt) {
  const SignedMeasure& m = sc.measure();
  const double res = opt.resolution > 0.0 ? opt.resolution : std::min(0.02, 0.25 / std::max(1e-12, std::abs(lambda)));
  double lo, hi;
  if (opt.weight == WeightMode::Cutoff) {
    lo = m.support().lo - opt.cutoff_margin;
    hi = m.support().hi + opt.cutoff_margin;
  } else {
    const double half = opt.weight_half_width > 0.0 ? opt.weight_half_width : m.radius() + 20.0;
    lo = -half;
    hi = half;
  }
  const auto cells = static_cast<std::size_t>(std::ceil((hi - lo) / res - 1e-9));
  std::vector<double> x;
  for (std::size_t i = 0; i <= cells; ++i) x.push_back(lo + (hi - lo) * static_cast<double>(i) / cells);
  for (const Atom& a : m.atoms())
    if (a.position > lo && a.position < hi) x.push_back(a.position);
  std::sort(x.begin(), x.end());
  x.erase(std::unique(x.begin(), x.end(), [](double a, double b) { return b - a < 1e-12; }), x.end());
  const std::size_t n = x.size();

  const JostPair jp = sc.jost(lambda, x);
  const cplx w = jp.wronskian;
  if (std::abs(w) < 1e-10 * wronskian_scale(lambda))
    throw PoleProximity("cutoff_resolvent_norm: lambda is at a zero of the Wronskian");

  // sq: square roots of trapezoid weights; chi2: squared cutoff or polynomial weight
  std::vector<double> sq(n), chi2(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double left = i > 0 ? x[i] - x[i - 1] : 0.0;
    const double right = i + 1 < n ? x[i + 1] - x[i] : 0.0;
    sq[i] = std::sqrt(0.5 * (left + right));
    chi2[i] = opt.weight == WeightMode::Cutoff ? 1.0 : std::pow(std::abs(x[i]) + 1.0, -(1.0 + opt.delta));
  }
  // Resolvent kernel -G, weighted: row alpha_i = sq_i chi_i, column beta_j = chi_j sq_j.
  SemiSeparable k0, k1;
  for (SemiSeparable* k : {&k0, &k1}) {
    k->l.resize(n);
    k->r.resize(n);
    k->u.resize(n);
    k->s.resize(n);
    k->d.resize(n);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double chi = std::sqrt(chi2[i]);
    const cplx a = -sq[i] * chi / w;
    const double b = chi * sq[i];
    k0.l[i] = a * jp.plus[i];
    k0.u[i] = a * jp.minus[i];
    k0.r[i] = jp.minus[i] * b;
    k0.s[i] = jp.plus[i] * b;
    k0.d[i] = a * jp.minus[i] * jp.plus[i] * b;
    k1.l[i] = a * jp.plus_prime[i];
    k1.u[i] = a * jp.minus_prime[i];
    k1.r[i] = k0.r[i];
    k1.s[i] = k0.s[i];
    k1.d[i] = a * 0.5 * (jp.minus[i] * jp.plus_prime[i] + jp.minus_prime[i] * jp.plus[i]) * b;
  }
  const bool second = opt.target != NormTarget::L2;
  const std::size_t rows = second ? 2 * n : n;
  const cplx l2 = lambda * lambda;

  auto apply = [&](std::span<const cplx> v, std::span<cplx> y) {
    std::fill(y.begin(), y.end(), cplx{});
    k0.apply(v, y.subspan(0, n));
    if (opt.target == NormTarget::H1) {
      k1.apply(v, y.subspan(n, n));
    } else if (opt.target == NormTarget::Graph) {
      auto g = y.subspan(n, n);
      k0.apply(v, g, l2);
      for (std::size_t i = 0; i < n; ++i) g[i] += chi2[i] * v[i];
    }
  };
  auto adjoint = [&](std::span<const cplx> v, std::span<cplx> y) {
    std::fill(y.begin(), y.end(), cplx{});
    k0.apply_adjoint(v.subspan(0, n), y);
    if (opt.target == NormTarget::H1) {
      k1.apply_adjoint(v.subspan(n, n), y);
    } else if (opt.target == NormTarget::Graph) {
      k0.apply_adjoint(v.subspan(n, n), y, l2);
      for (std::size_t i = 0; i < n; ++i) y[i] += chi2[i] * v[n + i];
    }
  };
  return largest_singular_value(n, rows, apply, adjoint, opt.rel_tol).value;
}

double cutoff_resolvent_norm(const SignedMeasure& m, cplx lambda, const CutoffNormOptions& opt) {
  return cutoff_resolvent_norm(Scatterer(m), lambda, opt);
}

StripReport strip_scan(const SignedMeasure& m, double lambda0, double lambda_max, double eps0, double step,
                       int k, int workers) {
  if (!(lambda0 > 0.0 && lambda_max > lambda0 && eps0 > 0.0 && step > 0.0))
    throw InvalidInput("strip_scan: need 0 < lambda0 < lambda_max, eps0 > 0, step > 0");
  if (k < 0 || k > 2) throw InvalidInput("strip_scan: k must be 0, 1 or 2");
  const Scatterer s(m);
  StripReport rep;
  rep.lambda0 = lambda0;
  rep.lambda_max = lambda_max;
  rep.eps0 = eps0;
  rep.k = k;
  rep.zeros = find_resonances(s, Rect{lambda0, lambda_max, -eps0, 0.0});

  std::vector<double> re{lambda0};
  for (double r = std::ceil(lambda0 / step) * step; r <= lambda_max + 1e-12; r += step)
    if (r > lambda0 + 1e-12) re.push_back(r);
  for (double r : re)
    for (double im : {0.0, -0.5 * eps0, -eps0}) rep.samples.push_back({r, im, 0.0, 0.0});

  CutoffNormOptions opt;
  opt.target = k == 0 ? NormTarget::L2 : (k == 1 ? NormTarget::H1 : NormTarget::Graph);
  auto work = [&](std::size_t i) {
    StripSample& smp = rep.samples[i];
    try {
      smp.norm = cutoff_resolvent_norm(s, cplx(smp.re, smp.im), opt);
    } catch (const PoleProximity&) {
      smp.norm = std::numeric_limits<double>::infinity();
    }
    smp.scaled = smp.norm * std::pow(std::abs(smp.re), 1.0 - k);
  };
  parallel_for(rep.samples.size(), workers, [&](std::size_t i) { work(i); });
  for (const StripSample& smp : rep.samples) rep.empirical_constant = std::max(rep.empirical_constant, smp.scaled);
  return rep;
}

}  // namespace measchrod
