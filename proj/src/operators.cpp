#include "opsamp/operators.hpp"

#include "opsamp/transforms.hpp"
#include "opsamp/windows.hpp"

#include <algorithm>
#include <random>

namespace opsamp {

SupportRegion SupportRegion::from_rectangles(const GridSpec &grid, std::vector<Rect> rects) {
  if (rects.empty())
    throw Error(Error::Kind::domain, "support region needs at least one rectangle");
  SupportRegion s;
  s.grid = grid;
  s.rects = std::move(rects);
  s.bbox = s.rects.front();
  for (const Rect &r : s.rects) {
    if (!(r.t1 >= r.t0 && r.g1 >= r.g0))
      throw Error(Error::Kind::domain, "malformed rectangle");
    s.bbox.t0 = std::min(s.bbox.t0, r.t0);
    s.bbox.t1 = std::max(s.bbox.t1, r.t1);
    s.bbox.g0 = std::min(s.bbox.g0, r.g0);
    s.bbox.g1 = std::max(s.bbox.g1, r.g1);
    s.area += r.area();
  }
  const double dt = grid.dt, dn = grid.dnu();
  Index i0 = static_cast<Index>(std::floor(s.bbox.t0 / dt + 1e-9));
  Index i1 = static_cast<Index>(std::ceil(s.bbox.t1 / dt - 1e-9));
  Index k0 = static_cast<Index>(std::floor(s.bbox.g0 / dn + 1e-9));
  Index k1 = static_cast<Index>(std::ceil(s.bbox.g1 / dn - 1e-9));
  if (i1 - i0 + 1 > grid.N() || k1 - k0 + 1 > grid.N())
    throw Error(Error::Kind::grid, "support region exceeds the ambient plane");
  s.t_first = grid.wrap(i0);
  s.g_first = grid.wrap(k0);
  s.mask = MaskXb::Constant(i1 - i0 + 1, k1 - k0 + 1, false);
  for (Index a = 0; a < s.mask.rows(); ++a)
    for (Index b = 0; b < s.mask.cols(); ++b) {
      double t = static_cast<double>(i0 + a) * dt, g = static_cast<double>(k0 + b) * dn;
      for (const Rect &r : s.rects)
        if (t >= r.t0 - 1e-12 && t <= r.t1 + 1e-12 && g >= r.g0 - 1e-12 && g <= r.g1 + 1e-12)
          s.mask(a, b) = true;
    }
  return s;
}

bool SupportRegion::contains(Index i, Index k) const {
  Index a = pmod(i - t_first, grid.N()), b = pmod(k - g_first, grid.N());
  return a < mask.rows() && b < mask.cols() && mask(a, b);
}

BandlimitedOperator make_operator(const SupportRegion &support, const PlaneArray &eta) {
  BandlimitedOperator op;
  op.support = support;
  op.eta = PlaneArray::window(support.grid, Semantics::time_freq, support.t_first,
                              support.mask.rows(), support.g_first, support.mask.cols());
  for (Index a = 0; a < eta.values.rows(); ++a)
    for (Index b = 0; b < eta.values.cols(); ++b) {
      cd v = eta.values(a, b);
      if (v == cd(0))
        continue;
      Index i = support.grid.wrap(eta.x_first + a), k = support.grid.wrap(eta.y_first + b);
      if (!support.contains(i, k)) {
        if (std::abs(v) > 1e-14)
          throw Error(Error::Kind::domain, "spreading function leaves its support region");
        continue;
      }
      op.eta.values(op.eta.local_x(i), op.eta.local_y(k)) = v;
    }
  return op;
}

PlaneArray spreading_to_impulse(const PlaneArray &eta) {
  if (eta.semantics != Semantics::time_freq)
    throw Error(Error::Kind::domain, "expected a spreading function");
  const GridSpec &g = eta.grid_x;
  const Index n = g.N(), nt = eta.values.rows();
  PlaneArray h = PlaneArray::window(g, Semantics::impulse, 0, n, eta.x_first, nt);
  VectorXc spec(n);
  for (Index a = 0; a < nt; ++a) {
    spec.setZero();
    for (Index b = 0; b < eta.values.cols(); ++b)
      spec(g.wrap(eta.y_first + b)) = eta.values(a, b);
    h.values.col(a) = ift_samples(spec, g.dnu());
  }
  return h;
}

namespace {

PlaneArray to_impulse(const BandlimitedOperator &op) { return spreading_to_impulse(op.eta); }

PlaneArray bold(const PlaneArray &eta) {
  PlaneArray out = eta;
  const GridSpec &g = eta.grid_x;
  const Index n = g.N();
  for (Index a = 0; a < eta.values.rows(); ++a)
    for (Index b = 0; b < eta.values.cols(); ++b) {
      Index t = g.centered(eta.x_first + a), k = g.centered(eta.y_first + b);
      double ph = kTwoPi * static_cast<double>(pmod(t * k, n)) / static_cast<double>(n);
      out.values(a, b) *= std::polar(1.0, ph);
    }
  return out;
}

} // namespace

PlaneArray impulse_to_kernel(const PlaneArray &h) {
  if (h.semantics != Semantics::impulse)
    throw Error(Error::Kind::domain, "expected an impulse response");
  const GridSpec &g = h.grid_x;
  const Index n = g.N();
  PlaneArray kappa = PlaneArray::full(g, Semantics::kernel);
  for (Index b = 0; b < h.values.cols(); ++b) {
    Index t = g.wrap(h.y_first + b);
    for (Index a = 0; a < h.values.rows(); ++a) {
      Index x = g.wrap(h.x_first + a);
      kappa.values(x, pmod(x - t, n)) = h.values(a, b);
    }
  }
  return kappa;
}

PlaneArray convert(const BandlimitedOperator &op, Representation target) {
  switch (target) {
  case Representation::spreading: return op.eta;
  case Representation::symbol: return symplectic_ft(op.eta);
  case Representation::impulse: return to_impulse(op);
  case Representation::kernel: return impulse_to_kernel(to_impulse(op));
  case Representation::bold_spreading: return bold(op.eta);
  case Representation::bold_symbol: return symplectic_ft(bold(op.eta));
  }
  throw Error(Error::Kind::domain, "unknown representation");
}

SampledSignal apply_impulse(const PlaneArray &h, const SampledSignal &f) {
  require_same_grid(h.grid_x, f.grid);
  if (h.semantics != Semantics::impulse || h.values.rows() != f.grid.N())
    throw Error(Error::Kind::domain, "apply_impulse needs a full-x impulse response");
  const Index n = f.grid.N();
  VectorXc out = VectorXc::Zero(n);
  for (Index b = 0; b < h.values.cols(); ++b) {
    Index t = f.grid.wrap(h.y_first + b);
    for (Index x = 0; x < n; ++x)
      out(x) += h.values(pmod(x - h.x_first, n), b) * f.values(pmod(x - t, n));
  }
  return SampledSignal(f.grid, out * f.grid.dt);
}

SampledSignal apply_impulse_adjoint(const PlaneArray &h, const SampledSignal &f) {
  require_same_grid(h.grid_x, f.grid);
  const Index n = f.grid.N();
  VectorXc out = VectorXc::Zero(n);
  for (Index b = 0; b < h.values.cols(); ++b) {
    Index t = f.grid.wrap(h.y_first + b);
    for (Index y = 0; y < n; ++y) {
      Index x = pmod(y + t, n);
      out(y) += std::conj(h.values(pmod(x - h.x_first, n), b)) * f.values(x);
    }
  }
  return SampledSignal(f.grid, out * f.grid.dt);
}

SampledSignal apply_kernel(const PlaneArray &kappa, const SampledSignal &f) {
  require_same_grid(kappa.grid_x, f.grid);
  if (kappa.semantics != Semantics::kernel)
    throw Error(Error::Kind::domain, "apply_kernel needs kernel semantics");
  return SampledSignal(f.grid, (kappa.to_full() * f.values) * f.grid.dt);
}

SampledSignal apply_symbol(const PlaneArray &sigma, const SampledSignal &f) {
  require_same_grid(sigma.grid_x, f.grid);
  if (sigma.semantics != Semantics::symbol)
    throw Error(Error::Kind::domain, "apply_symbol needs symbol semantics");
  const GridSpec &g = f.grid;
  const Index n = g.N();
  VectorXc fhat = ft_samples(f.values, g.dt) * g.dnu();
  VectorXc out = VectorXc::Zero(n), ph(n);
  for (Index b = 0; b < sigma.values.cols(); ++b) {
    const Index k = g.wrap(sigma.y_first + b);
    for (Index x = 0; x < n; ++x)
      ph(x) = std::polar(1.0, kTwoPi * static_cast<double>(pmod(x * k, n)) / static_cast<double>(n));
    for (Index a = 0; a < sigma.values.rows(); ++a) {
      const Index x = g.wrap(sigma.x_first + a);
      out(x) += sigma.values(a, b) * fhat(k) * ph(x);
    }
  }
  return SampledSignal(g, out);
}

SampledSignal apply(const BandlimitedOperator &op, const SampledSignal &f, Route route) {
  require_same_grid(op.grid(), f.grid);
  const GridSpec &g = f.grid;
  const Index n = g.N();
  if (route == Route::kernel) {
    PlaneArray h = to_impulse(op);
    if (n <= 2048)
      return apply_kernel(impulse_to_kernel(h), f);
    return apply_impulse(h, f);
  }
  VectorXc out = VectorXc::Zero(n), acc(n), mod(n);
  for (Index b = 0; b < op.eta.values.cols(); ++b) {
    Index k = g.wrap(op.eta.y_first + b);
    acc.setZero();
    bool any = false;
    for (Index a = 0; a < op.eta.values.rows(); ++a) {
      cd e = op.eta.values(a, b);
      if (e == cd(0))
        continue;
      any = true;
      Index t = g.wrap(op.eta.x_first + a);
      for (Index x = 0; x < n; ++x)
        acc(x) += e * f.values(pmod(x - t, n));
    }
    if (!any)
      continue;
    for (Index x = 0; x < n; ++x)
      out(x) += std::polar(1.0, kTwoPi * static_cast<double>(pmod(k * x, n)) / n) * acc(x);
  }
  return SampledSignal(g, out * (g.dt * g.dnu()));
}

VectorXc random_vector(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  VectorXc v(n);
  for (Index i = 0; i < n; ++i)
    v(i) = cd(nd(rng), nd(rng));
  return v;
}

BandlimitedOperator random_opw(const SupportRegion &support, std::uint64_t seed,
                               double smoothness_cells) {
  if (support.area >= 1)
    throw Error(Error::Kind::domain, "support area must be below 1");
  const Index rows = support.mask.rows(), cols = support.mask.cols();
  VectorXc noise = random_vector(rows * cols, seed);
  MatrixXc w(rows, cols);
  for (Index a = 0; a < rows; ++a)
    for (Index b = 0; b < cols; ++b)
      w(a, b) = support.mask(a, b) ? noise(a * cols + b) : cd(0);

  const Index rad = std::max<Index>(0, static_cast<Index>(std::ceil(smoothness_cells)));
  std::vector<double> taps(2 * rad + 1, 1.0);
  if (rad > 0) {
    double s = 0;
    for (Index j = -rad; j <= rad; ++j)
      s += taps[j + rad] = bump(static_cast<double>(j) / (smoothness_cells + 1));
    for (double &t : taps)
      t /= s;
  }
  MatrixXc tmp = MatrixXc::Zero(rows, cols), sm = MatrixXc::Zero(rows, cols);
  for (Index a = 0; a < rows; ++a)
    for (Index b = 0; b < cols; ++b)
      for (Index j = -rad; j <= rad; ++j)
        if (a + j >= 0 && a + j < rows)
          tmp(a, b) += taps[j + rad] * w(a + j, b);
  for (Index a = 0; a < rows; ++a)
    for (Index b = 0; b < cols; ++b)
      for (Index j = -rad; j <= rad; ++j)
        if (b + j >= 0 && b + j < cols)
          sm(a, b) += taps[j + rad] * tmp(a, b + j);
  for (Index a = 0; a < rows; ++a)
    for (Index b = 0; b < cols; ++b)
      if (!support.mask(a, b))
        sm(a, b) = 0;

  BandlimitedOperator op;
  op.support = support;
  op.eta = PlaneArray::window(support.grid, Semantics::time_freq, support.t_first, rows,
                              support.g_first, cols);
  op.eta.values = sm;
  return op;
}

SupNorm sup_norm_on(const PlaneArray &symbol, const MaskXb &S) {
  if (symbol.semantics != Semantics::symbol || !symbol.is_full())
    throw Error(Error::Kind::domain, "sup_norm_on needs a full symbol plane");
  if (S.rows() != symbol.values.rows() || S.cols() != symbol.values.cols())
    throw Error(Error::Kind::grid, "region mask does not match the symbol grid");
  SupNorm out;
  out.empty = !S.any();
  for (Index i = 0; i < S.rows(); ++i)
    for (Index j = 0; j < S.cols(); ++j)
      if (S(i, j))
        out.value = std::max(out.value, std::abs(symbol.values(i, j)));
  return out;
}

SupNorm sup_norm_on(const BandlimitedOperator &op, const MaskXb &S) {
  return sup_norm_on(convert(op, Representation::symbol), S);
}

double operator_norm_estimate(const PlaneArray &h, std::uint64_t seed, double tol, int max_iter) {
  const GridSpec &g = h.grid_x;
  VectorXc v = random_vector(g.N(), seed).normalized();
  double lam = 0;
  for (int it = 0; it < max_iter; ++it) {
    SampledSignal hv = apply_impulse(h, SampledSignal(g, v));
    VectorXc w = apply_impulse_adjoint(h, hv).values;
    double next = v.dot(w).real();
    double nrm = w.norm();
    if (nrm == 0)
      return 0;
    v = w / nrm;
    if (it > 0 && std::abs(next - lam) <= tol * next) {
      lam = next;
      break;
    }
    lam = next;
  }
  return std::sqrt(std::max(0.0, lam));
}

double operator_norm_estimate(const BandlimitedOperator &op, std::uint64_t seed, double tol,
                              int max_iter) {
  return operator_norm_estimate(convert(op, Representation::impulse), seed, tol, max_iter);
}

} // namespace opsamp
