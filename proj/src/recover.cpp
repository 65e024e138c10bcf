#include "opsamp/recover.hpp"

#include "opsamp/transforms.hpp"

#include <algorithm>

namespace opsamp {

namespace {

cd unit(Index num, Index n) {
  return std::polar(1.0, kTwoPi * static_cast<double>(pmod(num, n)) / static_cast<double>(n));
}

void check_scheme(const SamplingScheme &s, const WindowPair &w, PouKind kind) {
  if (!s.has_weights())
    throw Error(Error::Kind::domain, "scheme has no weights");
  if (w.kind != kind)
    throw Error(Error::Kind::domain, std::string("expected ") + to_string(kind) + " windows");
  if (std::abs(w.T - s.T) > 1e-12 * s.T || std::abs(w.Omega - s.Omega) > 1e-12 * s.Omega)
    throw Error(Error::Kind::domain, "scheme and window cell sizes differ");
  if (std::abs(w.delta - s.delta) > 1e-12 * std::max(1.0, s.delta))
    throw Error(Error::Kind::domain, "scheme and window padding differ");
}

struct IndexRange {
  Index first, count;
};

IndexRange support_range(double lo, double hi, double step) {
  Index a = static_cast<Index>(std::floor(lo / step)) - 1;
  Index b = static_cast<Index>(std::ceil(hi / step)) + 1;
  return {a, b - a + 1};
}

} // namespace

SampledSignal modulate(const SampledSignal &f, double nu) {
  const GridSpec &g = f.grid;
  Index k = g.freq_index(nu);
  SampledSignal out = f;
  for (Index i = 0; i < g.N(); ++i)
    out.values(i) *= unit(k * i, g.N());
  return out;
}

PlaneArray modulate_x(PlaneArray p, double nu) {
  const GridSpec &g = p.grid_x;
  Index k = g.freq_index(nu);
  for (Index a = 0; a < p.values.rows(); ++a)
    p.values.row(a) *= unit(k * (p.x_first + a), g.N());
  return p;
}

double demod_shift(const SamplingScheme &s, PouKind kind) {
  return kind == PouKind::linear ? s.freq_origin - s.Omega / 2 : s.freq_origin;
}

PlaneArray recover_kernel_rect(const SampledSignal &response, double T, const SampledSignal &phi,
                               const SampledSignal *r) {
  require_same_grid(response.grid, phi.grid);
  const GridSpec &g = response.grid;
  const Index n = g.N(), nT = aligned_count(T, g.dt, "T");
  if (n % nT != 0)
    throw Error(Error::Kind::grid, "T does not divide the ambient period");
  const Index Q = n / nT;
  IndexRange tr{0, nT};
  if (r) {
    require_same_grid(r->grid, g);
    Index lo = n, hi = -n;
    for (Index i = 0; i < n; ++i)
      if (r->values(i) != cd(0)) {
        lo = std::min(lo, g.centered(i));
        hi = std::max(hi, g.centered(i));
      }
    tr = lo > hi ? IndexRange{0, 1} : IndexRange{lo, hi - lo + 1};
  }
  PlaneArray h = PlaneArray::window(g, Semantics::impulse, 0, n, tr.first, tr.count);
  VectorXc col(n);
  for (Index b = 0; b < tr.count; ++b) {
    const Index tau = tr.first + b;
    const cd rv = r ? r->values(g.wrap(tau)) : cd(1);
    if (rv == cd(0))
      continue;
    col.setZero();
    for (Index q = 0; q < Q; ++q) {
      const Index s = tau + q * nT;
      const cd c = response.values(g.wrap(s));
      if (c == cd(0))
        continue;
      for (Index x = 0; x < n; ++x)
        col(x) += c * phi.values(pmod(x - s, n));
    }
    h.values.col(b) = (T * rv) * col;
  }
  return h;
}

PlaneArray recover_kernel_general(const SampledSignal &response, const SamplingScheme &s,
                                  const WindowPair &w) {
  check_scheme(s, w, PouKind::linear);
  require_same_grid(response.grid, w.r.grid);
  const double shift = demod_shift(s, PouKind::linear);
  SampledSignal resp = modulate(response, -shift);
  if (s.L == 1 && s.shifts.front().k == 0 && s.shifts.front().n == 0) {
    PlaneArray h = recover_kernel_rect(resp, s.T, w.phi, &w.r);
    h.values *= s.B(0, 0);
    return modulate_x(std::move(h), shift);
  }
  const GridSpec &g = response.grid;
  const Index n = g.N(), nT = aligned_count(s.T, g.dt, "T"), L = s.L;
  if (n % (L * nT) != 0)
    throw Error(Error::Kind::grid, "ambient period is not a multiple of LT");
  const Index Q = n / nT, K = n / (L * nT);
  int kmin = s.shifts.front().k, kmax = kmin;
  for (const Shift &sh : s.shifts) {
    kmin = std::min(kmin, sh.k);
    kmax = std::max(kmax, sh.k);
  }
  IndexRange rr = support_range(-s.delta, s.T + s.delta, g.dt);
  const Index first = rr.first + kmin * nT, count = rr.count + (kmax - kmin) * nT;
  PlaneArray h = PlaneArray::window(g, Semantics::impulse, 0, n, first, count);
  const double LT = static_cast<double>(L) * s.T;
  VectorXc acc(n);
  for (Index j = 0; j < L; ++j) {
    const Index kj = s.shifts[j].k, nj = s.shifts[j].n;
    for (Index b = 0; b < rr.count; ++b) {
      const Index t = rr.first + b, tau = t + kj * nT;
      const double rv = w.r.values(g.wrap(t)).real();
      if (rv == 0)
        continue;
      acc.setZero();
      for (Index q = 0; q < Q; ++q) {
        const Index sh = (kj - q) * nT;
        const cd c = s.b(j, q) * resp.values(g.wrap(tau - sh));
        if (c == cd(0))
          continue;
        for (Index x = 0; x < n; ++x)
          acc(x) += c * w.phi.values(pmod(x - tau + sh, n));
      }
      auto colv = h.values.col(tau - first);
      for (Index x = 0; x < n; ++x)
        colv(x) += (LT * rv) * unit(nj * K * (x - tau + kj * nT), n) * acc(x);
    }
  }
  return modulate_x(std::move(h), shift);
}

namespace {

IndexRange freq_range(const SamplingScheme &s, const WindowPair &w, const GridSpec &g) {
  return w.kind == PouKind::linear ? support_range(-s.delta, s.Omega + s.delta, g.dnu())
                                   : support_range(-s.Omega / 2 - s.delta, s.Omega / 2 + s.delta, g.dnu());
}

} // namespace

std::vector<PlaneArray> zak_system_solve(const SampledSignal &response, const SamplingScheme &s,
                                         const WindowPair &w) {
  check_scheme(s, w, w.kind);
  const GridSpec &g = response.grid;
  require_same_grid(g, w.r.grid);
  const Index n = g.N(), nT = aligned_count(s.T, g.dt, "T"), L = s.L;
  if (n % (L * nT) != 0)
    throw Error(Error::Kind::grid, "ambient period is not a multiple of LT");
  const Index K = n / (L * nT), span = L * nT;
  SampledSignal resp = modulate(response, -demod_shift(s, w.kind));
  IndexRange tr = support_range(-s.delta, s.T + s.delta, g.dt);
  IndexRange fr = freq_range(s, w, g);
  std::vector<PlaneArray> out;
  for (Index j = 0; j < L; ++j)
    out.push_back(PlaneArray::window(g, Semantics::time_freq, tr.first, tr.count, fr.first, fr.count));
  const double LT = static_cast<double>(L) * s.T;
  MatrixXc zcols(L, K);
  VectorXc col(K), v(L);
  for (Index a = 0; a < tr.count; ++a) {
    const Index t = tr.first + a;
    const double rv = w.r.values(g.wrap(t)).real();
    if (rv == 0)
      continue;
    for (Index p = 0; p < L; ++p) {
      for (Index m = 0; m < K; ++m)
        col(m) = resp.values(pmod(t + p * nT - m * span, n));
      zcols.row(p) = idft(col).transpose();
    }
    for (Index b = 0; b < fr.count; ++b) {
      const Index kc = fr.first + b;
      const double ph = w.phi_hat.values(g.wrap(kc)).real();
      if (ph == 0)
        continue;
      for (Index p = 0; p < L; ++p)
        v(p) = unit(-kc * p * nT, n) * (rv * ph) * zcols(p, pmod(kc, K));
      VectorXc u = LT * (s.B * v);
      for (Index j = 0; j < L; ++j) {
        const Index kj = s.shifts[j].k, nj = s.shifts[j].n;
        out[j].values(a, b) = u(j) * unit((2 * kc + nj * K) * kj * nT, n);
      }
    }
  }
  return out;
}

PlaneArray reassemble_spreading(const std::vector<PlaneArray> &slices, const SamplingScheme &s,
                                const WindowPair &w) {
  if (static_cast<Index>(slices.size()) != s.L)
    throw Error(Error::Kind::domain, "need one slice per shift");
  const GridSpec &g = slices.front().grid_x;
  const Index n = g.N(), nT = aligned_count(s.T, g.dt, "T"), K = n / (s.L * nT);
  const Index shift = aligned_count(demod_shift(s, w.kind), g.dnu(), "frequency shift");
  PlaneArray eta = PlaneArray::full(g, Semantics::time_freq);
  for (Index j = 0; j < s.L; ++j) {
    const PlaneArray &sl = slices[j];
    const Index kj = s.shifts[j].k, nj = s.shifts[j].n;
    for (Index a = 0; a < sl.values.rows(); ++a)
      for (Index b = 0; b < sl.values.cols(); ++b) {
        const Index t = g.centered(sl.x_first + a), kc = g.centered(sl.y_first + b);
        cd u = sl.values(a, b) * unit(-(2 * kc + nj * K) * kj * nT, n);
        const Index tau = t + kj * nT, gam = kc + nj * K;
        cd val = u * unit(-gam * t, n);
        if (w.kind == PouKind::quadratic)
          val *= w.r.values(g.wrap(t)).real() * w.phi_hat.values(g.wrap(kc)).real();
        eta.values(g.wrap(tau), g.wrap(gam + shift)) += val;
      }
  }
  return eta;
}

double CoefficientTable::x_pos(Index m) const {
  Index c = m >= (Jn + 1) / 2 ? m - Jn : m;
  return static_cast<double>(c) * static_cast<double>(scheme.L) * scheme.T / beta1;
}

double CoefficientTable::xi_pos(Index l) const {
  Index c = l >= (Jt + 1) / 2 ? l - Jt : l;
  return static_cast<double>(c) / (beta2 * scheme.T);
}

double CoefficientTable::max_abs() const {
  double m = 0;
  for (const MatrixXc &e : entries)
    m = std::max(m, e.cwiseAbs().maxCoeff());
  return m;
}

MatrixXc window_atoms(const WindowPair &w) {
  const GridSpec &g = w.r.grid;
  const Index n = g.N();
  std::vector<Index> supp;
  for (Index i = 0; i < n; ++i)
    if (w.r.values(i) != cd(0))
      supp.push_back(i);
  MatrixXc atoms(n, n);
  VectorXc row(n);
  for (Index x = 0; x < n; ++x) {
    row.setZero();
    for (Index t : supp)
      row(t) = w.r.values(t) * w.phi.values(pmod(x - t, n));
    atoms.row(x) = ft_samples(row, g.dt).transpose();
  }
  return atoms;
}

CoefficientTable discrete_coefficients(const SampledSignal &response, const SamplingScheme &s,
                                       const WindowPair &w, double beta1, double beta2) {
  check_scheme(s, w, PouKind::quadratic);
  const GridSpec &g = response.grid;
  require_same_grid(g, w.r.grid);
  if (beta2 < 1 + 2 * s.delta / s.T - 1e-12 || beta1 < 1 + 2 * s.delta / s.Omega - 1e-12)
    throw Error(Error::Kind::domain, "oversampling rates below 1 + 2 delta / cell size");
  const Index n = g.N(), nT = aligned_count(s.T, g.dt, "T"), L = s.L;
  CoefficientTable tab;
  tab.scheme = s;
  tab.windows = w;
  tab.beta1 = beta1;
  tab.beta2 = beta2;
  tab.Jt = aligned_count(beta2 * s.T, g.dt, "oversampled time box");
  tab.Jn = aligned_count(beta1 * s.Omega, g.dnu(), "oversampled frequency box");
  if (n % tab.Jt != 0 || n % tab.Jn != 0 || n % nT != 0)
    throw Error(Error::Kind::grid, "oversampling lattice does not divide the ambient period");
  const Index Q = n / nT, sx = n / tab.Jn;
  SampledSignal resp = modulate(response, -demod_shift(s, PouKind::quadratic));
  MatrixXc C = stft_lattice(resp, w.r, s.T, 1.0 / (beta2 * s.T));
  for (Index q = 0; q < Q; ++q)
    for (Index l = 0; l < tab.Jt; ++l)
      C(q, l) *= unit(l * pmod(q * nT, tab.Jt), tab.Jt);
  const double LT = static_cast<double>(L) * s.T;
  for (Index j = 0; j < L; ++j) {
    MatrixXc Phi(tab.Jn, Q);
    for (Index m = 0; m < tab.Jn; ++m)
      for (Index q = 0; q < Q; ++q)
        Phi(m, q) = LT * s.b(j, q) * w.phi.values(pmod(m * sx - q * nT, n));
    tab.entries.push_back(Phi * C);
  }
  tab.atoms = std::make_shared<const MatrixXc>(window_atoms(w));
  return tab;
}

MaskXb coefficient_box(const CoefficientTable &t, double x_lo, double x_hi, double xi_lo,
                       double xi_hi) {
  MaskXb m(t.Jn, t.Jt);
  const double eps = 1e-9;
  for (Index a = 0; a < t.Jn; ++a)
    for (Index l = 0; l < t.Jt; ++l) {
      double x = t.x_pos(a), xi = t.xi_pos(l);
      m(a, l) = x >= x_lo - eps && x <= x_hi + eps && xi >= xi_lo - eps && xi <= xi_hi + eps;
    }
  return m;
}

PlaneArray symbol_from_coefficients(const CoefficientTable &t, const MaskXb *subset) {
  const SamplingScheme &s = t.scheme;
  const GridSpec &g = t.windows.r.grid;
  const Index n = g.N(), nT = aligned_count(s.T, g.dt, "T"), K = n / (s.L * nT);
  if (subset && (subset->rows() != t.Jn || subset->cols() != t.Jt))
    throw Error(Error::Kind::grid, "subset does not match the coefficient lattice");
  const Index sx = n / t.Jn, sxi = n / t.Jt;
  MatrixXc W = t.atoms ? *t.atoms : window_atoms(t.windows);
  dft_cols(W, false);
  dft_rows(W, false);
  PlaneArray out = PlaneArray::full(g, Semantics::symbol);
  const double scale = static_cast<double>(s.L) / (t.beta1 * t.beta2);
  MatrixXc D(n, n);
  for (Index j = 0; j < s.L; ++j) {
    const Index kj = s.shifts[j].k, nj = s.shifts[j].n;
    const MatrixXc &U = t.entries[j];
    D.setZero();
    bool any = false;
    for (Index m = 0; m < t.Jn; ++m)
      for (Index l = 0; l < t.Jt; ++l)
        if (!subset || (*subset)(m, l)) {
          D(m * sx, l * sxi) = U(m, l);
          any = any || U(m, l) != cd(0);
        }
    if (!any)
      continue;
    dft_cols(D, false);
    dft_rows(D, false);
    // W(x, xi + n_j Omega): a column roll by -n_j K, i.e. a phase on the column spectrum.
    for (Index c = 0; c < n; ++c)
      D.col(c) = D.col(c).cwiseProduct(W.col(c)) * unit(c * nj * K, n);
    dft_cols(D, true);
    dft_rows(D, true);
    D /= static_cast<double>(n) * static_cast<double>(n);
    for (Index x = 0; x < n; ++x)
      for (Index c = 0; c < n; ++c)
        out.values(x, c) += scale * unit(nj * K * x - kj * nT * c, n) * D(x, c);
  }
  return modulate_x(std::move(out), demod_shift(s, PouKind::quadratic));
}

} // namespace opsamp
