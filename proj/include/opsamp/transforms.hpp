#pragma once

#include "opsamp/grid.hpp"

#include <unsupported/Eigen/FFT>

#include <vector>

namespace opsamp {

namespace detail {
template <typename Real>
Eigen::FFT<Real> &fft_engine() {
  thread_local Eigen::FFT<Real> engine;
  return engine;
}
} // namespace detail

// Unscaled DFT, sum_n x[n] e^{-2 pi i k n / N}.
template <typename Derived>
CVector<typename Derived::RealScalar> dft(const Eigen::MatrixBase<Derived> &x) {
  using Real = typename Derived::RealScalar;
  std::vector<std::complex<Real>> in(x.size()), out;
  for (Index i = 0; i < x.size(); ++i)
    in[i] = x(i);
  detail::fft_engine<Real>().fwd(out, in);
  return Eigen::Map<CVector<Real>>(out.data(), static_cast<Index>(out.size()));
}

// Unscaled inverse DFT, sum_k X[k] e^{+2 pi i k n / N}.
template <typename Derived>
CVector<typename Derived::RealScalar> idft(const Eigen::MatrixBase<Derived> &x) {
  using Real = typename Derived::RealScalar;
  std::vector<std::complex<Real>> in(x.size()), out;
  for (Index i = 0; i < x.size(); ++i)
    in[i] = x(i);
  auto &engine = detail::fft_engine<Real>();
  engine.SetFlag(Eigen::FFT<Real>::Unscaled);
  engine.inv(out, in);
  engine.ClearFlag(Eigen::FFT<Real>::Unscaled);
  return Eigen::Map<CVector<Real>>(out.data(), static_cast<Index>(out.size()));
}

// Column-wise transforms of a matrix.
template <typename Real>
void dft_cols(CMatrix<Real> &m, bool inverse) {
  for (Index j = 0; j < m.cols(); ++j)
    m.col(j) = inverse ? idft(m.col(j)) : dft(m.col(j));
}
template <typename Real>
void dft_rows(CMatrix<Real> &m, bool inverse) {
  CMatrix<Real> t = m.transpose();
  dft_cols(t, inverse);
  m = t.transpose();
}

// Quadrature-scaled transforms: fhat = dt * DFT(f), f = dnu * IDFT(fhat).
template <typename Derived>
CVector<typename Derived::RealScalar> ft_samples(const Eigen::MatrixBase<Derived> &f, double dt) {
  return dft(f) * static_cast<typename Derived::RealScalar>(dt);
}
template <typename Derived>
CVector<typename Derived::RealScalar> ift_samples(const Eigen::MatrixBase<Derived> &fhat,
                                                  double dnu) {
  return idft(fhat) * static_cast<typename Derived::RealScalar>(dnu);
}

template <typename Real>
BasicSignal<Real> forward_ft(const BasicSignal<Real> &s) {
  if (s.domain != Domain::time)
    throw Error(Error::Kind::domain, "forward_ft expects a time-domain signal");
  return BasicSignal<Real>(s.grid, ft_samples(s.values, s.grid.dt), Domain::frequency);
}

template <typename Real>
BasicSignal<Real> inverse_ft(const BasicSignal<Real> &s) {
  if (s.domain != Domain::frequency)
    throw Error(Error::Kind::domain, "inverse_ft expects a frequency-domain signal");
  return BasicSignal<Real>(s.grid, ift_samples(s.values, s.grid.dnu()), Domain::time);
}

// sigma(x, xi) = sum_{t, gamma} eta(t, gamma) e^{2 pi i (gamma x - t xi)} dt dnu.
// The same map sends a symbol back to its spreading function.
template <typename Real>
BasicPlane<Real> symplectic_ft(const BasicPlane<Real> &p) {
  if (p.semantics != Semantics::time_freq && p.semantics != Semantics::symbol)
    throw Error(Error::Kind::domain, "symplectic_ft needs time_freq or symbol semantics");
  const GridSpec &g = p.grid_x;
  CMatrix<Real> a = p.to_full();
  dft_cols(a, false);                 // (xi, gamma)
  dft_rows(a, true);                  // (xi, x)
  BasicPlane<Real> out = BasicPlane<Real>::full(
      g, p.semantics == Semantics::time_freq ? Semantics::symbol : Semantics::time_freq);
  out.values = a.transpose() * static_cast<Real>(g.dt * g.dnu());
  return out;
}

// V_g f(x, xi) = sum_t f(t) conj(g(t - x)) e^{-2 pi i xi t} dt, at grid-aligned (x, xi).
template <typename Real>
std::complex<Real> stft(const BasicSignal<Real> &f, const BasicSignal<Real> &window, double x,
                        double xi) {
  require_same_grid(f.grid, window.grid);
  const GridSpec &g = f.grid;
  Index ix = aligned_count(x, g.dt, "stft time");
  Index ik = aligned_count(xi, g.dnu(), "stft frequency");
  const Index n = g.N();
  std::complex<Real> acc(0);
  for (Index i = 0; i < n; ++i) {
    std::complex<Real> w = window.values(pmod(i - ix, n));
    if (w == std::complex<Real>(0))
      continue;
    Real ph = -static_cast<Real>(kTwoPi) * static_cast<Real>(pmod(ik * i, n)) / static_cast<Real>(n);
    acc += f.values(i) * std::conj(w) * std::polar(Real(1), ph);
  }
  return acc * static_cast<Real>(g.dt);
}

// All V_g f(k a, l b) on the lattice a Z x b Z of the periodic plane.
// Rows k in [0, P/a), columns l in [0, 1/(b dt)); positions use centered indices.
template <typename Real>
CMatrix<Real> stft_lattice(const BasicSignal<Real> &f, const BasicSignal<Real> &window, double a,
                           double b) {
  require_same_grid(f.grid, window.grid);
  const GridSpec &g = f.grid;
  const Index n = g.N();
  Index sa = aligned_count(a, g.dt, "lattice step a");
  Index J = aligned_count(1.0 / b, g.dt, "lattice period 1/b");
  if (sa <= 0 || J <= 0 || n % sa != 0 || n % J != 0)
    throw Error(Error::Kind::grid, "lattice does not divide the ambient period");
  std::vector<Index> support;
  for (Index i = 0; i < n; ++i)
    if (window.values(i) != std::complex<Real>(0))
      support.push_back(i);
  const Index rows = n / sa;
  CMatrix<Real> out(rows, J);
  CVector<Real> fold(J);
  for (Index k = 0; k < rows; ++k) {
    fold.setZero();
    Index shift = k * sa;
    for (Index s : support) {
      Index t = pmod(s + shift, n);
      // e^{-2 pi i l b t} depends on t mod J; t is read as an index.
      fold(t % J) += f.values(t) * std::conj(window.values(s));
    }
    out.row(k) = dft(fold).transpose() * static_cast<Real>(g.dt);
  }
  return out;
}

// Z f(t, nu) = sum_{n=0}^{K-1} f(t - n L T) e^{2 pi i n L T nu} at one grid point.
template <typename Real>
std::complex<Real> zak_value(const BasicSignal<Real> &f, Index L, Index n_per_T, Index ti,
                             Index ki) {
  const GridSpec &g = f.grid;
  const Index n = g.N(), span = L * n_per_T, K = n / span;
  std::complex<Real> acc(0);
  Index kc = g.centered(ki);
  for (Index m = 0; m < K; ++m) {
    Real ph = static_cast<Real>(kTwoPi) * static_cast<Real>(pmod(m * kc, K)) / static_cast<Real>(K);
    acc += f.values(pmod(ti - m * span, n)) * std::polar(Real(1), ph);
  }
  return acc;
}

// Zak transform on [0, LT) x [-Omega/2, Omega/2), Omega = 1/(LT).
// Energy: L T dt dnu sum |Z|^2 = ||f||^2.
template <typename Real>
BasicPlane<Real> zak_transform(const BasicSignal<Real> &f, Index L, double T) {
  const GridSpec &g = f.grid;
  Index nT = aligned_count(T, g.dt, "T");
  const Index span = L * nT;
  if (span <= 0 || g.N() % span != 0)
    throw Error(Error::Kind::grid, "LT does not divide the ambient period");
  const Index K = g.N() / span;
  BasicPlane<Real> z = BasicPlane<Real>::window(g, Semantics::zak, 0, span, -(K / 2), K);
  for (Index i = 0; i < span; ++i) {
    CVector<Real> col(K);
    for (Index m = 0; m < K; ++m)
      col(m) = f.values(pmod(i - m * span, g.N()));
    CVector<Real> sp = idft(col);   // index q: sum_m col[m] e^{2 pi i m q / K}
    for (Index b = 0; b < K; ++b)
      z.values(i, b) = sp(pmod(b - K / 2, K));
  }
  return z;
}

// Inverse Zak transform: f(t - n L T) = (1/K) sum_nu Z(t, nu) e^{-2 pi i n L T nu}.
template <typename Real>
BasicSignal<Real> inverse_zak(const BasicPlane<Real> &z, Index L, double T) {
  const GridSpec &g = z.grid_x;
  Index nT = aligned_count(T, g.dt, "T");
  const Index span = L * nT, K = g.N() / span;
  BasicSignal<Real> f = BasicSignal<Real>::zero(g);
  for (Index i = 0; i < span; ++i) {
    CVector<Real> sp(K);
    for (Index b = 0; b < K; ++b)
      sp(pmod(b - K / 2, K)) = z.values(i, b);
    CVector<Real> col = dft(sp) / static_cast<Real>(K);
    for (Index m = 0; m < K; ++m)
      f.values(pmod(i - m * span, g.N())) = col(m);
  }
  return f;
}

} // namespace opsamp
