#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace opsamp {

using Index = Eigen::Index;
using cd = std::complex<double>;

template <typename Real>
using CVector = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;
template <typename Real>
using CMatrix = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
using VectorXc = CVector<double>;
using MatrixXc = CMatrix<double>;
using MaskXb = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

class Error : public std::runtime_error {
public:
  enum class Kind { grid, domain, config, numeric };
  Error(Kind kind, const std::string &what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

private:
  Kind kind_;
};

inline const char *to_string(Error::Kind k) {
  switch (k) {
  case Error::Kind::grid: return "grid";
  case Error::Kind::domain: return "domain";
  case Error::Kind::config: return "config";
  case Error::Kind::numeric: return "numeric";
  }
  return "?";
}

inline Index pmod(Index i, Index n) {
  Index r = i % n;
  return r < 0 ? r + n : r;
}

// Integer multiple of step, or throw.
inline Index aligned_count(double value, double step, const char *what) {
  double q = value / step;
  double r = std::round(q);
  if (std::abs(q - r) > 1e-9 * std::max(1.0, std::abs(q)))
    throw Error(Error::Kind::grid, std::string(what) + " is not aligned to the grid step");
  return static_cast<Index>(r);
}

inline bool is_aligned(double value, double step) {
  double q = value / step;
  return std::abs(q - std::round(q)) <= 1e-9 * std::max(1.0, std::abs(q));
}

// Periodic sampling grid: N = L * n_per_T * periods samples of width dt.
// Sample i sits at time centered(i) * dt, frequency bin k at centered(k) * dnu.
struct GridSpec {
  double dt = 1.0;
  Index n_per_T = 1;
  Index periods = 1;
  Index L = 1;

  static GridSpec make(double T, Index n_per_T, Index periods, Index L = 1) {
    if (n_per_T <= 0 || periods <= 0 || L <= 0 || T <= 0)
      throw Error(Error::Kind::grid, "grid parameters must be positive");
    return GridSpec{T / static_cast<double>(n_per_T), n_per_T, periods, L};
  }

  Index N() const { return L * n_per_T * periods; }
  double T() const { return dt * static_cast<double>(n_per_T); }
  double P() const { return dt * static_cast<double>(N()); }
  double dnu() const { return 1.0 / P(); }

  Index wrap(Index i) const { return pmod(i, N()); }
  Index centered(Index i) const {
    Index n = N(), w = pmod(i, n);
    return w >= (n + 1) / 2 ? w - n : w;
  }
  double time(Index i) const { return static_cast<double>(centered(i)) * dt; }
  double freq(Index k) const { return static_cast<double>(centered(k)) * dnu(); }
  Index time_index(double t) const { return wrap(aligned_count(t, dt, "time")); }
  Index freq_index(double nu) const { return wrap(aligned_count(nu, dnu(), "frequency")); }

  bool operator==(const GridSpec &o) const {
    return N() == o.N() && std::abs(dt - o.dt) <= 1e-15 * dt;
  }
  bool operator!=(const GridSpec &o) const { return !(*this == o); }
};

inline void require_same_grid(const GridSpec &a, const GridSpec &b) {
  if (a != b)
    throw Error(Error::Kind::grid, "grid mismatch");
}

enum class Domain { time, frequency };

template <typename Real>
struct BasicSignal {
  GridSpec grid;
  CVector<Real> values;
  Index origin_index = 0;
  Domain domain = Domain::time;

  BasicSignal() = default;
  BasicSignal(const GridSpec &g, CVector<Real> v, Domain d = Domain::time)
      : grid(g), values(std::move(v)), domain(d) {
    if (values.size() != grid.N())
      throw Error(Error::Kind::grid, "signal length does not match grid");
  }
  static BasicSignal zero(const GridSpec &g, Domain d = Domain::time) {
    return BasicSignal(g, CVector<Real>::Zero(g.N()), d);
  }

  Index size() const { return values.size(); }
  std::complex<Real> at(Index i) const { return values(grid.wrap(i)); }
  Real step() const { return static_cast<Real>(domain == Domain::time ? grid.dt : grid.dnu()); }
  Real norm() const { return std::sqrt(step()) * values.norm(); }
};
using SampledSignal = BasicSignal<double>;

enum class Semantics { time_freq, symbol, kernel, impulse, zak };

inline const char *to_string(Semantics s) {
  switch (s) {
  case Semantics::time_freq: return "time_freq";
  case Semantics::symbol: return "symbol";
  case Semantics::kernel: return "kernel";
  case Semantics::impulse: return "impulse";
  case Semantics::zak: return "zak";
  }
  return "?";
}

// 2-D array over a cyclic window of the periodic N x N plane.
// values(i, k) is the sample at global indices (x_first + i, y_first + k) mod N.
template <typename Real>
struct BasicPlane {
  GridSpec grid_x;
  GridSpec grid_y;
  Semantics semantics = Semantics::time_freq;
  Index x_first = 0;
  Index y_first = 0;
  CMatrix<Real> values;

  static BasicPlane full(const GridSpec &g, Semantics s) {
    BasicPlane p;
    p.grid_x = g;
    p.grid_y = g;
    p.semantics = s;
    p.values = CMatrix<Real>::Zero(g.N(), g.N());
    return p;
  }
  static BasicPlane window(const GridSpec &g, Semantics s, Index x_first, Index nx, Index y_first,
                           Index ny) {
    BasicPlane p;
    p.grid_x = g;
    p.grid_y = g;
    p.semantics = s;
    p.x_first = g.wrap(x_first);
    p.y_first = g.wrap(y_first);
    p.values = CMatrix<Real>::Zero(nx, ny);
    return p;
  }

  bool is_full() const {
    return values.rows() == grid_x.N() && values.cols() == grid_y.N() && x_first == 0 && y_first == 0;
  }
  double step_x() const { return grid_x.dt; }
  double step_y() const {
    return (semantics == Semantics::kernel || semantics == Semantics::impulse) ? grid_y.dt
                                                                               : grid_y.dnu();
  }
  // Local row of global index i, or -1 outside the window.
  Index local_x(Index i) const {
    Index l = pmod(i - x_first, grid_x.N());
    return l < values.rows() ? l : -1;
  }
  Index local_y(Index k) const {
    Index l = pmod(k - y_first, grid_y.N());
    return l < values.cols() ? l : -1;
  }
  std::complex<Real> at(Index i, Index k) const {
    Index a = local_x(i), b = local_y(k);
    return (a < 0 || b < 0) ? std::complex<Real>(0) : values(a, b);
  }
  CMatrix<Real> to_full() const {
    if (is_full())
      return values;
    CMatrix<Real> out = CMatrix<Real>::Zero(grid_x.N(), grid_y.N());
    for (Index b = 0; b < values.cols(); ++b) {
      Index k = grid_y.wrap(y_first + b);
      for (Index a = 0; a < values.rows(); ++a)
        out(grid_x.wrap(x_first + a), k) = values(a, b);
    }
    return out;
  }
  Real norm() const { return std::sqrt(static_cast<Real>(step_x() * step_y())) * values.norm(); }
};
using PlaneArray = BasicPlane<double>;

} // namespace opsamp
