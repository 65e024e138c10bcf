#include "opsamp/windows.hpp"

#include "opsamp/transforms.hpp"

#include <algorithm>
#include <array>
#include <random>

namespace opsamp {

namespace {

constexpr int kGaussNodes = 20;
constexpr int kPanels = 24;

struct GaussLegendre {
  std::array<double, kGaussNodes> x{}, w{};
  GaussLegendre() {
    const int n = kGaussNodes;
    for (int i = 0; i < n; ++i) {
      double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
      double dp = 1;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1, p1 = z;
        for (int k = 2; k <= n; ++k) {
          double p2 = ((2.0 * k - 1) * z * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (z * p1 - p0) / (z * z - 1);
        double dz = p1 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-16)
          break;
      }
      x[i] = z;
      w[i] = 2.0 / ((1 - z * z) * dp * dp);
    }
  }
};

const GaussLegendre &gauss() {
  static const GaussLegendre g;
  return g;
}

double bump_integral(double u) {
  const auto &g = gauss();
  double h = u / kPanels, acc = 0;
  for (int p = 0; p < kPanels; ++p) {
    double a = p * h;
    for (int i = 0; i < kGaussNodes; ++i) {
      double s = a + 0.5 * h * (g.x[i] + 1);
      acc += g.w[i] * bump(2 * s - 1);
    }
  }
  return 0.5 * h * acc;
}

double bump_mass() {
  static const double m = bump_integral(1.0);
  return m;
}

} // namespace

double bump(double x) {
  if (x <= -1 || x >= 1)
    return 0;
  return std::exp(-1.0 / (1.0 - x * x));
}

double smoothstep(double u) {
  if (u <= 0)
    return 0;
  if (u >= 1)
    return 1;
  if (u > 0.5)
    return 1.0 - bump_integral(1.0 - u) / bump_mass();
  return bump_integral(u) / bump_mass();
}

double linear_window(double x, double lo, double hi, double delta) {
  double up = smoothstep((x - lo + delta) / (2 * delta));
  double down = smoothstep((x - hi + delta) / (2 * delta));
  return up * (1.0 - down);
}

double quadratic_window(double x, double lo, double hi, double delta) {
  // sin/cos of the exact endpoints are pinned so the support is exactly compact.
  auto rise = [](double s) { return s <= 0 ? 0.0 : s >= 1 ? 1.0 : std::sin(0.5 * M_PI * s); };
  double up = rise(smoothstep((x - lo + delta) / (2 * delta)));
  double down = rise(1.0 - smoothstep((x - hi + delta) / (2 * delta)));
  return up * down;
}

const char *to_string(PouKind k) { return k == PouKind::linear ? "linear_pou" : "quadratic_pou"; }

WindowPair build_pou_pair(PouKind kind, double T, double Omega, double delta,
                          const GridSpec &grid) {
  if (!(delta > 0) || delta >= T / 2 || delta >= Omega / 2)
    throw Error(Error::Kind::domain, "window padding must satisfy 0 < delta < min(T, Omega)/2");
  aligned_count(T, grid.dt, "T");
  aligned_count(Omega, grid.dnu(), "Omega");
  WindowPair w;
  w.T = T;
  w.Omega = Omega;
  w.delta = delta;
  w.kind = kind;
  const Index n = grid.N();
  VectorXc r(n), ph(n);
  for (Index i = 0; i < n; ++i) {
    double t = grid.time(i), nu = grid.freq(i);
    if (kind == PouKind::linear) {
      r(i) = linear_window(t, 0, T, delta);
      ph(i) = linear_window(nu, 0, Omega, delta);
    } else {
      r(i) = quadratic_window(t, 0, T, delta);
      ph(i) = quadratic_window(nu, -Omega / 2, Omega / 2, delta);
    }
  }
  w.r = SampledSignal(grid, r);
  w.phi_hat = SampledSignal(grid, ph, Domain::frequency);
  w.phi = inverse_ft(w.phi_hat);
  return w;
}

PouResiduals pou_residuals(const WindowPair &w) {
  const GridSpec &g = w.r.grid;
  const Index n = g.N();
  const Index st = aligned_count(w.T, g.dt, "T");
  const Index sf = aligned_count(w.Omega, g.dnu(), "Omega");
  auto residual = [&](const VectorXc &v, Index step) {
    double worst = 0;
    for (Index i = 0; i < n; ++i) {
      double acc = 0;
      for (Index k = 0; k < n / step; ++k) {
        cd val = v(pmod(i - k * step, n));
        acc += w.kind == PouKind::linear ? val.real() : std::norm(val);
      }
      worst = std::max(worst, std::abs(acc - 1.0));
    }
    return worst;
  };
  return {residual(w.r.values, st), residual(w.phi_hat.values, sf)};
}

SampledSignal bump_signal(double s, const GridSpec &grid) {
  const Index n = grid.N();
  VectorXc v = VectorXc::Zero(n);
  if (s < grid.dt) {
    v(0) = 1.0 / grid.dt;
    return SampledSignal(grid, v);
  }
  for (Index i = 0; i < n; ++i)
    v(i) = bump(grid.time(i) / s);
  v /= v.sum().real() * grid.dt;
  return SampledSignal(grid, v);
}

double flatness(const SampledSignal &phi, const Band &band) {
  SampledSignal hat = forward_ft(phi);
  const GridSpec &g = phi.grid;
  double worst = 0;
  for (Index k = 0; k < g.N(); ++k) {
    double nu = g.freq(k);
    if (band.full_line || (nu >= band.lo - 1e-12 && nu <= band.hi + 1e-12))
      worst = std::max(worst, std::abs(hat.values(k) - 1.0));
  }
  return worst;
}

Mollifier build_mollifier(double delta, const Band &band, double target_eps, const GridSpec &grid) {
  if (!(delta > 0))
    throw Error(Error::Kind::domain, "mollifier half-width must be positive");
  Mollifier m;
  m.band = band;
  m.requested_delta = delta;
  auto make = [&](double s) {
    m.phi = bump_signal(s, grid);
    m.delta = s < grid.dt ? 0.0 : s;
    m.flatness_eps = flatness(m.phi, band);
  };
  if (band.full_line) {
    make(0.0);
    m.target_met = m.flatness_eps <= target_eps;
    return m;
  }
  make(delta);
  if (m.flatness_eps <= target_eps)
    return m;
  const double s_min = std::min(delta, 2 * grid.dt);
  make(s_min);
  if (m.flatness_eps > target_eps) {
    m.target_met = false;
    return m;
  }
  double lo = s_min, hi = delta;
  for (int it = 0; it < 50 && hi - lo > 1e-6 * grid.dt; ++it) {
    double mid = 0.5 * (lo + hi);
    make(mid);
    (m.flatness_eps <= target_eps ? lo : hi) = mid;
  }
  make(lo);
  return m;
}

SampledSignal frame_operator(const GaborFrameSpec &spec, const SampledSignal &f) {
  require_same_grid(spec.g.grid, f.grid);
  const GridSpec &grid = f.grid;
  const Index n = grid.N();
  const Index sa = aligned_count(spec.a, grid.dt, "lattice step a");
  const Index J = aligned_count(1.0 / spec.b, grid.dt, "lattice period 1/b");
  if (sa <= 0 || J <= 0 || n % sa != 0 || n % J != 0)
    throw Error(Error::Kind::grid, "lattice does not divide the ambient period");
  std::vector<Index> support;
  for (Index i = 0; i < n; ++i)
    if (spec.g.values(i) != cd(0))
      support.push_back(i);
  if (support.empty())
    throw Error(Error::Kind::domain, "degenerate window");
  VectorXc out = VectorXc::Zero(n), fold(J);
  for (Index k = 0; k < n / sa; ++k) {
    fold.setZero();
    for (Index s : support) {
      Index t = pmod(s + k * sa, n);
      fold(t % J) += f.values(t) * std::conj(spec.g.values(s));
    }
    for (Index s : support) {
      Index t = pmod(s + k * sa, n);
      out(t) += spec.g.values(s) * fold(t % J);
    }
  }
  return SampledSignal(grid, out / spec.b);
}

namespace {

double rayleigh(const VectorXc &v, const VectorXc &sv) { return v.dot(sv).real() / v.squaredNorm(); }

} // namespace

FrameBounds frame_bounds(const GaborFrameSpec &spec, std::uint64_t seed, double tol, int max_iter) {
  const GridSpec &grid = spec.g.grid;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  VectorXc v(grid.N());
  for (Index i = 0; i < v.size(); ++i)
    v(i) = cd(nd(rng), nd(rng));
  FrameBounds fb;
  auto apply_S = [&](const VectorXc &x) { return frame_operator(spec, SampledSignal(grid, x)).values; };

  VectorXc u = v.normalized();
  double lam = 0;
  for (int it = 0; it < max_iter; ++it) {
    VectorXc su = apply_S(u);
    double next = rayleigh(u, su);
    ++fb.iterations;
    double nrm = su.norm();
    if (nrm == 0)
      throw Error(Error::Kind::domain, "degenerate window");
    u = su / nrm;
    if (it > 0 && std::abs(next - lam) <= tol * std::abs(next)) {
      lam = next;
      break;
    }
    lam = next;
  }
  fb.B = lam;

  u = v.normalized();
  double mu = 0;
  for (int it = 0; it < max_iter; ++it) {
    VectorXc mu_u = fb.B * u - apply_S(u);
    double next = rayleigh(u, mu_u);
    ++fb.iterations;
    double nrm = mu_u.norm();
    if (nrm <= 1e-13 * fb.B) {
      mu = std::max(0.0, next);
      break;
    }
    u = mu_u / nrm;
    if (it > 0 && std::abs(next - mu) <= tol * fb.B) {
      mu = next;
      break;
    }
    mu = next;
  }
  fb.A = fb.B - std::max(0.0, mu);
  return fb;
}

GaborFrameSpec normalize_tight(const GaborFrameSpec &spec, double A) {
  GaborFrameSpec out = spec;
  out.g.values /= std::sqrt(A);
  out.declared_bound = 1.0;
  return out;
}

double Lattice::x(Index k) const {
  Index c = k >= (rows + 1) / 2 ? k - rows : k;
  return static_cast<double>(c) * a;
}

double Lattice::xi(Index l) const {
  Index c = l >= (cols + 1) / 2 ? l - cols : l;
  return static_cast<double>(c) * b;
}

Lattice frame_lattice(const GaborFrameSpec &spec) {
  const GridSpec &g = spec.g.grid;
  Lattice lat;
  lat.a = spec.a;
  lat.b = spec.b;
  lat.rows = g.N() / aligned_count(spec.a, g.dt, "lattice step a");
  lat.cols = aligned_count(1.0 / spec.b, g.dt, "lattice period 1/b");
  return lat;
}

MaskXb lattice_box(const Lattice &lat, double x_lo, double x_hi, double xi_lo, double xi_hi) {
  MaskXb m(lat.rows, lat.cols);
  const double eps = 1e-9;
  for (Index k = 0; k < lat.rows; ++k)
    for (Index l = 0; l < lat.cols; ++l) {
      double x = lat.x(k), xi = lat.xi(l);
      m(k, l) = x >= x_lo - eps && x <= x_hi + eps && xi >= xi_lo - eps && xi <= xi_hi + eps;
    }
  return m;
}

double localization_measure(const SampledSignal &f, const GaborFrameSpec &spec, const MaskXb &S) {
  MatrixXc c = stft_lattice(f, spec.g, spec.a, spec.b);
  if (S.rows() != c.rows() || S.cols() != c.cols())
    throw Error(Error::Kind::grid, "region mask does not match the coefficient lattice");
  double total = c.squaredNorm();
  if (total == 0)
    throw Error(Error::Kind::domain, "localization of the zero signal is undefined");
  double inside = 0;
  for (Index k = 0; k < c.rows(); ++k)
    for (Index l = 0; l < c.cols(); ++l)
      if (S(k, l))
        inside += std::norm(c(k, l));
  return inside / total;
}

MaskXb erode(const MaskXb &S, double d, double scale_x, double scale_y) {
  if (d < 0)
    throw Error(Error::Kind::domain, "erosion radius must be nonnegative");
  const Index rows = S.rows(), cols = S.cols();
  const Index rx = static_cast<Index>(std::floor(d / scale_x + 1e-9));
  const Index ry = static_cast<Index>(std::floor(d / scale_y + 1e-9));
  MaskXb out = S;
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) {
      if (!S(i, j))
        continue;
      bool keep = true;
      for (Index di = -rx; di <= rx && keep; ++di)
        for (Index dj = -ry; dj <= ry && keep; ++dj) {
          double ex = di * scale_x, ey = dj * scale_y;
          if (ex * ex + ey * ey > d * d * (1 + 1e-12))
            continue;
          if (!S(pmod(i + di, rows), pmod(j + dj, cols)))
            keep = false;
        }
      out(i, j) = keep;
    }
  return out;
}

} // namespace opsamp
