#include "opsamp/identify.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <limits>
#include <random>
#include <set>
#include <sstream>

namespace opsamp {

bool is_prime(Index n) {
  if (n < 2)
    return false;
  for (Index d = 2; d * d <= n; ++d)
    if (n % d == 0)
      return false;
  return true;
}

namespace {

struct Point {
  double t, g;
};

struct Candidate {
  bool ok = false;
  Index L = 0;
  double T = 0, Omega = 0, gamma0 = 0, margin = -1;
  std::vector<Shift> cells;
};

double interval_gap(double x, double lo, double hi) {
  if (x < lo)
    return lo - x;
  if (x > hi)
    return x - hi;
  return 0;
}

double cell_distance(const Point &p, int k, int n, double T, double Omega, double gamma0) {
  double t0 = k * T, g0 = gamma0 + (n - 0.5) * Omega;
  return std::max(interval_gap(p.t, t0, t0 + T), interval_gap(p.g, g0, g0 + Omega));
}

Candidate evaluate(const std::vector<Point> &pts, Index L, double T, double Omega, double gamma0) {
  Candidate c;
  c.L = L;
  c.T = T;
  c.Omega = Omega;
  c.gamma0 = gamma0;
  std::set<std::pair<int, int>> cells;
  for (const Point &p : pts) {
    int k = static_cast<int>(std::floor(p.t / T + 1e-12));
    int n = static_cast<int>(std::floor((p.g - gamma0) / Omega + 0.5 + 1e-12));
    cells.insert({k, n});
    if (static_cast<Index>(cells.size()) > L)
      return c;
  }
  std::set<std::pair<Index, Index>> residues;
  for (auto [k, n] : cells)
    if (!residues.insert({pmod(k, L), pmod(n, L)}).second)
      return c;
  double margin = std::numeric_limits<double>::infinity();
  for (const Point &p : pts) {
    int k = static_cast<int>(std::floor(p.t / T + 1e-12));
    int n = static_cast<int>(std::floor((p.g - gamma0) / Omega + 0.5 + 1e-12));
    for (int dk = -1; dk <= 1; ++dk)
      for (int dn = -1; dn <= 1; ++dn)
        if (!cells.count({k + dk, n + dn}))
          margin = std::min(margin, cell_distance(p, k + dk, n + dn, T, Omega, gamma0));
  }
  for (auto [k, n] : cells)
    c.cells.push_back({k, n});
  c.margin = margin;
  c.ok = true;
  return c;
}

} // namespace

SamplingScheme find_cover(const SupportRegion &M, Index L_max, const CoverOptions &opts) {
  if (M.area >= 1)
    throw Error(Error::Kind::domain, "support area must be below 1");
  const GridSpec &g = M.grid;
  std::vector<Point> pts;
  const Index i0 = g.centered(M.t_first), k0 = g.centered(M.g_first);
  for (Index a = 0; a < M.mask.rows(); ++a)
    for (Index b = 0; b < M.mask.cols(); ++b)
      if (M.mask(a, b))
        pts.push_back({static_cast<double>(i0 + a) * g.dt, static_cast<double>(k0 + b) * g.dnu()});
  if (pts.empty())
    throw Error(Error::Kind::domain, "empty support region");

  std::ostringstream diag;
  Candidate best;
  for (Index L = 1; L <= std::max<Index>(1, L_max); ++L) {
    if (L == 1 ? !opts.allow_rect : !is_prime(L))
      continue;
    for (double T : opts.T_candidates) {
      double Omega = 1.0 / (static_cast<double>(L) * T);
      if (!is_aligned(T, g.dt) || !is_aligned(Omega, g.dnu())) {
        diag << "L=" << L << " T=" << T << ": not grid aligned; ";
        continue;
      }
      Index span = L * aligned_count(T, g.dt, "T");
      if (g.N() % span != 0) {
        diag << "L=" << L << " T=" << T << ": LT does not divide the period; ";
        continue;
      }
      Index offsets = aligned_count(Omega, g.dnu(), "Omega");
      Index feasible = 0;
      for (Index j = 0; j < offsets; ++j) {
        Candidate c = evaluate(pts, L, T, Omega, static_cast<double>(j) * g.dnu());
        if (!c.ok)
          continue;
        ++feasible;
        bool better = !best.ok || c.margin > best.margin + 1e-12 ||
                      (std::abs(c.margin - best.margin) <= 1e-12 && c.T > best.T + 1e-12);
        if (better)
          best = c;
      }
      diag << "L=" << L << " T=" << T << ": " << feasible << " feasible origins of " << offsets
           << "; ";
    }
    if (best.ok)
      break;
  }
  if (!best.ok)
    throw Error(Error::Kind::domain, "no cover found: " + diag.str());

  SamplingScheme s;
  s.L = best.L;
  s.T = best.T;
  s.Omega = best.Omega;
  s.freq_origin = best.gamma0;
  s.margin = best.margin;
  s.delta = std::min({best.margin * (1 - 1e-6), best.T / 4, best.Omega / 4});
  s.shifts = best.cells;
  s.occupied.assign(s.shifts.size(), true);

  std::set<std::pair<Index, Index>> used;
  for (const Shift &sh : s.shifts)
    used.insert({pmod(sh.k, s.L), pmod(sh.n, s.L)});
  const int reach = static_cast<int>(3 * s.L + 3);
  for (int r = 0; r <= reach && static_cast<Index>(s.shifts.size()) < s.L; ++r)
    for (int k = -r; k <= r && static_cast<Index>(s.shifts.size()) < s.L; ++k)
      for (int n = -r; n <= r && static_cast<Index>(s.shifts.size()) < s.L; ++n) {
        if (std::max(std::abs(k), std::abs(n)) != r || used.count({pmod(k, s.L), pmod(n, s.L)}))
          continue;
        double dmin = std::numeric_limits<double>::infinity();
        for (const Point &p : pts)
          dmin = std::min(dmin, cell_distance(p, k, n, s.T, s.Omega, s.freq_origin));
        if (dmin < s.margin)
          continue;
        s.shifts.push_back({k, n});
        s.occupied.push_back(false);
        used.insert({pmod(k, s.L), pmod(n, s.L)});
      }
  if (static_cast<Index>(s.shifts.size()) != s.L)
    throw Error(Error::Kind::domain, "could not pad the cover to L cells");

  const double tlo = -(static_cast<double>(s.L) - 1) * s.T / 2,
               thi = (static_cast<double>(s.L) + 1) * s.T / 2,
               glim = static_cast<double>(s.L) * s.Omega / 2;
  for (const Shift &sh : s.shifts) {
    double t0 = sh.k * s.T, gc = s.freq_origin + sh.n * s.Omega;
    if (t0 < tlo - 1e-12 || t0 + s.T > thi + 1e-12 || gc - s.Omega / 2 < -glim - 1e-12 ||
        gc + s.Omega / 2 > glim + 1e-12)
      s.fits_window = false;
  }
  return s;
}

MatrixXc gabor_system_matrix(const VectorXc &c) {
  const Index L = c.size();
  MatrixXc G(L, L * L);
  for (Index k = 0; k < L; ++k)
    for (Index l = 0; l < L; ++l)
      for (Index p = 0; p < L; ++p)
        G(p, k * L + l) = std::polar(1.0, kTwoPi * static_cast<double>(pmod(l * (p + k), L)) /
                                              static_cast<double>(L)) *
                          c(pmod(p + k, L));
  return G;
}

MatrixXc system_matrix(const VectorXc &c, const std::vector<Shift> &shifts) {
  const Index L = c.size();
  if (static_cast<Index>(shifts.size()) != L)
    throw Error(Error::Kind::domain, "need exactly L shifts");
  MatrixXc A(L, L);
  for (Index j = 0; j < L; ++j)
    for (Index p = 0; p < L; ++p)
      A(p, j) = c(pmod(p - shifts[j].k, L)) *
                std::polar(1.0, kTwoPi * static_cast<double>(pmod(shifts[j].n * p, L)) /
                                    static_cast<double>(L));
  return A;
}

VectorXc cubic_phase(Index L) {
  VectorXc c(L);
  for (Index n = 0; n < L; ++n)
    c(n) = std::polar(1.0, kTwoPi * static_cast<double>(pmod(n * n * n, L)) / static_cast<double>(L));
  return c;
}

double condition_number(const MatrixXc &A) {
  Eigen::JacobiSVD<MatrixXc> svd(A);
  const auto &sv = svd.singularValues();
  double lo = sv(sv.size() - 1);
  return lo <= 0 ? std::numeric_limits<double>::infinity() : sv(0) / lo;
}

SamplingScheme with_weights(SamplingScheme s, const VectorXc &c) {
  s.c = c;
  s.A = system_matrix(c, s.shifts);
  s.condition_number = condition_number(s.A);
  s.B = std::isfinite(s.condition_number) ? MatrixXc(s.A.fullPivLu().inverse())
                                          : MatrixXc::Zero(s.L, s.L);
  return s;
}

SamplingScheme make_weights(SamplingScheme s, std::uint64_t seed) {
  if (s.L != 1 && !is_prime(s.L))
    throw Error(Error::Kind::domain, "L must be prime");
  if (static_cast<Index>(s.shifts.size()) != s.L)
    throw Error(Error::Kind::domain, "scheme needs exactly L shifts");
  std::set<std::pair<Index, Index>> res;
  for (const Shift &sh : s.shifts)
    if (!res.insert({pmod(sh.k, s.L), pmod(sh.n, s.L)}).second)
      throw Error(Error::Kind::domain, "shift residues are not distinct");
  if (s.L == 1)
    return with_weights(std::move(s), VectorXc::Ones(1));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase(0.0, kTwoPi);
  double best = std::numeric_limits<double>::infinity();
  for (int attempt = 0; attempt < 20; ++attempt) {
    VectorXc c(s.L);
    if (attempt == 0 && s.L >= 5) {
      c = cubic_phase(s.L);
    } else {
      c(0) = 1;
      for (Index n = 1; n < s.L; ++n)
        c(n) = std::polar(1.0, phase(rng));
    }
    SamplingScheme cand = with_weights(s, c);
    best = std::min(best, cand.condition_number);
    if (cand.condition_number < 1e8)
      return cand;
  }
  std::ostringstream os;
  os << "no admissible weights after 20 draws; best condition number " << best;
  throw Error(Error::Kind::numeric, os.str());
}

SparkCertificate full_spark_certificate(const VectorXc &c) {
  const Index L = c.size(), M = L * L;
  MatrixXc G = gabor_system_matrix(c);
  SparkCertificate cert;
  cert.min_abs_det = std::numeric_limits<double>::infinity();
  std::vector<Index> idx(L);
  for (Index i = 0; i < L; ++i)
    idx[i] = i;
  MatrixXc sub(L, L);
  while (true) {
    for (Index j = 0; j < L; ++j)
      sub.col(j) = G.col(idx[j]);
    cert.min_abs_det = std::min(cert.min_abs_det, std::abs(sub.fullPivLu().determinant()));
    ++cert.submatrices;
    Index i = L - 1;
    while (i >= 0 && idx[i] == M - L + i)
      --i;
    if (i < 0)
      break;
    ++idx[i];
    for (Index j = i + 1; j < L; ++j)
      idx[j] = idx[j - 1] + 1;
  }
  return cert;
}

IdentifierSpec realize_identifier(const SamplingScheme &s, const GridSpec &grid,
                                  std::optional<Interval> I1, const Mollifier *mollifier) {
  const Index nT = aligned_count(s.T, grid.dt, "T");
  if (grid.N() % (s.L * nT) != 0)
    throw Error(Error::Kind::grid, "ambient period is not a multiple of LT");
  if (mollifier && mollifier->phi.grid != grid)
    throw Error(Error::Kind::grid, "mollifier grid mismatch");
  if (I1) {
    aligned_count(I1->lo, grid.dt, "truncation bound");
    aligned_count(I1->hi, grid.dt, "truncation bound");
  }
  IdentifierSpec id;
  id.truncation = I1;
  if (mollifier)
    id.mollifier = *mollifier;
  const Index n = grid.N(), count = n / nT;
  VectorXc v = VectorXc::Zero(n);
  for (Index m = -(count / 2); m < count - count / 2; ++m) {
    double t = static_cast<double>(m) * s.T;
    if (I1 && (t < I1->lo - 1e-9 || t > I1->hi + 1e-9))
      continue;
    ++id.impulses;
    cd w = s.weight(m);
    if (!mollifier) {
      v(pmod(m * nT, n)) += w / grid.dt;
      continue;
    }
    for (Index i = 0; i < n; ++i) {
      cd p = mollifier->phi.values(i);
      if (p != cd(0))
        v(pmod(i + m * nT, n)) += w * p;
    }
  }
  id.empty = id.impulses == 0;
  id.signal = SampledSignal(grid, v);
  return id;
}

} // namespace opsamp
