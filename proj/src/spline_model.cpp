#include "opsamp/spline_model.hpp"

#include "opsamp/transforms.hpp"

#include <algorithm>
#include <map>
#include <random>

namespace opsamp {

double cubic_bspline(double u) {
  if (u <= 0 || u >= 4)
    return 0;
  if (u < 1)
    return u * u * u / 6;
  if (u < 2)
    return (-3 * u * u * u + 12 * u * u - 12 * u + 4) / 6;
  if (u < 3)
    return (3 * u * u * u - 24 * u * u + 60 * u - 44) / 6;
  double v = 4 - u;
  return v * v * v / 6;
}

cd cubic_bspline_ft(double xi, double s, double h) {
  double z = M_PI * h * xi;
  double sinc = std::abs(z) < 1e-8 ? 1 - z * z / 6 : std::sin(z) / z;
  double s2 = sinc * sinc;
  return h * s2 * s2 * std::polar(1.0, -kTwoPi * xi * (s + 2 * h));
}

TrigProbe TrigProbe::random(double period, double max_freq, int terms, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  const long kmax = static_cast<long>(std::floor(max_freq * period + 1e-9));
  std::uniform_int_distribution<long> pick(-kmax, kmax);
  TrigProbe p;
  for (int i = 0; i < terms; ++i) {
    p.freqs.push_back(static_cast<double>(pick(rng)) / period);
    p.amps.emplace_back(nd(rng), nd(rng));
  }
  return p;
}

SampledSignal TrigProbe::sample(const GridSpec &grid) const {
  VectorXc v = VectorXc::Zero(grid.N());
  for (std::size_t j = 0; j < freqs.size(); ++j) {
    Index k = grid.freq_index(freqs[j]);
    for (Index i = 0; i < grid.N(); ++i)
      v(i) += amps[j] * std::polar(1.0, kTwoPi * static_cast<double>(pmod(k * i, grid.N())) /
                                            static_cast<double>(grid.N()));
  }
  return SampledSignal(grid, v);
}

SplineSpreadingModel SplineSpreadingModel::random(const std::vector<Rect> &rects, double period,
                                                  std::uint64_t seed, double knot_target) {
  SplineSpreadingModel m;
  m.period_ = period;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  for (const Rect &r : rects) {
    SplinePatch p;
    p.rect = r;
    const double len = r.t1 - r.t0;
    Index nb = std::max<Index>(1, static_cast<Index>(std::floor(len / knot_target - 3.5)));
    p.knot_step = len / (static_cast<double>(nb) + 3.5);
    p.knot0 = r.t0 + 0.25 * p.knot_step;
    long k0 = static_cast<long>(std::ceil(r.g0 * period - 1e-9));
    long k1 = static_cast<long>(std::floor(r.g1 * period + 1e-9));
    for (long k = k0; k <= k1; ++k)
      p.gammas.push_back(static_cast<double>(k) / period);
    if (p.gammas.empty())
      throw Error(Error::Kind::grid, "rectangle contains no frequency grid point");
    MatrixXc raw(nb, static_cast<Index>(p.gammas.size()));
    for (Index a = 0; a < raw.rows(); ++a)
      for (Index b = 0; b < raw.cols(); ++b)
        raw(a, b) = cd(nd(rng), nd(rng));
    p.coeff = raw;
    for (Index b = 0; b < raw.cols(); ++b) {
      for (Index a = 0; a < raw.rows(); ++a) {
        cd l = b > 0 ? raw(a, b - 1) : raw(a, b), rr = b + 1 < raw.cols() ? raw(a, b + 1) : raw(a, b);
        p.coeff(a, b) = 0.25 * l + 0.5 * raw(a, b) + 0.25 * rr;
      }
    }
    m.patches_.push_back(std::move(p));
  }
  return m;
}

cd SplineSpreadingModel::eta(double t, double gamma) const {
  cd acc(0);
  for (const SplinePatch &p : patches_) {
    for (std::size_t b = 0; b < p.gammas.size(); ++b) {
      if (std::abs(p.gammas[b] - gamma) > 1e-9 / period_)
        continue;
      for (Index a = 0; a < p.coeff.rows(); ++a)
        acc += p.coeff(a, static_cast<Index>(b)) *
               cubic_bspline((t - p.knot0 - static_cast<double>(a) * p.knot_step) / p.knot_step);
    }
  }
  return acc;
}

BandlimitedOperator SplineSpreadingModel::sample(const SupportRegion &region) const {
  const GridSpec &g = region.grid;
  if (std::abs(g.P() - period_) > 1e-9 * period_)
    throw Error(Error::Kind::grid, "grid period does not match the model period");
  PlaneArray eta = PlaneArray::window(g, Semantics::time_freq, region.t_first, region.mask.rows(),
                                      region.g_first, region.mask.cols());
  for (const SplinePatch &p : patches_) {
    for (std::size_t b = 0; b < p.gammas.size(); ++b) {
      Index k = g.freq_index(p.gammas[b]);
      Index lb = eta.local_y(k);
      if (lb < 0)
        throw Error(Error::Kind::domain, "model leaves the support window");
      for (Index a = 0; a < eta.values.rows(); ++a) {
        double t = g.time(eta.x_first + a);
        cd v(0);
        for (Index j = 0; j < p.coeff.rows(); ++j)
          v += p.coeff(j, static_cast<Index>(b)) *
               cubic_bspline((t - p.knot0 - static_cast<double>(j) * p.knot_step) / p.knot_step);
        eta.values(a, lb) += v;
      }
    }
  }
  return make_operator(region, eta);
}

VectorXc SplineSpreadingModel::apply(const TrigProbe &f, const GridSpec &grid) const {
  const Index n = grid.N();
  VectorXc spec = VectorXc::Zero(n);
  const double dnu = 1.0 / period_;
  for (const SplinePatch &p : patches_)
    for (std::size_t j = 0; j < f.freqs.size(); ++j) {
      const double xi = f.freqs[j];
      for (std::size_t b = 0; b < p.gammas.size(); ++b) {
        cd c(0);
        for (Index a = 0; a < p.coeff.rows(); ++a)
          c += p.coeff(a, static_cast<Index>(b)) *
               cubic_bspline_ft(xi, p.knot0 + static_cast<double>(a) * p.knot_step, p.knot_step);
        double out_freq = p.gammas[b] + xi;
        long bin = std::lround(out_freq * period_);
        if (std::abs(bin) >= n / 2)
          throw Error(Error::Kind::grid, "probe output frequency beyond the grid Nyquist band");
        spec(pmod(bin, n)) += f.amps[j] * c * dnu;
      }
    }
  return idft(spec);
}

MatrixXc SplineSpreadingModel::symbol(const GridSpec &grid) const {
  const Index n = grid.N();
  MatrixXc sigma = MatrixXc::Zero(n, n);
  const double dnu = 1.0 / period_;
  for (const SplinePatch &p : patches_) {
    const Index ng = static_cast<Index>(p.gammas.size());
    MatrixXc ex(n, ng), cx(ng, n);
    for (Index b = 0; b < ng; ++b) {
      Index k = grid.freq_index(p.gammas[b]);
      for (Index i = 0; i < n; ++i)
        ex(i, b) = std::polar(dnu, kTwoPi * static_cast<double>(pmod(k * i, n)) / n);
    }
    for (Index c = 0; c < n; ++c) {
      double xi = grid.freq(c);
      VectorXc bh(p.coeff.rows());
      for (Index a = 0; a < p.coeff.rows(); ++a)
        bh(a) = cubic_bspline_ft(xi, p.knot0 + static_cast<double>(a) * p.knot_step, p.knot_step);
      cx.col(c) = p.coeff.transpose() * bh;
    }
    sigma.noalias() += ex * cx;
  }
  return sigma;
}

} // namespace opsamp
