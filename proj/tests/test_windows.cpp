#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "opsamp/operators.hpp"
#include "opsamp/transforms.hpp"
#include "opsamp/windows.hpp"

using namespace opsamp;

namespace {

double max_abs(const VectorXc &v) { return v.cwiseAbs().maxCoeff(); }

// Sum over translates computed directly from the definition.
double translate_residual(const VectorXc &v, Index step, bool squared) {
  const Index n = v.size();
  double worst = 0;
  for (Index i = 0; i < n; ++i) {
    double s = 0;
    for (Index k = 0; k < n; k += step)
      s += squared ? std::norm(v((i + k) % n)) : v((i + k) % n).real();
    worst = std::max(worst, std::abs(s - 1));
  }
  return worst;
}

} // namespace

TEST_CASE("smoothstep is a monotone transition with the reflection identity") {
  CHECK(smoothstep(-0.1) == 0);
  CHECK(smoothstep(1.2) == 1);
  CHECK(smoothstep(0.5) == doctest::Approx(0.5).epsilon(1e-14));
  double prev = 0;
  for (int i = 1; i <= 200; ++i) {
    double u = i / 200.0, s = smoothstep(u);
    CHECK(s >= prev);
    CHECK(std::abs(s + smoothstep(1 - u) - 1) < 1e-15);
    prev = s;
  }
}

TEST_CASE("partition-of-unity pairs on both parameter sets") {
  struct P { double T, Omega, delta; Index n_per_T, periods; };
  for (P p : {P{1, 1, 0.125, 64, 20}, P{1, 1.0 / 3, 0.0625, 64, 9}}) {
    GridSpec g = GridSpec::make(p.T, p.n_per_T, p.periods);
    const Index st = aligned_count(p.T, g.dt, "T"), sf = aligned_count(p.Omega, g.dnu(), "Omega");
    WindowPair wl = build_pou_pair(PouKind::linear, p.T, p.Omega, p.delta, g);
    WindowPair wq = build_pou_pair(PouKind::quadratic, p.T, p.Omega, p.delta, g);
    CHECK(translate_residual(wl.r.values, st, false) <= 1e-12);
    CHECK(translate_residual(wl.phi_hat.values, sf, false) <= 1e-12);
    CHECK(translate_residual(wq.r.values, st, true) <= 1e-12);
    CHECK(translate_residual(wq.phi_hat.values, sf, true) <= 1e-12);
    PouResiduals rl = pou_residuals(wl), rq = pou_residuals(wq);
    CHECK(std::max({rl.time, rl.freq, rq.time, rq.freq}) <= 1e-12);
    for (Index i = 0; i < g.N(); ++i) {
      const double t = g.time(i), nu = g.freq(i);
      CHECK(wq.r.values(i).imag() == 0);
      CHECK(wq.phi_hat.values(i).imag() == 0);
      if (t <= -p.delta || t >= p.T + p.delta) {
        CHECK(wl.r.values(i) == cd(0));
        CHECK(wq.r.values(i) == cd(0));
      }
      if (t >= p.delta && t <= p.T - p.delta)
        CHECK(std::abs(wq.r.values(i) - 1.0) < 1e-15);
      if (nu <= -p.delta || nu >= p.Omega + p.delta)
        CHECK(wl.phi_hat.values(i) == cd(0));
      if (std::abs(nu) >= p.Omega / 2 + p.delta)
        CHECK(wq.phi_hat.values(i) == cd(0));
    }
    // phi is the inverse transform of phi_hat
    CHECK(max_abs(ft_samples(wl.phi.values, g.dt) - wl.phi_hat.values) < 1e-12);
  }
}

TEST_CASE("build_pou_pair rejects bad padding and misaligned cells") {
  GridSpec g = GridSpec::make(1.0, 16, 8);
  CHECK_THROWS_AS(build_pou_pair(PouKind::linear, 1.0, 1.0, 0.5, g), Error);
  CHECK_THROWS_AS(build_pou_pair(PouKind::linear, 1.0, 1.0, 0.0, g), Error);
  CHECK_THROWS_AS(build_pou_pair(PouKind::quadratic, 1.03, 1.0, 0.1, g), Error);
  CHECK_THROWS_AS(build_pou_pair(PouKind::quadratic, 1.0, 0.3, 0.1, g), Error);
}

TEST_CASE("mollifier: nonnegative, unit mass, flatness reported honestly") {
  GridSpec g = GridSpec::make(1.0, 64, 16);
  Mollifier m = build_mollifier(0.25, Band{-1, 1}, 1.0, g);
  CHECK(m.target_met);
  CHECK(m.delta == doctest::Approx(0.25));
  CHECK((m.phi.values.real().array() >= 0).all());
  CHECK(std::abs(forward_ft(m.phi).values(0) - 1.0) < 1e-12);
  CHECK(std::abs(m.phi.values.sum() * g.dt - 1.0) < 1e-12);
  for (Index i = 0; i < g.N(); ++i)
    if (std::abs(g.time(i)) >= 0.25)
      CHECK(m.phi.values(i) == cd(0));
  // independent evaluation of the band error
  VectorXc hat = ft_samples(m.phi.values, g.dt);
  double worst = 0;
  for (Index k = 0; k < g.N(); ++k)
    if (std::abs(g.freq(k)) <= 1)
      worst = std::max(worst, std::abs(hat(k) - 1.0));
  CHECK(m.flatness_eps == doctest::Approx(worst).epsilon(1e-12));

  // With phi >= 0 the band error grows with the support width.
  Mollifier wide = build_mollifier(1.0, Band{-1, 1}, 1.0, g);
  CHECK(wide.flatness_eps > m.flatness_eps);

  Mollifier point = build_mollifier(0.25, Band{0, 0}, 1e-12, g);
  CHECK(point.flatness_eps < 1e-12);

  // Unreachable target: best effort with a flag.
  Mollifier hard = build_mollifier(0.25, Band{-4, 4}, 1e-14, g);
  CHECK_FALSE(hard.target_met);
  CHECK(hard.flatness_eps > 1e-14);
  // Reachable after narrowing: the widest admissible width is returned.
  Mollifier narrowed = build_mollifier(1.0, Band{-1, 1}, 0.01, g);
  CHECK(narrowed.target_met);
  CHECK(narrowed.flatness_eps <= 0.01);
  CHECK(narrowed.delta < 1.0);
  CHECK(flatness(bump_signal(narrowed.delta * 1.01, g), Band{-1, 1}) > 0.01);
}

TEST_CASE("frame bounds: tight quadratic windows, orthonormal impulses, undersampling") {
  GridSpec g = GridSpec::make(1.0, 64, 20);
  WindowPair wq = build_pou_pair(PouKind::quadratic, 1.0, 1.0, 0.125, g);
  const double beta2 = 1.25;
  GaborFrameSpec spec{wq.r, 1.0, 1.0 / beta2, beta2};
  FrameBounds fb = frame_bounds(spec);
  CHECK(fb.B / fb.A - 1 <= 1e-8);
  CHECK(std::abs(fb.A - beta2) <= 1e-8 * beta2);
  // S f = (1/b) sum_k |r(t - kT)|^2 f, checked on a random probe
  SampledSignal f(g, random_vector(g.N(), 5));
  CHECK(max_abs(frame_operator(spec, f).values - beta2 * f.values) < 1e-12 * max_abs(f.values) * beta2);

  GaborFrameSpec tight = normalize_tight(spec, fb.A);
  FrameBounds unit = frame_bounds(tight);
  CHECK(std::abs(unit.A - 1) < 1e-8);

  GridSpec gs = GridSpec::make(1.0, 4, 8);
  VectorXc e = VectorXc::Zero(gs.N());
  e(0) = 1;
  GaborFrameSpec imp{SampledSignal(gs, e), gs.dt, gs.dnu(), 1};
  FrameBounds fi = frame_bounds(imp);
  CHECK(fi.B / fi.A - 1 <= 1e-12);
  CHECK(fi.A == doctest::Approx(1.0 / gs.dnu()));

  GridSpec gu = GridSpec::make(1.0, 8, 32);
  VectorXc gauss(gu.N());
  for (Index i = 0; i < gu.N(); ++i)
    gauss(i) = std::exp(-M_PI * gu.time(i) * gu.time(i));
  GaborFrameSpec under{SampledSignal(gu, gauss), 2.0, 2.0, 1};
  FrameBounds fu = frame_bounds(under);
  CHECK(fu.A <= 1e-6 * fu.B);

  GaborFrameSpec zero{SampledSignal(gu, VectorXc::Zero(gu.N())), 2.0, 2.0, 1};
  CHECK_THROWS_AS(frame_bounds(zero), Error);
}

TEST_CASE("localization measure") {
  GridSpec g = GridSpec::make(1.0, 16, 32);
  VectorXc gauss(g.N());
  for (Index i = 0; i < g.N(); ++i)
    gauss(i) = std::exp(-M_PI * g.time(i) * g.time(i));
  GaborFrameSpec spec{SampledSignal(g, gauss), 0.5, 0.5, 1};
  Lattice lat = frame_lattice(spec);
  SampledSignal f(g, random_vector(g.N(), 9));
  CHECK(localization_measure(f, spec, MaskXb::Constant(lat.rows, lat.cols, true)) == doctest::Approx(1.0));
  CHECK(localization_measure(f, spec, MaskXb::Constant(lat.rows, lat.cols, false)) == 0.0);

  // time-frequency shifted window, 10 x 10 cell square around it
  const double x0 = 3.0, xi0 = 2.0;
  VectorXc v(g.N());
  for (Index i = 0; i < g.N(); ++i)
    v(i) = gauss(g.wrap(i - aligned_count(x0, g.dt, "x0"))) * std::polar(1.0, kTwoPi * xi0 * g.time(i));
  SampledSignal h(g, v);
  MaskXb S = lattice_box(lat, x0 - 2.5, x0 + 2.5, xi0 - 2.5, xi0 + 2.5);
  double rho = localization_measure(h, spec, S);
  CHECK(rho >= 0.99);
  SampledSignal hp(g, v * std::polar(1.0, 0.7));
  CHECK(localization_measure(hp, spec, S) == doctest::Approx(rho).epsilon(1e-12));
  MaskXb bigger = lattice_box(lat, x0 - 3.5, x0 + 3.5, xi0 - 3.5, xi0 + 3.5);
  CHECK(localization_measure(h, spec, bigger) >= rho);
  CHECK_THROWS_AS(localization_measure(SampledSignal::zero(g), spec, S), Error);
}

TEST_CASE("erosion by a closed ball") {
  MaskXb full = MaskXb::Constant(30, 30, true);
  CHECK((erode(full, 3.0) == full).all());
  MaskXb sq = MaskXb::Constant(30, 30, false);
  sq.block(5, 5, 11, 11).setConstant(true);   // [5, 15]^2
  CHECK((erode(sq, 0.0) == sq).all());
  MaskXb e = erode(sq, 2.0);
  MaskXb expect = MaskXb::Constant(30, 30, false);
  expect.block(7, 7, 7, 7).setConstant(true);   // [7, 13]^2
  CHECK((e == expect).all());
  // anisotropic lattice: radius measured in plane units
  MaskXb e2 = erode(sq, 1.0, 1.0, 0.5);
  CHECK(e2.count() == 9 * 7);
  CHECK_THROWS_AS(erode(sq, -1.0), Error);
}
