#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "opsamp/recover.hpp"
#include "opsamp/transforms.hpp"

#include <limits>

using namespace opsamp;

namespace {

double rel(const MatrixXc &a, const MatrixXc &b) { return (a - b).norm() / b.norm(); }

struct Setup {
  GridSpec g;
  SupportRegion M;
  SamplingScheme s;
  BandlimitedOperator op;
  SampledSignal response;
};

// Two-block region of the L = 2 example on a small grid, discrete random operator.
Setup two_block(std::uint64_t seed, Index n_per_T = 16, Index periods = 8) {
  Setup u;
  u.g = GridSpec::make(1.0, n_per_T, periods);
  u.M = SupportRegion::from_rectangles(u.g, {{0.05, 0.95, 0.02, 0.31}, {1.05, 1.95, -0.31, -0.02}});
  u.s = make_weights(find_cover(u.M, 5), seed);
  u.op = random_opw(u.M, seed);
  u.response = apply(u.op, realize_identifier(u.s, u.g).signal, Route::spreading);
  return u;
}

// Symbol of the truth on the full plane.
MatrixXc true_symbol(const BandlimitedOperator &op) { return convert(op, Representation::symbol).to_full(); }

MatrixXc symbol_of_impulse(const PlaneArray &h) {
  PlaneArray eta = PlaneArray::full(h.grid_x, Semantics::time_freq);
  // h(x, t) -> eta(t, gamma) by the forward FT in x.
  MatrixXc hf = h.to_full();
  const GridSpec &g = h.grid_x;
  MatrixXc t = hf.transpose();
  dft_rows(t, false);
  eta.values = t * g.dt;
  return symplectic_ft(eta).values;
}

} // namespace

TEST_CASE("modulation helpers") {
  GridSpec g = GridSpec::make(1.0, 8, 4);
  SampledSignal f(g, random_vector(g.N(), 1));
  SampledSignal m = modulate(f, 0.25);
  for (Index i = 0; i < g.N(); ++i)
    CHECK(std::abs(m.values(i) - f.values(i) * std::polar(1.0, kTwoPi * 0.25 * g.time(i))) < 1e-14);
  CHECK((modulate(m, -0.25).values - f.values).norm() < 1e-13);
  CHECK_THROWS_AS(modulate(f, 0.01), Error);

  SamplingScheme s;
  s.L = 2;
  s.Omega = 0.5;
  s.freq_origin = 0.25;
  CHECK(demod_shift(s, PouKind::linear) == doctest::Approx(0.0));
  CHECK(demod_shift(s, PouKind::quadratic) == doctest::Approx(0.25));
}

TEST_CASE("general kernel recovery reproduces a discrete operator") {
  for (std::uint64_t seed : {1u, 2u}) {
    Setup u = two_block(seed);
    REQUIRE(u.s.L == 2);
    WindowPair w = build_pou_pair(PouKind::linear, u.s.T, u.s.Omega, u.s.delta, u.g);
    PlaneArray h = recover_kernel_general(u.response, u.s, w);
    MatrixXc want = convert(u.op, Representation::impulse).to_full();
    CHECK(rel(h.to_full(), want) < 1e-10);
    SampledSignal f(u.g, random_vector(u.g.N(), 50 + seed));
    CHECK(rel(apply_impulse(h, f).values, apply(u.op, f, Route::kernel).values) < 1e-10);
  }
}

TEST_CASE("rectangular recovery and the L = 1 fast path") {
  GridSpec g = GridSpec::make(1.0, 16, 8);
  SupportRegion M = SupportRegion::from_rectangles(g, {{0.05, 0.95, -0.45, 0.45}});
  BandlimitedOperator op = random_opw(M, 3);
  SamplingScheme s = make_weights(find_cover(M, 5));
  REQUIRE(s.L == 1);
  SampledSignal resp = apply(op, realize_identifier(s, g).signal, Route::spreading);
  WindowPair w = build_pou_pair(PouKind::linear, s.T, s.Omega, s.delta, g);
  PlaneArray general = recover_kernel_general(resp, s, w);
  const double shift = demod_shift(s, PouKind::linear);
  PlaneArray rect =
      modulate_x(recover_kernel_rect(modulate(resp, -shift), s.T, w.phi, &w.r), shift);
  CHECK((general.to_full() - rect.to_full()).cwiseAbs().maxCoeff() == 0);
  MatrixXc want = convert(op, Representation::impulse).to_full();
  CHECK(rel(general.to_full(), want) < 1e-10);

  PlaneArray zero = recover_kernel_rect(SampledSignal::zero(g), 1.0, w.phi);
  CHECK(zero.values.norm() == 0);
  CHECK(recover_kernel_general(SampledSignal::zero(g), s, w).values.norm() == 0);
}

TEST_CASE("Zak slices isolate cells") {
  Setup u = two_block(4);
  WindowPair w = build_pou_pair(PouKind::linear, u.s.T, u.s.Omega, u.s.delta, u.g);
  // Keep only the first block of eta.
  PlaneArray eta = u.op.eta;
  for (Index a = 0; a < eta.values.rows(); ++a)
    for (Index b = 0; b < eta.values.cols(); ++b)
      if (u.g.time(eta.x_first + a) > 1.0)
        eta.values(a, b) = 0;
  BandlimitedOperator one = make_operator(u.M, eta);
  SampledSignal resp = apply(one, realize_identifier(u.s, u.g).signal, Route::spreading);
  std::vector<PlaneArray> slices = zak_system_solve(resp, u.s, w);
  REQUIRE(slices.size() == 2);
  Index j0 = 0;
  for (Index j = 0; j < 2; ++j)
    if (u.s.shifts[j].k == 0 && u.s.shifts[j].n == 0)
      j0 = j;
  const double scale = eta.values.norm();
  CHECK(slices[1 - j0].values.norm() <= 1e-8 * scale);
  CHECK(slices[j0].values.norm() > 1e-3 * scale);

  for (const PlaneArray &z : zak_system_solve(SampledSignal::zero(u.g), u.s, w))
    CHECK(z.values.norm() == 0);

  std::vector<PlaneArray> all = zak_system_solve(u.response, u.s, w);
  PlaneArray back = reassemble_spreading(all, u.s, w);
  CHECK(rel(back.to_full(), u.op.eta.to_full()) < 1e-10);
}

TEST_CASE("coefficient expansion") {
  Setup u = two_block(5);
  WindowPair wq = build_pou_pair(PouKind::quadratic, u.s.T, u.s.Omega, u.s.delta, u.g);
  CoefficientTable tab = discrete_coefficients(u.response, u.s, wq, 2, 2);
  CHECK(tab.size() == 2 * tab.Jt * tab.Jn);
  MatrixXc want = true_symbol(u.op);
  PlaneArray sig = symbol_from_coefficients(tab);
  CHECK(rel(sig.to_full(), want) < 1e-10);

  // Doubling the frequency oversampling gives the same symbol.
  CoefficientTable fine = discrete_coefficients(u.response, u.s, wq, 2, 4);
  CHECK(fine.Jt == 2 * tab.Jt);
  CHECK(rel(symbol_from_coefficients(fine).to_full(), sig.to_full()) < 1e-10);

  // Independent path: linear-window kernel, converted to a symbol.
  WindowPair wl = build_pou_pair(PouKind::linear, u.s.T, u.s.Omega, u.s.delta, u.g);
  MatrixXc via_kernel = symbol_of_impulse(recover_kernel_general(u.response, u.s, wl));
  CHECK(rel(via_kernel, sig.to_full()) < 1e-6);

  MaskXb none = MaskXb::Constant(tab.Jn, tab.Jt, false);
  CHECK(symbol_from_coefficients(tab, &none).values.norm() == 0);
  MaskXb all = MaskXb::Constant(tab.Jn, tab.Jt, true);
  CHECK(rel(symbol_from_coefficients(tab, &all).to_full(), sig.to_full()) < 1e-14);

  CoefficientTable zero = discrete_coefficients(SampledSignal::zero(u.g), u.s, wq, 2, 2);
  CHECK(zero.max_abs() == 0);

  // Box masks select lattice points by position.
  MaskXb box = coefficient_box(tab, -1, 1, -0.5, 0.5);
  for (Index m = 0; m < tab.Jn; ++m)
    for (Index l = 0; l < tab.Jt; ++l) {
      bool inside = std::abs(tab.x_pos(m)) <= 1 + 1e-12 && std::abs(tab.xi_pos(l)) <= 0.5 + 1e-12;
      CHECK(box(m, l) == inside);
    }
}

TEST_CASE("nested subsets approach the full symbol") {
  Setup u = two_block(6);
  WindowPair wq = build_pou_pair(PouKind::quadratic, u.s.T, u.s.Omega, u.s.delta, u.g);
  CoefficientTable tab = discrete_coefficients(u.response, u.s, wq, 2, 2);
  MatrixXc full = symbol_from_coefficients(tab).to_full();
  // Test signal concentrated near the origin of the plane.
  VectorXc f(u.g.N());
  for (Index i = 0; i < u.g.N(); ++i)
    f(i) = std::exp(-kTwoPi / 2 * u.g.time(i) * u.g.time(i));
  SampledSignal fs(u.g, f);
  SampledSignal ref = apply_symbol(symbol_from_coefficients(tab), fs);
  double prev = std::numeric_limits<double>::infinity();
  for (double rad : {1.0, 2.0, 3.0, 4.0}) {
    MaskXb S = coefficient_box(tab, -rad, rad, -rad, rad);
    double err = (apply_symbol(symbol_from_coefficients(tab, &S), fs).values - ref.values).norm() /
                 ref.values.norm();
    CHECK(err <= prev);
    prev = err;
  }
  CHECK(prev < 1e-2);
}
