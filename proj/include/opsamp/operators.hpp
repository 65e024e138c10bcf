#pragma once

#include "opsamp/grid.hpp"

#include <cstdint>
#include <vector>

namespace opsamp {

// Closed rectangle [t0, t1] x [g0, g1] in the (t, gamma) plane.
struct Rect {
  double t0 = 0, t1 = 0, g0 = 0, g1 = 0;
  double area() const { return (t1 - t0) * (g1 - g0); }
};

// Grid mask of M over a cyclic window of the (t, gamma) plane.
struct SupportRegion {
  GridSpec grid;
  std::vector<Rect> rects;
  Index t_first = 0, g_first = 0;
  MaskXb mask;
  Rect bbox;
  double area = 0;

  static SupportRegion from_rectangles(const GridSpec &grid, std::vector<Rect> rects);
  bool contains(Index i, Index k) const;
  Index count() const { return mask.count(); }
};

// Canonical store: eta over the support window (time_freq semantics).
struct BandlimitedOperator {
  SupportRegion support;
  PlaneArray eta;

  const GridSpec &grid() const { return support.grid; }
};

BandlimitedOperator make_operator(const SupportRegion &support, const PlaneArray &eta);

enum class Representation { spreading, symbol, impulse, kernel, bold_spreading, bold_symbol };

// spreading -> symbol by symplectic_ft; spreading -> impulse h(x, t) by the inverse
// FT in gamma (t window kept); impulse -> kernel kappa(x, y) = h(x, x - y);
// bold_spreading(t, gamma) = e^{2 pi i gamma t} eta(t, gamma).
PlaneArray convert(const BandlimitedOperator &op, Representation target);
PlaneArray impulse_to_kernel(const PlaneArray &h);
PlaneArray spreading_to_impulse(const PlaneArray &eta);

enum class Route { spreading, kernel };

SampledSignal apply(const BandlimitedOperator &op, const SampledSignal &f, Route route);
// Hf(x) = sum_t h(x, t) f(x - t) dt over the stored t window.
SampledSignal apply_impulse(const PlaneArray &h, const SampledSignal &f);
// H* g(y) = sum_t conj(h(y + t, t)) g(y + t) dt.
SampledSignal apply_impulse_adjoint(const PlaneArray &h, const SampledSignal &f);
// Hf(x) = sum_y kappa(x, y) f(y) dt.
SampledSignal apply_kernel(const PlaneArray &kappa, const SampledSignal &f);
// Hf(x) = sum_xi sigma(x, xi) fhat(xi) e^{2 pi i x xi} dnu.
SampledSignal apply_symbol(const PlaneArray &sigma, const SampledSignal &f);

BandlimitedOperator random_opw(const SupportRegion &support, std::uint64_t seed,
                               double smoothness_cells = 4.0);

struct SupNorm {
  double value = 0;
  bool empty = false;
};
SupNorm sup_norm_on(const PlaneArray &symbol, const MaskXb &S);
SupNorm sup_norm_on(const BandlimitedOperator &op, const MaskXb &S);

double operator_norm_estimate(const PlaneArray &h, std::uint64_t seed = 7, double tol = 1e-6,
                              int max_iter = 500);
double operator_norm_estimate(const BandlimitedOperator &op, std::uint64_t seed = 7,
                              double tol = 1e-6, int max_iter = 500);

VectorXc random_vector(Index n, std::uint64_t seed);

} // namespace opsamp
