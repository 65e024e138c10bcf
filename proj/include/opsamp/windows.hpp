#pragma once

#include "opsamp/grid.hpp"

#include <cstdint>

namespace opsamp {

// exp(-1/(1-x^2)) on (-1, 1), zero elsewhere.
double bump(double x);
// Normalized integral of bump(2s - 1) over [0, u]; 0 below 0, 1 above 1.
double smoothstep(double u);
// Sum over k of linear_window(x - k(hi-lo)) is 1.
double linear_window(double x, double lo, double hi, double delta);
// Sum over k of quadratic_window(x - k(hi-lo))^2 is 1.
double quadratic_window(double x, double lo, double hi, double delta);

enum class PouKind { linear, quadratic };
const char *to_string(PouKind k);

// r on the time axis, phi_hat on the frequency axis, phi = inverse_ft(phi_hat).
// Linear: supp r in (-delta, T + delta), supp phi_hat in (-delta, Omega + delta).
// Quadratic: supp phi_hat in (-Omega/2 - delta, Omega/2 + delta).
struct WindowPair {
  SampledSignal r;
  SampledSignal phi;
  SampledSignal phi_hat;
  double T = 1, Omega = 1, delta = 0;
  PouKind kind = PouKind::linear;
};

WindowPair build_pou_pair(PouKind kind, double T, double Omega, double delta,
                          const GridSpec &grid);

struct PouResiduals {
  double time = 0;
  double freq = 0;
};
PouResiduals pou_residuals(const WindowPair &w);

struct Band {
  double lo = 0, hi = 0;
  bool full_line = false;
};

struct Mollifier {
  SampledSignal phi;
  double delta = 0;            // support half-width actually used
  double requested_delta = 0;
  double flatness_eps = 0;     // max |phi_hat - 1| over the band grid points
  Band band;
  bool target_met = true;
};

// Normalized bump of half-width s: phi >= 0, dt * sum phi = 1.
SampledSignal bump_signal(double s, const GridSpec &grid);
double flatness(const SampledSignal &phi, const Band &band);
Mollifier build_mollifier(double delta, const Band &band, double target_eps, const GridSpec &grid);

struct GaborFrameSpec {
  SampledSignal g;
  double a = 1, b = 1;
  double declared_bound = 1;
};

struct FrameBounds {
  double A = 0, B = 0;
  int iterations = 0;
};

// S f = sum over the lattice of <f, pi(lambda) g> pi(lambda) g, in Walnut form.
SampledSignal frame_operator(const GaborFrameSpec &spec, const SampledSignal &f);
FrameBounds frame_bounds(const GaborFrameSpec &spec, std::uint64_t seed = 1, double tol = 1e-10,
                         int max_iter = 2000);
GaborFrameSpec normalize_tight(const GaborFrameSpec &spec, double A);

// Coefficient lattice of a frame spec: rows k (x = k a), columns l (xi = l b), centered.
struct Lattice {
  Index rows = 0, cols = 0;
  double a = 1, b = 1;
  double x(Index k) const;
  double xi(Index l) const;
};
Lattice frame_lattice(const GaborFrameSpec &spec);
MaskXb lattice_box(const Lattice &lat, double x_lo, double x_hi, double xi_lo, double xi_hi);

// rho = energy of the coefficients on S over the total coefficient energy.
double localization_measure(const SampledSignal &f, const GaborFrameSpec &spec, const MaskXb &S);

// Morphological erosion by a closed ball of radius d; distances in units of
// (scale_x, scale_y) per lattice step. The lattice wraps.
MaskXb erode(const MaskXb &S, double d, double scale_x = 1.0, double scale_y = 1.0);

} // namespace opsamp
