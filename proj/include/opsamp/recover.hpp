#pragma once

#include "opsamp/identify.hpp"
#include "opsamp/windows.hpp"

#include <memory>
#include <vector>

namespace opsamp {

// e^{2 pi i nu x} f(x); nu must sit on the frequency grid.
SampledSignal modulate(const SampledSignal &f, double nu);
// Rows of an impulse response or symbol multiplied by e^{2 pi i nu x}.
PlaneArray modulate_x(PlaneArray p, double nu);
// Frequency shift between the scheme cell and the window's own frequency cell.
double demod_shift(const SamplingScheme &s, PouKind kind);

// h(x, tau) = T r(tau) sum_q Hw(tau + qT) phi(x - tau - qT); r defaults to the
// indicator of [0, T).
PlaneArray recover_kernel_rect(const SampledSignal &response, double T, const SampledSignal &phi,
                               const SampledSignal *r = nullptr);

// h(x, tau) = LT sum_j r(tau - k_j T) e^{2 pi i n_j Omega (x - tau + k_j T)}
//             sum_q b_{jq} Hw(tau - (k_j - q) T) phi(x - tau + (k_j - q) T).
PlaneArray recover_kernel_general(const SampledSignal &response, const SamplingScheme &s,
                                  const WindowPair &w);

// Slices e^{2 pi i nu k_j T} r(t) phi_hat(nu) boldeta(t + k_j T, nu + n_j Omega) of the
// demodulated operator, over the window support.
std::vector<PlaneArray> zak_system_solve(const SampledSignal &response, const SamplingScheme &s,
                                         const WindowPair &w);
// Spreading function (original frequency coordinates) rebuilt from the slices.
PlaneArray reassemble_spreading(const std::vector<PlaneArray> &slices, const SamplingScheme &s,
                                const WindowPair &w);

struct CoefficientTable {
  SamplingScheme scheme;
  WindowPair windows;
  double beta1 = 1, beta2 = 1;
  Index Jt = 0;   // l-range, xi step 1/(beta2 T)
  Index Jn = 0;   // m-range, x step L T / beta1
  std::vector<MatrixXc> entries;   // per j: (m, l)
  std::shared_ptr<const MatrixXc> atoms;   // V_phi r on the full grid

  double x_pos(Index m) const;
  double xi_pos(Index l) const;
  Index size() const { return static_cast<Index>(entries.size()) * Jt * Jn; }
  double max_abs() const;
};

CoefficientTable discrete_coefficients(const SampledSignal &response, const SamplingScheme &s,
                                       const WindowPair &w, double beta1, double beta2);
// V_phi r(x, xi) = sum_t r(t) phi(x - t) e^{-2 pi i t xi} dt on the full grid.
MatrixXc window_atoms(const WindowPair &w);
// Lattice points (x_pos, xi_pos) inside [x_lo, x_hi] x [xi_lo, xi_hi].
MaskXb coefficient_box(const CoefficientTable &t, double x_lo, double x_hi, double xi_lo,
                       double xi_hi);
PlaneArray symbol_from_coefficients(const CoefficientTable &t, const MaskXb *subset = nullptr);

} // namespace opsamp
