#pragma once

#include "opsamp/operators.hpp"

namespace opsamp {

// Cardinal cubic B-spline on [0, 4] with unit integral.
double cubic_bspline(double u);
// Fourier transform of t -> cubic_bspline((t - s)/h).
cd cubic_bspline_ft(double xi, double s, double h);

// Trigonometric polynomial sum_k amp_k e^{2 pi i freq_k x} with frequencies on the 1/period grid.
struct TrigProbe {
  std::vector<double> freqs;
  std::vector<cd> amps;

  static TrigProbe random(double period, double max_freq, int terms, std::uint64_t seed);
  SampledSignal sample(const GridSpec &grid) const;
};

// Continuous-in-t spreading function eta(t, gamma) = sum_a B_a(t) Q_a(gamma):
// cubic B-splines in t with off-grid knots strictly inside each rectangle, gamma on
// the 1/period grid. Action and symbol are available in closed form.
struct SplinePatch {
  Rect rect;
  double knot0 = 0, knot_step = 0;
  std::vector<double> gammas;
  MatrixXc coeff;   // basis x gamma
};

class SplineSpreadingModel {
public:
  static SplineSpreadingModel random(const std::vector<Rect> &rects, double period,
                                     std::uint64_t seed, double knot_target = 0.1);

  double period() const { return period_; }
  const std::vector<SplinePatch> &patches() const { return patches_; }

  cd eta(double t, double gamma) const;
  BandlimitedOperator sample(const SupportRegion &region) const;
  // Exact Hf at the grid points for a trigonometric probe.
  VectorXc apply(const TrigProbe &f, const GridSpec &grid) const;
  // Exact sigma(x, xi) on the full grid.
  MatrixXc symbol(const GridSpec &grid) const;

private:
  double period_ = 1;
  std::vector<SplinePatch> patches_;
};

} // namespace opsamp
