#pragma once

#include "opsamp/operators.hpp"
#include "opsamp/windows.hpp"

#include <optional>
#include <string>
#include <vector>

namespace opsamp {

struct Shift {
  int k = 0;   // time translate in units of T
  int n = 0;   // frequency translate in units of Omega
};

// Cell (k, n) is [kT, (k+1)T) x [gamma0 + (n - 1/2) Omega, gamma0 + (n + 1/2) Omega).
struct SamplingScheme {
  Index L = 1;
  double T = 1, Omega = 1, delta = 0;
  double freq_origin = 0;
  double margin = 0;
  bool fits_window = true;
  std::vector<Shift> shifts;
  std::vector<bool> occupied;
  VectorXc c;
  MatrixXc A;
  MatrixXc B;   // A^{-1}; b_{jq} = B(j, q mod L)
  double condition_number = 0;

  cd b(Index j, Index q) const { return B(j, pmod(q, L)); }
  cd weight(Index n) const { return c(pmod(n, L)); }
  bool has_weights() const { return c.size() == L && B.rows() == L; }
};

struct CoverOptions {
  std::vector<double> T_candidates{1.0};
  bool allow_rect = true;
};

bool is_prime(Index n);
SamplingScheme find_cover(const SupportRegion &M, Index L_max, const CoverOptions &opts = {});

// Columns T^k M^l c, (k, l) lexicographic, with (T^k M^l c)_p = e^{2 pi i l (p+k)/L} c_{p+k}.
MatrixXc gabor_system_matrix(const VectorXc &c);
// A_{pj} = c_{p - k_j} e^{2 pi i n_j p / L}.
MatrixXc system_matrix(const VectorXc &c, const std::vector<Shift> &shifts);
VectorXc cubic_phase(Index L);
double condition_number(const MatrixXc &A);
SamplingScheme with_weights(SamplingScheme s, const VectorXc &c);
SamplingScheme make_weights(SamplingScheme s, std::uint64_t seed = 1);

struct SparkCertificate {
  double min_abs_det = 0;
  Index submatrices = 0;
};
SparkCertificate full_spark_certificate(const VectorXc &c);

struct Interval {
  double lo = 0, hi = 0;
};

struct IdentifierSpec {
  std::optional<Interval> truncation;
  std::optional<Mollifier> mollifier;
  SampledSignal signal;
  Index impulses = 0;
  bool empty = false;
};

IdentifierSpec realize_identifier(const SamplingScheme &s, const GridSpec &grid,
                                  std::optional<Interval> I1 = std::nullopt,
                                  const Mollifier *mollifier = nullptr);

} // namespace opsamp
