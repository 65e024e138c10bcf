// One PASS/FAIL line per acceptance criterion. Tolerances and runtime limits are pinned here.
#include "opsamp/experiments.hpp"
#include "opsamp/transforms.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

using namespace opsamp;
using io::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double time_limit;   // seconds
  std::function<Outcome()> run;
};

std::string fmt(const char *f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Report experiment(const std::string &name) { return run_experiment(default_config(name)); }

bool strictly_decreasing(const json &v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i].get<double>() < v[i - 1].get<double>()))
      return false;
  return v.size() >= 2;
}

double max_of(const json &v) {
  double m = 0;
  for (const auto &x : v)
    m = std::max(m, x.get<double>());
  return m;
}

Outcome transforms() {
  GridSpec g = GridSpec::make(1.0, 64, 64);   // N = 4096
  double worst = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    SampledSignal f(g, random_vector(g.N(), s));
    const double nf = f.norm();
    SampledSignal fh = forward_ft(f);
    worst = std::max(worst, std::abs(fh.norm() - nf) / nf);
    worst = std::max(worst, (inverse_ft(fh).values - f.values).norm() / f.values.norm());
    PlaneArray z = zak_transform(f, 1, 1.0);
    worst = std::max(worst, std::abs(z.norm() - nf) / nf);
    worst = std::max(worst, (inverse_zak(z, 1, 1.0).values - f.values).norm() / f.values.norm());
  }
  return {worst <= 1e-12, fmt("max rel energy/round-trip error %.3e (<= 1e-12)", worst)};
}

Outcome pou() {
  double worst = 0;
  struct P {
    double T, Omega, delta;
  };
  for (P p : {P{1, 1, 1.0 / 8}, P{1, 1.0 / 3, 1.0 / 16}}) {
    GridSpec g = GridSpec::make(p.T, 64, 24);
    for (PouKind k : {PouKind::linear, PouKind::quadratic}) {
      PouResiduals r = pou_residuals(build_pou_pair(k, p.T, p.Omega, p.delta, g));
      worst = std::max({worst, r.time, r.freq});
    }
  }
  return {worst <= 1e-12, fmt("max POU residual %.3e (<= 1e-12)", worst)};
}

Outcome frames() {
  Report r = experiment("frame-check");
  double tight = 0, arel = 0;
  for (const auto &c : r.summary.at("cases")) {
    tight = std::max(tight, c.at("tightness").get<double>());
    arel = std::max(arel, c.at("A_rel_beta2_over_T").get<double>());
  }
  return {r.passed() && tight <= 1e-8 && arel <= 1e-8,
          fmt("B/A-1 %.3e, |A-beta2/T|/(beta2/T) %.3e (both <= 1e-8)", tight, arel)};
}

Outcome routes() {
  GridSpec g = GridSpec::make(1.0, 32, 16);   // N = 512
  SupportRegion M = SupportRegion::from_rectangles(g, {{0.05, 0.95, 0.02, 0.31}, {1.05, 1.95, -0.31, -0.02}});
  double worst = 0;
  for (std::uint64_t o = 0; o < 10; ++o) {
    BandlimitedOperator op = random_opw(M, 100 + o);
    for (std::uint64_t p = 0; p < 20; ++p) {
      SampledSignal f(g, random_vector(g.N(), 1000 * o + p));
      VectorXc a = apply(op, f, Route::spreading).values, b = apply(op, f, Route::kernel).values;
      worst = std::max(worst, (a - b).norm() / b.norm());
    }
  }
  return {worst <= 1e-10, fmt("max route disagreement %.3e (<= 1e-10)", worst)};
}

Outcome rect() {
  Report r = experiment("recover-rect");
  double err = r.summary.at("max_action_error"), fac = r.summary.at("refinement_factor");
  return {r.passed() && err <= 1e-3 && fac >= 2,
          fmt("action error %.3e (<= 1e-3), refinement factor %.2f (>= 2)", err, fac)};
}

Outcome general() {
  Report r = experiment("recover-general");
  bool ok = r.passed();
  std::string d;
  for (const auto &c : r.summary.at("cases")) {
    const json &lv = c.at("max_action_error_per_level");
    ok = ok && lv.size() >= 3 && lv[0].get<double>() <= 1e-2 && strictly_decreasing(lv);
    d += fmt("L=%.0f base %.3e finest %.3e; ", c.at("L").get<double>(), lv[0].get<double>(),
             lv.back().get<double>());
  }
  return {ok, d + "(base <= 1e-2, strictly decreasing)"};
}

Outcome coefficients() {
  Report r = experiment("coeff-recover");
  const json &lv = r.summary.at("symbol_rel_linf_per_level");
  double base = lv[0], beta = r.summary.at("beta_doubling_diff");
  bool ok = r.passed() && base <= 1e-2 && strictly_decreasing(lv) && beta <= 1e-8;
  return {ok, fmt("base rel Linf %.3e (<= 1e-2), finest %.3e, beta doubling %.3e (<= 1e-8)", base,
                  lv.back().get<double>(), beta)};
}

Outcome spark() {
  SparkCertificate c = full_spark_certificate(cubic_phase(5));
  return {c.submatrices == 53130 && c.min_abs_det > 1e-8,
          fmt("%.0f submatrices, min |det| %.3e (> 1e-8)", double(c.submatrices), c.min_abs_det)};
}

Outcome local_subset() {
  Report r = experiment("local-subset");
  const json &e = r.summary.at("error_over_mu");
  double loc = std::min(r.summary.at("f_localization").get<double>(), r.summary.at("localization")[0].get<double>());
  bool ok = r.passed() && e.size() == 3 && strictly_decreasing(e) && e.back().get<double>() <= 1e-2 && loc >= 0.99;
  return {ok, fmt("error/mu %.3e -> %.3e (<= 1e-2), min localization %.4f (>= 0.99)", e[0].get<double>(),
                  e.back().get<double>(), loc)};
}

Outcome truncation() {
  Report r = experiment("truncate-sweep");
  const json &e = r.summary.at("error_over_mu_norm_f");
  bool ok = r.passed() && e.size() == 3 && strictly_decreasing(e) && e.back().get<double>() <= 1e-3;
  return {ok, fmt("error/(mu |f|) at R = 2,4,8 LT: %.3e %.3e %.3e (last <= 1e-3)", e[0].get<double>(),
                  e[1].get<double>(), e[2].get<double>())};
}

Outcome nodecay() {
  Report r = experiment("nodecay-demo");
  double pure = r.summary.at("pure_min_over_max"), tail = r.summary.at("truncated_max_ratio_beyond");
  return {r.passed() && pure >= 0.5 && tail <= 1e-3,
          fmt("pure min/max %.4f (>= 0.5), truncated tail ratio %.3e (<= 1e-3)", pure, tail)};
}

Outcome norm_sandwich() {
  Report r = experiment("norm-equiv");
  double lo = r.summary.at("ratio_min"), hi = r.summary.at("ratio_max");
  return {r.passed() && lo > 0 && hi / lo <= 100,
          fmt("ratios in [%.4f, %.4f], b/a %.3f (<= 100)", lo, hi, hi / lo)};
}

} // namespace

int main() {
  const std::vector<Criterion> all{
      {1, "transform unitarity and round trips", 5, transforms},
      {2, "POU certificates", 1, pou},
      {3, "tight-frame certificates", 10, frames},
      {4, "representation equivalence", 30, routes},
      {5, "rectangular recovery", 60, rect},
      {6, "general recovery", 180, general},
      {7, "coefficient reconstruction", 180, coefficients},
      {8, "full-spark certificate", 120, spark},
      {9, "local subset recovery", 180, local_subset},
      {10, "truncated identifier", 180, truncation},
      {11, "no-decay demonstration", 60, nodecay},
      {12, "norm-sandwich witness", 120, norm_sandwich},
  };
  int failed = 0;
  for (const Criterion &c : all) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception &e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool pass = o.pass && secs < c.time_limit;
    failed += !pass;
    std::printf("%s %2d %s: %s; %.2f s (< %.0f s)\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                o.detail.c_str(), secs, c.time_limit);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", int(all.size()) - failed, all.size());
  return failed == 0 ? 0 : 1;
}
