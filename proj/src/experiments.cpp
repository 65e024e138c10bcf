#include "opsamp/experiments.hpp"

#include "opsamp/spline_model.hpp"
#include "opsamp/transforms.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <mutex>
#include <sstream>
#include <thread>

#ifndef OPSAMP_VERSION
#define OPSAMP_VERSION "0.0.0"
#endif
#ifndef OPSAMP_GIT
#define OPSAMP_GIT "unknown"
#endif

namespace opsamp {

using io::json;

void Table::add(std::vector<double> row) {
  if (row.size() != columns.size())
    throw Error(Error::Kind::numeric, "table row width mismatch");
  rows.push_back(std::move(row));
}

std::string Table::csv() const {
  std::string out;
  for (std::size_t c = 0; c < columns.size(); ++c)
    out += (c ? "," : "") + columns[c];
  out += "\n";
  char buf[64];
  for (const auto &row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      std::snprintf(buf, sizeof buf, "%s%.12e", c ? "," : "", row[c]);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

json Table::to_json() const { return {{"columns", columns}, {"rows", rows}}; }

bool Report::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check &c) { return c.pass; });
}

json Report::to_json() const {
  json cj = json::array();
  for (const Check &c : checks)
    cj.push_back({{"name", c.name},
                  {"value", c.value},
                  {"threshold", c.threshold},
                  {"relation", c.relation},
                  {"pass", c.pass}});
  json plot_files = json::array();
  for (const auto &[name, t] : plots)
    plot_files.push_back("plot_" + name + ".csv");
  json art = json::array();
  for (const auto &[name, text] : artifacts)
    art.push_back(name);
  return {{"schema", kReportSchema},
          {"experiment", experiment},
          {"tool", {{"version", OPSAMP_VERSION}, {"git", OPSAMP_GIT}}},
          {"config", config},
          {"summary", summary},
          {"checks", cj},
          {"passed", passed()},
          {"metrics", metrics.to_json()},
          {"files", {{"metrics", "metrics.csv"}, {"plots", plot_files}, {"artifacts", art}}},
          {"timing", {{"seconds", seconds}}}};
}

void parallel_for(Index n, int threads, const std::function<void(Index)> &fn) {
  const int workers = static_cast<int>(std::min<Index>(std::max(1, threads), n));
  if (workers <= 1) {
    for (Index i = 0; i < n; ++i)
      fn(i);
    return;
  }
  std::atomic<Index> next{0};
  std::exception_ptr err;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (Index i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!err)
            err = std::current_exception();
        }
      }
    });
  for (auto &t : pool)
    t.join();
  if (err)
    std::rethrow_exception(err);
}

std::uint64_t trial_seed(std::uint64_t base, std::uint64_t trial) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (trial + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

Error config_error(const std::string &msg) { return Error(Error::Kind::config, msg); }

json rect_list(std::initializer_list<std::array<double, 4>> rs) {
  json a = json::array();
  for (const auto &r : rs)
    a.push_back({r[0], r[1], r[2], r[3]});
  return a;
}

const json l2_rects = rect_list({{0.05, 0.95, 0.02, 0.31}, {1.05, 1.95, -0.31, -0.02}});
const json l3_rects =
    rect_list({{0.05, 0.95, -0.15, 0.15}, {1.05, 1.95, -0.4833, -0.1833}, {-0.95, -0.05, -0.15, 0.15}});

const std::map<std::string, json> &defaults() {
  static const std::map<std::string, json> d = {
      {"recover-rect",
       {{"seed", 1},
        {"T", 1.0},
        {"rect", {0.0, 1.0, -0.45, 0.45}},
        {"phi_delta", 0.05},
        {"n_per_T", {64, 128}},
        {"periods", 16},
        {"probes", 10},
        {"probe_terms", 6},
        {"probe_max_freq", 3.0}}},
      {"recover-general",
       {{"seed", 2},
        {"cases",
         {{{"name", "L2"}, {"rects", l2_rects}, {"periods", 16}, {"L_max", 3}},
          {{"name", "L3"}, {"rects", l3_rects}, {"periods", 24}, {"L_max", 3}}}},
        {"T", 1.0},
        {"n_per_T", {16, 32, 64}},
        {"probes", 5},
        {"probe_terms", 6},
        {"probe_max_freq", 2.0}}},
      {"coeff-recover",
       {{"seed", 3},
        {"rects", l2_rects},
        {"T", 1.0},
        {"periods", 16},
        {"L_max", 3},
        {"n_per_T", {16, 32, 64}},
        {"beta1", 2.0},
        {"beta2", 2.0}}},
      {"local-subset",
       {{"seed", 4},
        {"rects", rect_list({{0.15, 0.85, -0.12, 0.12}, {1.15, 1.85, 0.38, 0.62}})},
        {"T", 1.0},
        {"n_per_T", 16},
        {"periods", 16},
        {"L_max", 3},
        {"beta1", 2.0},
        {"beta2", 2.0},
        {"f_center", {0.0, 0.0}},
        {"f_width", 1.0},
        {"f_box", 3.0},
        {"margins", {1.0, 2.0, 4.0}}}},
      {"truncate-sweep",
       {{"seed", 5},
        {"T", 2.0},
        {"rect", {0.25, 1.75, -0.125, 0.125}},
        {"n_per_T", 64},
        {"periods", 32},
        {"mollifier_delta", 0.125},
        {"mollifier_target_eps", 1e-2},
        {"phi_delta", 0.125},
        {"radii_LT", {2.0, 4.0, 8.0}},
        {"f_width", 4.0}}},
      {"nodecay-demo",
       {{"seed", 6},
        {"T", 1.0},
        {"n_per_T", 16},
        {"periods", 64},
        {"r_delta", 0.125},
        {"phi_halfwidth", 4.0},
        {"n_max", 20},
        {"radius", 10.0},
        {"decay_radius", 3.0}}},
      {"frame-check",
       {{"seed", 7},
        {"cases",
         {{{"T", 1.0}, {"Omega", 1.0}, {"delta", 0.125}, {"n_per_T", 64}, {"periods", 20}},
          {{"T", 1.0}, {"Omega", 1.0 / 3.0}, {"delta", 0.0625}, {"n_per_T", 64}, {"periods", 9}}}}}},
      {"norm-equiv",
       {{"seed", 8},
        {"rects", l2_rects},
        {"n_per_T", 16},
        {"periods", 32},
        {"operators", 50}}},
  };
  return d;
}

template <typename V>
V get(const json &c, const char *key) {
  try {
    return c.at(key).get<V>();
  } catch (const json::exception &e) {
    throw config_error(std::string("bad config key '") + key + "': " + e.what());
  }
}

std::vector<Rect> rects_from(const json &a) {
  std::vector<Rect> out;
  for (const json &r : a) {
    if (!r.is_array() || r.size() != 4)
      throw config_error("rectangles are [t0, t1, gamma0, gamma1]");
    Rect x{r[0].get<double>(), r[1].get<double>(), r[2].get<double>(), r[3].get<double>()};
    if (!(x.t0 < x.t1 && x.g0 < x.g1))
      throw config_error("empty rectangle");
    out.push_back(x);
  }
  if (out.empty())
    throw config_error("no rectangles given");
  return out;
}

void add_check(Report &r, std::string name, double value, const std::string &rel, double thr) {
  bool pass = rel == "<=" ? value <= thr : rel == ">=" ? value >= thr : rel == "<" ? value < thr : value > thr;
  if (!std::isfinite(value))
    pass = false;
  r.checks.push_back({std::move(name), value, thr, rel, pass});
}

bool strictly_decreasing(const std::vector<double> &v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1]))
      return false;
  return true;
}

double rel_norm(const VectorXc &a, const VectorXc &b) { return (a - b).norm() / b.norm(); }

double rel_linf(const MatrixXc &a, const MatrixXc &b) {
  return (a - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff();
}

// Unweighted delta train on [0,T)-cells, the L = 1 scheme.
SamplingScheme rect_scheme(double T) {
  SamplingScheme s;
  s.L = 1;
  s.T = T;
  s.Omega = 1.0 / T;
  s.shifts = {{0, 0}};
  s.occupied = {true};
  return with_weights(s, VectorXc::Ones(1));
}

SampledSignal gaussian(const GridSpec &g, double x0, double xi0, double width) {
  VectorXc v(g.N());
  for (Index i = 0; i < g.N(); ++i) {
    double d = g.time(i) - x0;
    double per = g.P();
    d -= per * std::round(d / per);
    v(i) = std::exp(-M_PI * d * d / (width * width)) * std::polar(1.0, kTwoPi * xi0 * g.time(i));
  }
  return SampledSignal(g, v);
}

MatrixXc impulse_to_symbol(const PlaneArray &h) {
  MatrixXc m = h.to_full();
  dft_rows(m, false);
  return m * h.grid_x.dt;
}

SamplingScheme cover_for(const SupportRegion &M, Index L_max, double T, std::uint64_t seed) {
  CoverOptions opts;
  opts.T_candidates = {T};
  return make_weights(find_cover(M, L_max, opts), seed);
}

Report run_recover_rect(const json &c, int threads) {
  Report rep;
  const double T = get<double>(c, "T"), phi_delta = get<double>(c, "phi_delta");
  const auto levels = get<std::vector<Index>>(c, "n_per_T");
  const Index periods = get<Index>(c, "periods"), probes = get<Index>(c, "probes");
  const std::uint64_t seed = get<std::uint64_t>(c, "seed");
  const std::vector<Rect> rects = rects_from(json::array({c.at("rect")}));
  if (levels.empty())
    throw config_error("n_per_T needs at least one level");
  const double period = T * static_cast<double>(periods);
  const auto model = SplineSpreadingModel::random(rects, period, seed);
  std::vector<TrigProbe> tp;
  for (Index p = 0; p < probes; ++p)
    tp.push_back(TrigProbe::random(period, get<double>(c, "probe_max_freq"), get<int>(c, "probe_terms"),
                                   trial_seed(seed, static_cast<std::uint64_t>(p))));

  rep.metrics.columns = {"n_per_T", "dt", "probe", "action_error"};
  std::vector<std::vector<double>> err(levels.size(), std::vector<double>(probes));
  for (std::size_t lv = 0; lv < levels.size(); ++lv) {
    const GridSpec g = GridSpec::make(T, levels[lv], periods);
    const SupportRegion M = SupportRegion::from_rectangles(g, rects);
    const BandlimitedOperator op = model.sample(M);
    const SamplingScheme s = rect_scheme(T);
    const SampledSignal resp = apply(op, realize_identifier(s, g).signal, Route::spreading);
    const WindowPair w = build_pou_pair(PouKind::linear, T, 1.0 / T, phi_delta, g);
    const PlaneArray h = recover_kernel_rect(resp, T, modulate(w.phi, -0.5 / T));
    parallel_for(probes, threads, [&](Index p) {
      VectorXc exact = model.apply(tp[p], g);
      err[lv][p] = rel_norm(apply_impulse(h, tp[p].sample(g)).values, exact);
    });
    for (Index p = 0; p < probes; ++p)
      rep.metrics.add({double(levels[lv]), g.dt, double(p), err[lv][p]});
  }
  Table curve;
  curve.columns = {"dt", "max_action_error"};
  std::vector<double> maxes;
  for (std::size_t lv = 0; lv < levels.size(); ++lv) {
    maxes.push_back(*std::max_element(err[lv].begin(), err[lv].end()));
    curve.add({T / double(levels[lv]), maxes.back()});
  }
  rep.plots["refinement"] = curve;
  rep.summary["max_action_error"] = maxes.front();
  rep.summary["max_action_error_per_level"] = maxes;
  add_check(rep, "max_action_error", maxes.front(), "<=", 1e-3);
  if (maxes.size() > 1) {
    double factor = maxes[0] / maxes[1];
    rep.summary["refinement_factor"] = factor;
    add_check(rep, "refinement_factor", factor, ">=", 2.0);
  }
  return rep;
}

Report run_recover_general(const json &c, int threads) {
  Report rep;
  const double T = get<double>(c, "T");
  const auto levels = get<std::vector<Index>>(c, "n_per_T");
  const Index probes = get<Index>(c, "probes");
  const std::uint64_t seed = get<std::uint64_t>(c, "seed");
  if (levels.empty())
    throw config_error("n_per_T needs at least one level");
  rep.metrics.columns = {"case", "L", "n_per_T", "dt", "probe", "action_error"};
  Table curve;
  curve.columns = {"dt"};
  std::vector<std::vector<double>> curves;
  json cases = json::array();
  Index ci = 0;
  for (const json &cs : c.at("cases")) {
    const std::string name = get<std::string>(cs, "name");
    const std::vector<Rect> rects = rects_from(cs.at("rects"));
    const Index periods = get<Index>(cs, "periods");
    const double period = T * static_cast<double>(periods);
    const std::uint64_t cseed = trial_seed(seed, 1000 + ci);
    const auto model = SplineSpreadingModel::random(rects, period, cseed);
    std::vector<TrigProbe> tp;
    for (Index p = 0; p < probes; ++p)
      tp.push_back(TrigProbe::random(period, get<double>(c, "probe_max_freq"), get<int>(c, "probe_terms"),
                                     trial_seed(cseed, static_cast<std::uint64_t>(p))));
    std::vector<double> maxes;
    SamplingScheme s;
    for (std::size_t lv = 0; lv < levels.size(); ++lv) {
      const GridSpec g = GridSpec::make(T, levels[lv], periods);
      const SupportRegion M = SupportRegion::from_rectangles(g, rects);
      s = cover_for(M, get<Index>(cs, "L_max"), T, cseed);
      const BandlimitedOperator op = model.sample(M);
      const SampledSignal resp = apply(op, realize_identifier(s, g).signal, Route::spreading);
      const WindowPair w = build_pou_pair(PouKind::linear, s.T, s.Omega, s.delta, g);
      const PlaneArray h = recover_kernel_general(resp, s, w);
      std::vector<double> err(probes);
      parallel_for(probes, threads, [&](Index p) {
        err[p] = rel_norm(apply_impulse(h, tp[p].sample(g)).values, model.apply(tp[p], g));
      });
      for (Index p = 0; p < probes; ++p)
        rep.metrics.add({double(ci), double(s.L), double(levels[lv]), g.dt, double(p), err[p]});
      maxes.push_back(*std::max_element(err.begin(), err.end()));
    }
    rep.artifacts["scheme_" + name + ".json"] = io::scheme_to_json(s).dump(2);
    curve.columns.push_back(name);
    curves.push_back(maxes);
    cases.push_back({{"name", name}, {"L", s.L}, {"delta", s.delta}, {"cond_A", s.condition_number},
                     {"max_action_error_per_level", maxes}});
    add_check(rep, name + ".base_action_error", maxes.front(), "<=", 1e-2);
    add_check(rep, name + ".strictly_decreasing", strictly_decreasing(maxes) ? 1 : 0, ">=", 1);
    ++ci;
  }
  for (std::size_t lv = 0; lv < levels.size(); ++lv) {
    std::vector<double> row{T / double(levels[lv])};
    for (const auto &cv : curves)
      row.push_back(cv[lv]);
    curve.add(row);
  }
  rep.plots["refinement"] = curve;
  rep.summary["cases"] = cases;
  return rep;
}

Report run_coeff_recover(const json &c, int) {
  Report rep;
  const double T = get<double>(c, "T"), beta1 = get<double>(c, "beta1"), beta2 = get<double>(c, "beta2");
  const auto levels = get<std::vector<Index>>(c, "n_per_T");
  const Index periods = get<Index>(c, "periods");
  const std::uint64_t seed = get<std::uint64_t>(c, "seed");
  const std::vector<Rect> rects = rects_from(c.at("rects"));
  if (levels.empty())
    throw config_error("n_per_T needs at least one level");
  const auto model = SplineSpreadingModel::random(rects, T * static_cast<double>(periods), seed);
  rep.metrics.columns = {"n_per_T", "dt", "symbol_rel_linf", "beta_doubling_diff", "kernel_path_diff",
                         "max_coeff_over_mu"};
  std::vector<double> errs;
  double beta_diff0 = 0, path_diff0 = 0;
  for (std::size_t lv = 0; lv < levels.size(); ++lv) {
    const GridSpec g = GridSpec::make(T, levels[lv], periods);
    const SupportRegion M = SupportRegion::from_rectangles(g, rects);
    const SamplingScheme s = cover_for(M, get<Index>(c, "L_max"), T, seed);
    const BandlimitedOperator op = model.sample(M);
    const SampledSignal resp = apply(op, realize_identifier(s, g).signal, Route::spreading);
    const WindowPair wq = build_pou_pair(PouKind::quadratic, s.T, s.Omega, s.delta, g);
    const CoefficientTable tab = discrete_coefficients(resp, s, wq, beta1, beta2);
    const PlaneArray sig = symbol_from_coefficients(tab);
    const MatrixXc exact = model.symbol(g);
    const double err = rel_linf(sig.values, exact);
    const CoefficientTable tab2 = discrete_coefficients(resp, s, wq, beta1, 2 * beta2);
    const double bdiff = rel_linf(symbol_from_coefficients(tab2).values, sig.values);
    const WindowPair wl = build_pou_pair(PouKind::linear, s.T, s.Omega, s.delta, g);
    const double pdiff = rel_linf(impulse_to_symbol(recover_kernel_general(resp, s, wl)), sig.values);
    const double mu = exact.cwiseAbs().maxCoeff();
    rep.metrics.add({double(levels[lv]), g.dt, err, bdiff, pdiff, tab.max_abs() / mu});
    errs.push_back(err);
    if (lv == 0) {
      beta_diff0 = bdiff;
      path_diff0 = pdiff;
      std::ostringstream os;
      io::write_coefficients_csv(os, tab);
      rep.artifacts["coefficients.csv"] = os.str();
      rep.artifacts["scheme.json"] = io::scheme_to_json(s).dump(2);
      rep.artifacts["window-report.json"] = io::window_report(wq).dump(2);
    }
  }
  Table curve;
  curve.columns = {"dt", "symbol_rel_linf"};
  for (std::size_t lv = 0; lv < levels.size(); ++lv)
    curve.add({T / double(levels[lv]), errs[lv]});
  rep.plots["refinement"] = curve;
  rep.summary["symbol_rel_linf_per_level"] = errs;
  rep.summary["beta_doubling_diff"] = beta_diff0;
  rep.summary["kernel_path_diff"] = path_diff0;
  add_check(rep, "base_symbol_rel_linf", errs.front(), "<=", 1e-2);
  add_check(rep, "strictly_decreasing", strictly_decreasing(errs) ? 1 : 0, ">=", 1);
  add_check(rep, "beta_doubling_diff", beta_diff0, "<=", 1e-8);
  add_check(rep, "kernel_path_diff", path_diff0, "<=", 1e-6);
  return rep;
}

Report run_local_subset(const json &c, int threads) {
  Report rep;
  const double T = get<double>(c, "T"), beta1 = get<double>(c, "beta1"), beta2 = get<double>(c, "beta2");
  const GridSpec g = GridSpec::make(T, get<Index>(c, "n_per_T"), get<Index>(c, "periods"));
  const std::uint64_t seed = get<std::uint64_t>(c, "seed");
  const SupportRegion M = SupportRegion::from_rectangles(g, rects_from(c.at("rects")));
  const BandlimitedOperator op = random_opw(M, seed);
  const SamplingScheme s = cover_for(M, get<Index>(c, "L_max"), T, seed);
  const SampledSignal resp = apply(op, realize_identifier(s, g).signal, Route::spreading);
  const WindowPair wq = build_pou_pair(PouKind::quadratic, s.T, s.Omega, s.delta, g);
  const CoefficientTable tab = discrete_coefficients(resp, s, wq, beta1, beta2);
  const MaskXb full = MaskXb::Constant(g.N(), g.N(), true);
  const double mu = sup_norm_on(op, full).value;

  const auto center = get<std::vector<double>>(c, "f_center");
  if (center.size() != 2)
    throw config_error("f_center is [x, xi]");
  const SampledSignal f = gaussian(g, center[0], center[1], get<double>(c, "f_width"));
  const VectorXc Hf = apply(op, f, Route::spreading).values;
  const double box = get<double>(c, "f_box");
  const auto margins = get<std::vector<double>>(c, "margins");
  GaborFrameSpec frame{wq.r, static_cast<double>(s.L) * s.T / beta1, 1.0 / (beta2 * s.T), beta2 * s.T};
  const Lattice lat = frame_lattice(frame);
  const double rho_f = localization_measure(
      f, frame, lattice_box(lat, center[0] - box, center[0] + box, center[1] - box, center[1] + box));

  std::vector<double> err(margins.size()), rho(margins.size()), count(margins.size());
  parallel_for(static_cast<Index>(margins.size()), threads, [&](Index i) {
    const double R = box + margins[i];
    const MaskXb S = coefficient_box(tab, center[0] - R, center[0] + R, center[1] - R, center[1] + R);
    const PlaneArray sig = symbol_from_coefficients(tab, &S);
    err[i] = (apply_symbol(sig, f).values - Hf).norm() / f.values.norm();
    rho[i] = localization_measure(f, frame, lattice_box(lat, center[0] - R, center[0] + R,
                                                         center[1] - R, center[1] + R));
    count[i] = static_cast<double>(S.count());
  });
  rep.metrics.columns = {"margin", "coefficients", "localization", "error_over_norm_f", "error_over_mu"};
  Table curve;
  curve.columns = {"margin", "error_over_mu"};
  for (std::size_t i = 0; i < margins.size(); ++i) {
    rep.metrics.add({margins[i], count[i], rho[i], err[i], err[i] / mu});
    curve.add({margins[i], err[i] / mu});
  }
  rep.plots["error_vs_margin"] = curve;
  rep.artifacts["scheme.json"] = io::scheme_to_json(s).dump(2);
  std::vector<double> rel(err.size());
  for (std::size_t i = 0; i < err.size(); ++i)
    rel[i] = err[i] / mu;
  rep.summary["mu"] = mu;
  rep.summary["error_over_mu"] = rel;
  rep.summary["localization"] = rho;
  rep.summary["f_localization"] = rho_f;
  add_check(rep, "f_localization", rho_f, ">=", 0.99);
  add_check(rep, "min_localization_on_S", *std::min_element(rho.begin(), rho.end()), ">=", 0.99);
  add_check(rep, "strictly_decreasing", strictly_decreasing(rel) ? 1 : 0, ">=", 1);
  add_check(rep, "largest_margin_error_over_mu", rel.back(), "<=", 1e-2);
  return rep;
}

Report run_truncate_sweep(const json &c, int threads) {
  Report rep;
  const double T = get<double>(c, "T");
  const GridSpec g = GridSpec::make(T, get<Index>(c, "n_per_T"), get<Index>(c, "periods"));
  const std::uint64_t seed = get<std::uint64_t>(c, "seed");
  const std::vector<Rect> rects = rects_from(json::array({c.at("rect")}));
  const SupportRegion M = SupportRegion::from_rectangles(g, rects);
  const BandlimitedOperator op = random_opw(M, seed);
  const SamplingScheme s = rect_scheme(T);
  const Band band{M.bbox.g0, M.bbox.g1, false};
  const Mollifier mol = build_mollifier(get<double>(c, "mollifier_delta"), band,
                                        get<double>(c, "mollifier_target_eps"), g);
  const WindowPair w = build_pou_pair(PouKind::linear, T, 1.0 / T, get<double>(c, "phi_delta"), g);
  const SampledSignal phi = modulate(w.phi, -0.5 / T);
  const SampledSignal f = gaussian(g, 0, 0, get<double>(c, "f_width"));
  const VectorXc Hf = apply(op, f, Route::spreading).values;
  const double mu = sup_norm_on(op, MaskXb::Constant(g.N(), g.N(), true)).value;
  const double fn = f.values.norm();
  const auto radii = get<std::vector<double>>(c, "radii_LT");

  std::vector<double> err(radii.size()), impulses(radii.size());
  parallel_for(static_cast<Index>(radii.size()), threads, [&](Index i) {
    const double R = radii[i] * s.T * static_cast<double>(s.L);
    const IdentifierSpec id = realize_identifier(s, g, Interval{-R, R}, &mol);
    const SampledSignal resp = apply(op, id.signal, Route::spreading);
    const PlaneArray h = recover_kernel_rect(resp, T, phi);
    err[i] = (apply_impulse(h, f).values - Hf).norm() / fn;
    impulses[i] = static_cast<double>(id.impulses);
  });
  rep.metrics.columns = {"radius_LT", "radius", "impulses", "error_over_norm_f", "error_over_mu_norm_f"};
  Table curve;
  curve.columns = {"radius", "error_over_mu_norm_f"};
  std::vector<double> rel(radii.size());
  for (std::size_t i = 0; i < radii.size(); ++i) {
    rel[i] = err[i] / mu;
    rep.metrics.add({radii[i], radii[i] * T, impulses[i], err[i], rel[i]});
    curve.add({radii[i] * T, rel[i]});
  }
  double tail = 0;
  const double R_last = radii.empty() ? 0 : radii.back() * T;
  for (Index i = 0; i < g.N(); ++i)
    if (std::abs(g.time(i)) > R_last)
      tail += std::norm(f.values(i));
  rep.plots["error_vs_radius"] = curve;
  rep.artifacts["window-report.json"] = io::window_report(w, std::nullopt, &mol).dump(2);
  rep.summary["mu"] = mu;
  rep.summary["mollifier_eps"] = mol.flatness_eps;
  rep.summary["mollifier_target_met"] = mol.target_met;
  rep.summary["f_tail_energy_beyond_R"] = tail / (fn * fn);
  rep.summary["error_over_mu_norm_f"] = rel;
  if (radii.empty())
    throw config_error("radii_LT is empty");
  add_check(rep, "strictly_decreasing", strictly_decreasing(rel) ? 1 : 0, ">=", 1);
  add_check(rep, "largest_radius_error_over_mu_norm_f", rel.back(), "<=", 1e-3);
  return rep;
}

Report run_nodecay(const json &c, int threads) {
  Report rep;
  const double T = get<double>(c, "T");
  const GridSpec g = GridSpec::make(T, get<Index>(c, "n_per_T"), get<Index>(c, "periods"));
  const double R = get<double>(c, "radius"), decay = get<double>(c, "decay_radius");
  const Index n_max = get<Index>(c, "n_max");
  const double W = get<double>(c, "phi_halfwidth");
  if (2 * n_max * T >= g.P())
    throw config_error("shift range exceeds the ambient period");
  const WindowPair w = build_pou_pair(PouKind::linear, T, 1.0 / T, get<double>(c, "r_delta"), g);
  VectorXc ph(g.N());
  for (Index k = 0; k < g.N(); ++k)
    ph(k) = bump(g.freq(k) / W);
  const VectorXc phi = ift_samples(ph, g.dnu());
  Index lo = g.N(), hi = -g.N();
  for (Index i = 0; i < g.N(); ++i)
    if (w.r.values(i) != cd(0)) {
      lo = std::min(lo, g.centered(i));
      hi = std::max(hi, g.centered(i));
    }
  const SamplingScheme s = rect_scheme(T);
  const SampledSignal pure = realize_identifier(s, g).signal;
  const SampledSignal trunc = realize_identifier(s, g, Interval{-R, R}).signal;
  const Index count = 2 * n_max + 1, nT = g.n_per_T;
  std::vector<double> a(count), b(count);
  parallel_for(count, threads, [&](Index i) {
    const Index n = i - n_max;
    PlaneArray h = PlaneArray::window(g, Semantics::impulse, 0, g.N(), lo, hi - lo + 1);
    for (Index t = 0; t < h.values.cols(); ++t) {
      const cd rv = w.r.values(g.wrap(lo + t));
      for (Index x = 0; x < g.N(); ++x)
        h.values(x, t) = phi(pmod(x - n * nT, g.N())) * rv;
    }
    a[i] = apply_impulse(h, pure).values.norm();
    b[i] = apply_impulse(h, trunc).values.norm();
  });
  const double amax = *std::max_element(a.begin(), a.end()), bmax = *std::max_element(b.begin(), b.end());
  rep.metrics.columns = {"n", "pure_norm", "truncated_norm", "pure_ratio", "truncated_ratio"};
  double beyond = 0;
  for (Index i = 0; i < count; ++i) {
    const double n = static_cast<double>(i - n_max);
    rep.metrics.add({n, a[i], b[i], a[i] / amax, b[i] / bmax});
    if (std::abs(n) * T >= R + decay)
      beyond = std::max(beyond, b[i] / bmax);
  }
  Table curve;
  curve.columns = {"shift", "pure_ratio", "truncated_ratio"};
  for (Index i = 0; i < count; ++i)
    curve.add({double(i - n_max) * T, a[i] / amax, b[i] / bmax});
  rep.plots["norm_vs_shift"] = curve;
  const double amin = *std::min_element(a.begin(), a.end());
  rep.summary["pure_min_over_max"] = amin / amax;
  rep.summary["truncated_max_ratio_beyond"] = beyond;
  rep.summary["beyond_threshold"] = R + decay;
  add_check(rep, "pure_min_over_max", amin / amax, ">=", 0.5);
  add_check(rep, "truncated_ratio_beyond_radius", beyond, "<=", 1e-3);
  return rep;
}

Report run_frame_check(const json &c, int) {
  Report rep;
  const std::uint64_t seed = get<std::uint64_t>(c, "seed");
  rep.metrics.columns = {"case", "T", "Omega", "delta", "beta2", "linear_time_res", "linear_freq_res",
                         "quadratic_time_res", "quadratic_freq_res", "A", "B", "tightness",
                         "A_rel_beta2_over_T", "A_rel_beta2_T"};
  json cases = json::array();
  Index ci = 0;
  for (const json &cs : c.at("cases")) {
    const double T = get<double>(cs, "T"), Omega = get<double>(cs, "Omega"), delta = get<double>(cs, "delta");
    const GridSpec g = GridSpec::make(T, get<Index>(cs, "n_per_T"), get<Index>(cs, "periods"));
    const WindowPair wl = build_pou_pair(PouKind::linear, T, Omega, delta, g);
    const WindowPair wq = build_pou_pair(PouKind::quadratic, T, Omega, delta, g);
    const PouResiduals rl = pou_residuals(wl), rq = pou_residuals(wq);
    const double beta2 = 1 + 2 * delta / T;
    GaborFrameSpec spec{wq.r, T, 1.0 / (beta2 * T), beta2 / T};
    const FrameBounds fb = frame_bounds(spec, trial_seed(seed, ci));
    const double tight = fb.B / fb.A - 1;
    const double a_paper = std::abs(fb.A - beta2 / T) / (beta2 / T);
    const double a_frame = std::abs(fb.A - beta2 * T) / (beta2 * T);
    rep.metrics.add({double(ci), T, Omega, delta, beta2, rl.time, rl.freq, rq.time, rq.freq, fb.A, fb.B,
                     tight, a_paper, a_frame});
    rep.artifacts["window-report_" + std::to_string(ci) + "_linear.json"] = io::window_report(wl).dump(2);
    rep.artifacts["window-report_" + std::to_string(ci) + "_quadratic.json"] =
        io::window_report(wq, fb).dump(2);
    const std::string tag = "case" + std::to_string(ci) + ".";
    const double res = std::max({rl.time, rl.freq, rq.time, rq.freq});
    add_check(rep, tag + "pou_residual", res, "<=", 1e-12);
    add_check(rep, tag + "tightness", tight, "<=", 1e-8);
    add_check(rep, tag + "A_vs_beta2_over_T", a_paper, "<=", 1e-8);
    cases.push_back({{"A", fb.A}, {"B", fb.B}, {"tightness", tight}, {"max_pou_residual", res},
                     {"A_rel_beta2_over_T", a_paper}, {"A_rel_beta2_T", a_frame}});
    ++ci;
  }
  rep.summary["cases"] = cases;
  return rep;
}

Report run_norm_equiv(const json &c, int threads) {
  Report rep;
  const GridSpec g = GridSpec::make(1.0, get<Index>(c, "n_per_T"), get<Index>(c, "periods"));
  const std::uint64_t seed = get<std::uint64_t>(c, "seed");
  const SupportRegion M = SupportRegion::from_rectangles(g, rects_from(c.at("rects")));
  const Index count = get<Index>(c, "operators");
  if (count < 2)
    throw config_error("norm-equiv needs at least two operators");
  const MaskXb full = MaskXb::Constant(g.N(), g.N(), true);
  std::vector<double> opn(count), sup(count);
  parallel_for(count, threads, [&](Index i) {
    const BandlimitedOperator op = random_opw(M, trial_seed(seed, static_cast<std::uint64_t>(i)));
    opn[i] = operator_norm_estimate(op);
    sup[i] = sup_norm_on(op, full).value;
  });
  rep.metrics.columns = {"operator", "operator_norm", "symbol_sup", "ratio"};
  std::vector<double> ratio(count);
  for (Index i = 0; i < count; ++i) {
    ratio[i] = opn[i] / sup[i];
    rep.metrics.add({double(i), opn[i], sup[i], ratio[i]});
  }
  const double lo = *std::min_element(ratio.begin(), ratio.end());
  const double hi = *std::max_element(ratio.begin(), ratio.end());
  Table hist;
  hist.columns = {"operator", "ratio"};
  for (Index i = 0; i < count; ++i)
    hist.add({double(i), ratio[i]});
  rep.plots["ratios"] = hist;
  rep.summary["ratio_min"] = lo;
  rep.summary["ratio_max"] = hi;
  rep.summary["spread"] = hi / lo;
  rep.summary["area"] = M.area;
  add_check(rep, "ratio_spread", hi / lo, "<=", 100.0);
  return rep;
}

using Runner = Report (*)(const json &, int);

const std::map<std::string, Runner> &runners() {
  static const std::map<std::string, Runner> r = {
      {"recover-rect", run_recover_rect},     {"recover-general", run_recover_general},
      {"coeff-recover", run_coeff_recover},   {"local-subset", run_local_subset},
      {"truncate-sweep", run_truncate_sweep}, {"nodecay-demo", run_nodecay},
      {"frame-check", run_frame_check},       {"norm-equiv", run_norm_equiv}};
  return r;
}

} // namespace

const std::vector<std::string> &experiment_names() {
  static const std::vector<std::string> names = {"recover-rect",   "recover-general", "coeff-recover",
                                                 "local-subset",   "truncate-sweep",  "nodecay-demo",
                                                 "frame-check",    "norm-equiv"};
  return names;
}

json default_config(const std::string &experiment) {
  auto it = defaults().find(experiment);
  if (it == defaults().end())
    throw config_error("unknown experiment '" + experiment + "'");
  json out = it->second;
  out["experiment"] = experiment;
  return out;
}

json resolve_config(const json &config, const RunOptions &opts) {
  if (!config.is_object())
    throw config_error("config must be a JSON object");
  if (!config.contains("experiment") || !config["experiment"].is_string())
    throw config_error("config lacks a string 'experiment'");
  json out = default_config(config["experiment"].get<std::string>());
  for (const auto &[key, value] : config.items()) {
    if (!out.contains(key))
      throw config_error("unknown config key '" + key + "'");
    out[key] = value;
  }
  if (opts.seed)
    out["seed"] = *opts.seed;
  if (!out["seed"].is_number_integer() || out["seed"].get<long long>() < 0)
    throw config_error("seed must be a non-negative integer");
  out["seed"] = out["seed"].get<std::uint64_t>();
  return out;
}

Report run_experiment(const json &config, const RunOptions &opts) {
  const json c = resolve_config(config, opts);
  const std::string name = c["experiment"].get<std::string>();
  const auto t0 = std::chrono::steady_clock::now();
  Report rep;
  try {
    rep = runners().at(name)(c, opts.threads);
  } catch (const json::exception &e) {
    throw config_error(std::string("config: ") + e.what());
  }
  rep.experiment = name;
  rep.config = c;
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

void write_report(const Report &r, const std::string &dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path d(dir);
  io::write_file((d / "report.json").string(), r.to_json().dump(2) + "\n");
  io::write_file((d / "metrics.csv").string(), r.metrics.csv());
  for (const auto &[name, t] : r.plots)
    io::write_file((d / ("plot_" + name + ".csv")).string(), t.csv());
  for (const auto &[name, text] : r.artifacts)
    io::write_file((d / name).string(), text);
}

} // namespace opsamp
