#include "opsamp/io.hpp"

#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

namespace opsamp::io {

namespace {

std::map<std::string, std::string> parse_meta(const std::string &line) {
  if (line.rfind("# ", 0) != 0)
    throw Error(Error::Kind::config, "CSV metadata line missing");
  std::map<std::string, std::string> out;
  std::stringstream ss(line.substr(2));
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos)
      throw Error(Error::Kind::config, "bad CSV metadata item: " + item);
    out[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return out;
}

const std::string &need(const std::map<std::string, std::string> &m, const std::string &key) {
  auto it = m.find(key);
  if (it == m.end())
    throw Error(Error::Kind::config, "CSV metadata lacks " + key);
  return it->second;
}

GridSpec grid_from_meta(const std::map<std::string, std::string> &m) {
  GridSpec g;
  g.dt = std::stod(need(m, "dt"));
  g.n_per_T = std::stoll(need(m, "n_per_T"));
  g.periods = std::stoll(need(m, "periods"));
  g.L = std::stoll(need(m, "L"));
  return g;
}

std::string grid_meta(const GridSpec &g) {
  std::ostringstream os;
  os << std::setprecision(17) << "dt=" << g.dt << ",n_per_T=" << g.n_per_T
     << ",periods=" << g.periods << ",L=" << g.L;
  return os.str();
}

std::vector<cd> read_rows(std::istream &is) {
  std::string line;
  if (!std::getline(is, line) || line != "index,re,im")
    throw Error(Error::Kind::config, "CSV column header must be index,re,im");
  std::vector<cd> vals;
  while (std::getline(is, line)) {
    if (line.empty())
      continue;
    std::stringstream ss(line);
    std::string a, b, c;
    std::getline(ss, a, ',');
    std::getline(ss, b, ',');
    std::getline(ss, c, ',');
    if (std::stoll(a) != static_cast<Index>(vals.size()))
      throw Error(Error::Kind::config, "CSV rows out of order");
    vals.emplace_back(std::stod(b), std::stod(c));
  }
  return vals;
}

Semantics semantics_from(const std::string &s) {
  for (Semantics v : {Semantics::time_freq, Semantics::symbol, Semantics::kernel,
                      Semantics::impulse, Semantics::zak})
    if (s == to_string(v))
      return v;
  throw Error(Error::Kind::config, "unknown semantics " + s);
}

json pairs(const VectorXc &v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i)
    a.push_back({v(i).real(), v(i).imag()});
  return a;
}

VectorXc from_pairs(const json &a) {
  VectorXc v(static_cast<Index>(a.size()));
  for (Index i = 0; i < v.size(); ++i)
    v(i) = cd(a[i][0].get<double>(), a[i][1].get<double>());
  return v;
}

} // namespace

json grid_to_json(const GridSpec &g) {
  return {{"dt", g.dt}, {"n_per_T", g.n_per_T}, {"periods", g.periods}, {"L", g.L}, {"N", g.N()}};
}

GridSpec grid_from_json(const json &j) {
  GridSpec g;
  g.dt = j.at("dt").get<double>();
  g.n_per_T = j.at("n_per_T").get<Index>();
  g.periods = j.at("periods").get<Index>();
  g.L = j.value("L", Index{1});
  return g;
}

void write_csv(std::ostream &os, const SampledSignal &f) {
  os << "# " << grid_meta(f.grid) << ",origin_index=" << f.origin_index
     << ",domain=" << (f.domain == Domain::time ? "time" : "frequency") << "\n";
  os << "index,re,im\n" << std::setprecision(17);
  for (Index i = 0; i < f.size(); ++i)
    os << i << "," << f.values(i).real() << "," << f.values(i).imag() << "\n";
}

void write_csv(std::ostream &os, const PlaneArray &p) {
  if (!(p.grid_x == p.grid_y))
    throw Error(Error::Kind::grid, "plane axes must share one grid");
  os << "# " << grid_meta(p.grid_x) << ",semantics=" << to_string(p.semantics)
     << ",x_first=" << p.x_first << ",y_first=" << p.y_first << ",rows=" << p.values.rows()
     << ",cols=" << p.values.cols() << "\n";
  os << "index,re,im\n" << std::setprecision(17);
  Index idx = 0;
  for (Index a = 0; a < p.values.rows(); ++a)
    for (Index b = 0; b < p.values.cols(); ++b, ++idx)
      os << idx << "," << p.values(a, b).real() << "," << p.values(a, b).imag() << "\n";
}

SampledSignal read_signal_csv(std::istream &is) {
  std::string line;
  std::getline(is, line);
  auto meta = parse_meta(line);
  GridSpec g = grid_from_meta(meta);
  auto vals = read_rows(is);
  SampledSignal f(g, Eigen::Map<VectorXc>(vals.data(), static_cast<Index>(vals.size())),
                  need(meta, "domain") == "time" ? Domain::time : Domain::frequency);
  f.origin_index = std::stoll(need(meta, "origin_index"));
  return f;
}

PlaneArray read_plane_csv(std::istream &is) {
  std::string line;
  std::getline(is, line);
  auto meta = parse_meta(line);
  GridSpec g = grid_from_meta(meta);
  Index rows = std::stoll(need(meta, "rows")), cols = std::stoll(need(meta, "cols"));
  PlaneArray p = PlaneArray::window(g, semantics_from(need(meta, "semantics")),
                                    std::stoll(need(meta, "x_first")), rows,
                                    std::stoll(need(meta, "y_first")), cols);
  auto vals = read_rows(is);
  if (static_cast<Index>(vals.size()) != rows * cols)
    throw Error(Error::Kind::config, "plane CSV row count mismatch");
  for (Index a = 0; a < rows; ++a)
    for (Index b = 0; b < cols; ++b)
      p.values(a, b) = vals[a * cols + b];
  return p;
}

json to_json(const SampledSignal &f) {
  return {{"grid", grid_to_json(f.grid)},
          {"origin_index", f.origin_index},
          {"domain", f.domain == Domain::time ? "time" : "frequency"},
          {"values", pairs(f.values)}};
}

json to_json(const PlaneArray &p) {
  json vals = json::array();
  for (Index a = 0; a < p.values.rows(); ++a)
    vals.push_back(pairs(p.values.row(a).transpose()));
  return {{"grid", grid_to_json(p.grid_x)},
          {"origin_index", {p.x_first, p.y_first}},
          {"semantics", to_string(p.semantics)},
          {"values", vals}};
}

SampledSignal signal_from_json(const json &j) {
  SampledSignal f(grid_from_json(j.at("grid")), from_pairs(j.at("values")),
                  j.value("domain", std::string("time")) == "time" ? Domain::time
                                                                   : Domain::frequency);
  f.origin_index = j.value("origin_index", Index{0});
  return f;
}

PlaneArray plane_from_json(const json &j) {
  const json &rows = j.at("values");
  Index nr = static_cast<Index>(rows.size()), nc = nr ? static_cast<Index>(rows[0].size()) : 0;
  const json &o = j.at("origin_index");
  PlaneArray p = PlaneArray::window(grid_from_json(j.at("grid")),
                                    semantics_from(j.at("semantics").get<std::string>()),
                                    o[0].get<Index>(), nr, o[1].get<Index>(), nc);
  for (Index a = 0; a < nr; ++a) {
    if (static_cast<Index>(rows[a].size()) != nc)
      throw Error(Error::Kind::config, "ragged plane values");
    p.values.row(a) = from_pairs(rows[a]).transpose();
  }
  return p;
}

std::vector<Index> rle_encode(const MaskXb &m) {
  std::vector<Index> runs;
  bool cur = false;
  Index len = 0;
  for (Index i = 0; i < m.size(); ++i) {
    if (m.data()[i] != cur) {
      runs.push_back(len);
      cur = !cur;
      len = 0;
    }
    ++len;
  }
  runs.push_back(len);
  return runs;
}

MaskXb rle_decode(const std::vector<Index> &runs, Index rows, Index cols) {
  MaskXb m(rows, cols);
  Index pos = 0;
  bool cur = false;
  for (Index r : runs) {
    if (r < 0 || pos + r > m.size())
      throw Error(Error::Kind::config, "run lengths exceed mask size");
    std::fill_n(m.data() + pos, r, cur);
    pos += r;
    cur = !cur;
  }
  if (pos != m.size())
    throw Error(Error::Kind::config, "run lengths do not cover the mask");
  return m;
}

json scheme_to_json(const SamplingScheme &s) {
  json shifts = json::array();
  for (std::size_t j = 0; j < s.shifts.size(); ++j)
    shifts.push_back({{"k", s.shifts[j].k},
                      {"n", s.shifts[j].n},
                      {"occupied", j < s.occupied.size() ? bool(s.occupied[j]) : true}});
  json out = {{"L", s.L},
              {"T", s.T},
              {"Omega", s.Omega},
              {"delta", s.delta},
              {"freq_origin", s.freq_origin},
              {"margin", s.margin},
              {"fits_window", s.fits_window},
              {"shifts", shifts}};
  if (s.has_weights()) {
    out["c"] = pairs(s.c);
    out["cond_A"] = s.condition_number;
  }
  return out;
}

json operator_to_json(const BandlimitedOperator &op, const std::string &eta_csv, std::uint64_t seed) {
  const SupportRegion &M = op.support;
  json rects = json::array();
  for (const Rect &r : M.rects)
    rects.push_back({r.t0, r.t1, r.g0, r.g1});
  return {{"grid", grid_to_json(op.grid())},
          {"support",
           {{"rects", rects},
            {"t_first", M.t_first},
            {"g_first", M.g_first},
            {"rows", M.mask.rows()},
            {"cols", M.mask.cols()},
            {"rle", rle_encode(M.mask)},
            {"area", M.area}}},
          {"eta_csv", eta_csv},
          {"seed", seed}};
}

json window_report(const WindowPair &w, const std::optional<FrameBounds> &frame,
                   const Mollifier *mollifier) {
  auto bounds = [](const SampledSignal &f, double step) {
    const GridSpec &g = f.grid;
    Index lo = g.N(), hi = -g.N();
    for (Index i = 0; i < g.N(); ++i)
      if (f.values(i) != cd(0)) {
        lo = std::min(lo, g.centered(i));
        hi = std::max(hi, g.centered(i));
      }
    return lo > hi ? json::array() : json{lo * step, hi * step};
  };
  PouResiduals res = pou_residuals(w);
  json out = {{"kind", to_string(w.kind)},
              {"T", w.T},
              {"Omega", w.Omega},
              {"delta", w.delta},
              {"residuals", {{"time", res.time}, {"frequency", res.freq}}},
              {"support", {{"r", bounds(w.r, w.r.grid.dt)}, {"phi_hat", bounds(w.phi_hat, w.r.grid.dnu())}}}};
  if (frame)
    out["frame_bounds"] = {{"A", frame->A}, {"B", frame->B}, {"iterations", frame->iterations}};
  if (mollifier)
    out["mollifier"] = {{"delta", mollifier->delta},
                        {"requested_delta", mollifier->requested_delta},
                        {"achieved_eps", mollifier->flatness_eps},
                        {"band", {mollifier->band.lo, mollifier->band.hi}},
                        {"target_met", mollifier->target_met}};
  return out;
}

void write_coefficients_csv(std::ostream &os, const CoefficientTable &t) {
  os << "j,m,l,x_pos,xi_pos,re,im\n" << std::setprecision(17);
  for (std::size_t j = 0; j < t.entries.size(); ++j)
    for (Index m = 0; m < t.Jn; ++m)
      for (Index l = 0; l < t.Jt; ++l) {
        const cd v = t.entries[j](m, l);
        os << j << "," << m << "," << l << "," << t.x_pos(m) << "," << t.xi_pos(l) << ","
           << v.real() << "," << v.imag() << "\n";
      }
}

void write_file(const std::string &path, const std::string &text) {
  std::ofstream f(path, std::ios::binary);
  if (!f)
    throw Error(Error::Kind::config, "cannot write " + path);
  f << text;
}

} // namespace opsamp::io
