#pragma once

#include "opsamp/identify.hpp"
#include "opsamp/operators.hpp"
#include "opsamp/recover.hpp"
#include "opsamp/windows.hpp"

#include <json.hpp>

#include <iosfwd>
#include <optional>
#include <string>

namespace opsamp::io {

using json = nlohmann::json;

json grid_to_json(const GridSpec &g);
GridSpec grid_from_json(const json &j);

// CSV: one "# key=value,..." metadata line, then "index,re,im" rows.
void write_csv(std::ostream &os, const SampledSignal &f);
void write_csv(std::ostream &os, const PlaneArray &p);   // index = row-major offset in the window
SampledSignal read_signal_csv(std::istream &is);
PlaneArray read_plane_csv(std::istream &is);

json to_json(const SampledSignal &f);
json to_json(const PlaneArray &p);
SampledSignal signal_from_json(const json &j);
PlaneArray plane_from_json(const json &j);

// Run-length encoding of a column-major boolean mask: alternating run lengths, starting with false.
std::vector<Index> rle_encode(const MaskXb &m);
MaskXb rle_decode(const std::vector<Index> &runs, Index rows, Index cols);

json scheme_to_json(const SamplingScheme &s);
json operator_to_json(const BandlimitedOperator &op, const std::string &eta_csv, std::uint64_t seed);

json window_report(const WindowPair &w, const std::optional<FrameBounds> &frame = std::nullopt,
                   const Mollifier *mollifier = nullptr);

void write_coefficients_csv(std::ostream &os, const CoefficientTable &t);

void write_file(const std::string &path, const std::string &text);

} // namespace opsamp::io
