#pragma once

/// \file
/// File formats.
///
///  XBEAM001 snapshot: 8-byte magic "XBEAM001", little-endian u64 nx, u64 ny,
///  f64 dx, f64 dy, f64 z, f64 carrier_k, then ny*nx (re, im) f64 pairs,
///  row-major with y as the slow index.
///
///  Dispersion CSV, ModeSpectrum CSV and comparison CSV: header row, numbers
///  printed with 17 significant digits so every double round-trips.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cctype>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "xbeam/core.hpp"
#include "xbeam/propagation.hpp"

namespace xbeam::io {

inline constexpr char snapshot_magic[8] = {'X', 'B', 'E', 'A', 'M', '0', '0', '1'};

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <class T>
void put_le(std::ostream& os, T value) {
  auto bits = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
  if constexpr (std::endian::native == std::endian::big) std::reverse(bits.begin(), bits.end());
  os.write(reinterpret_cast<const char*>(bits.data()), sizeof(T));
}

template <class T>
T get_le(std::istream& is) {
  std::array<unsigned char, sizeof(T)> bits{};
  if (!is.read(reinterpret_cast<char*>(bits.data()), sizeof(T)))
    throw FormatError("truncated XBEAM001 stream");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bits.begin(), bits.end());
  return std::bit_cast<T>(bits);
}

}  // namespace detail

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  // strtod keeps subnormals (std::stod rejects them as out of range).
  if (s.empty() || std::isspace(static_cast<unsigned char>(s.front())))
    throw FormatError("not a number: '" + s + "'");
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) throw FormatError("not a number: '" + s + "'");
  return v;
}

// ---- XBEAM001 -------------------------------------------------------------

struct Snapshot {
  TransverseGrid grid;
  double z = 0.0;
  double carrier_k = 0.0;
  std::vector<complex> envelope;
};

inline void write_snapshot(std::ostream& os, const BeamState& state) {
  os.write(snapshot_magic, sizeof snapshot_magic);
  const auto& g = state.grid();
  detail::put_le<std::uint64_t>(os, g.nx());
  detail::put_le<std::uint64_t>(os, g.ny());
  detail::put_le<double>(os, g.dx());
  detail::put_le<double>(os, g.dy());
  detail::put_le<double>(os, state.z());
  detail::put_le<double>(os, state.context().carrier_k);
  for (const auto& v : state.envelope()) {
    detail::put_le<double>(os, v.real());
    detail::put_le<double>(os, v.imag());
  }
}

inline Snapshot read_snapshot(std::istream& is) {
  char magic[8];
  if (!is.read(magic, sizeof magic) || std::memcmp(magic, snapshot_magic, sizeof magic) != 0)
    throw FormatError("missing XBEAM001 magic");
  const auto nx = detail::get_le<std::uint64_t>(is);
  const auto ny = detail::get_le<std::uint64_t>(is);
  const auto dx = detail::get_le<double>(is);
  const auto dy = detail::get_le<double>(is);
  Snapshot s;
  try {
    s.grid = TransverseGrid(nx, ny, dx, dy);
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("invalid XBEAM001 grid: ") + e.what());
  }
  s.z = detail::get_le<double>(is);
  s.carrier_k = detail::get_le<double>(is);
  s.envelope.resize(s.grid.size());
  for (auto& v : s.envelope) {
    const double re = detail::get_le<double>(is);
    const double im = detail::get_le<double>(is);
    v = {re, im};
  }
  return s;
}

inline std::string snapshot_bytes(const BeamState& state) {
  std::ostringstream os(std::ios::binary);
  write_snapshot(os, state);
  return os.str();
}

// ---- CSV ----------------------------------------------------------------

namespace detail {
inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}
}  // namespace detail

inline constexpr const char* dispersion_header =
    "label,kappa_or_lambda,kz_exact_re,kz_exact_im,kz_paraxial,phase_error_rate,correction_estimate,"
    "correction_exact";

inline void write_dispersion_csv(std::ostream& os, const std::vector<DispersionRecord>& rows) {
  os << dispersion_header << '\n';
  for (const auto& r : rows)
    os << r.label << ',' << format_double(r.kappa_or_lambda) << ',' << format_double(r.kz_exact.real())
       << ',' << format_double(r.kz_exact.imag()) << ',' << format_double(r.kz_paraxial) << ','
       << format_double(r.phase_error_rate) << ',' << format_double(r.correction_estimate) << ','
       << format_double(r.correction_exact) << '\n';
}

inline std::vector<DispersionRecord> read_dispersion_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != dispersion_header) throw FormatError("bad dispersion CSV header");
  std::vector<DispersionRecord> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto c = detail::split_csv_line(line);
    if (c.size() != 8) throw FormatError("dispersion CSV row needs 8 fields: " + line);
    DispersionRecord r;
    r.label = c[0];
    r.kappa_or_lambda = parse_double(c[1]);
    r.kz_exact = {parse_double(c[2]), parse_double(c[3])};
    r.kz_paraxial = parse_double(c[4]);
    r.phase_error_rate = parse_double(c[5]);
    r.correction_estimate = parse_double(c[6]);
    r.correction_exact = parse_double(c[7]);
    rows.push_back(std::move(r));
  }
  return rows;
}

inline constexpr const char* spectrum_header = "n,l,coeff_re,coeff_im";

/// Mode rows followed by one metadata row "residual_norm,<value>,,".
inline void write_spectrum_csv(std::ostream& os, const ModeSpectrum& spectrum) {
  os << spectrum_header << '\n';
  for (const auto& e : spectrum.entries())
    os << e.n << ',' << e.l << ',' << format_double(e.coefficient.real()) << ','
       << format_double(e.coefficient.imag()) << '\n';
  os << "residual_norm," << format_double(spectrum.residual_norm()) << ",,\n";
}

/// The context is not part of the CSV and must be supplied.
inline ModeSpectrum read_spectrum_csv(std::istream& is, const PhysicalContext& ctx) {
  std::string line;
  if (!std::getline(is, line) || line != spectrum_header) throw FormatError("bad spectrum CSV header");
  std::vector<ModeEntry> entries;
  double residual = -1.0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto c = detail::split_csv_line(line);
    if (c.size() != 4) throw FormatError("spectrum CSV row needs 4 fields: " + line);
    if (c[0] == "residual_norm") {
      residual = parse_double(c[1]);
      continue;
    }
    try {
      entries.push_back({std::stoi(c[0]), std::stoi(c[1]), {parse_double(c[2]), parse_double(c[3])}});
    } catch (const std::logic_error&) {
      throw FormatError("bad mode index in row: " + line);
    }
  }
  if (residual < 0.0) throw FormatError("spectrum CSV lacks the residual_norm row");
  return ModeSpectrum(std::move(entries), ctx, residual);
}

inline constexpr const char* comparison_header =
    "z,l2_distance,norm_exact,norm_paraxial,rms_exact,rms_paraxial,oam_exact,oam_paraxial";

inline void write_comparison_csv(std::ostream& os, const propagation::ComparisonReport& report) {
  os << comparison_header << '\n';
  for (const auto& r : report.rows)
    os << format_double(r.z) << ',' << format_double(r.l2_distance) << ','
       << format_double(r.exact.norm) << ',' << format_double(r.paraxial.norm) << ','
       << format_double(r.exact.rms_radius) << ',' << format_double(r.paraxial.rms_radius) << ','
       << format_double(r.exact.oam_mean) << ',' << format_double(r.paraxial.oam_mean) << '\n';
}

inline constexpr const char* observables_header =
    "z,norm,centroid_x,centroid_y,rms_radius,oam_mean,lost_norm,truncation_residual";

// ---- JSON ---------------------------------------------------------------

inline nlohmann::json to_json(const PhysicalContext& c) {
  return {{"mass", c.mass},       {"energy", c.energy},
          {"charge", c.charge},   {"b_field", c.b_field},
          {"spin", std::string(to_string(c.spin))}, {"s_z", c.s_z.value()}};
}

inline PhysicalContext context_from_json(const nlohmann::json& j) {
  return make_context(j.at("mass").get<double>(), j.at("energy").get<double>(),
                      j.value("charge", 0.0), j.value("b_field", 0.0),
                      spin_tag_from_string(j.at("spin").get<std::string>()),
                      SpinProjection::from_double(j.value("s_z", 0.0)));
}

inline nlohmann::json to_json(const TransverseGrid& g) {
  return {{"nx", g.nx()}, {"ny", g.ny()}, {"dx", g.dx()}, {"dy", g.dy()}};
}

inline TransverseGrid grid_from_json(const nlohmann::json& j) {
  return TransverseGrid(j.at("nx").get<std::size_t>(), j.at("ny").get<std::size_t>(),
                        j.at("dx").get<double>(), j.at("dy").get<double>());
}

/// Writes through a temporary file and renames it into place.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!os) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace xbeam::io
