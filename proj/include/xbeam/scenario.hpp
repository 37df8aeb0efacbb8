#pragma once

/// \file
/// Batch scenario runner behind the `xbeam` command-line tool.
///
/// A config is a JSON document:
///
///   { "units": "natural",
///     "scenarios": [ { "name": ..., "kind": ..., "context": {...}, ... }, ... ] }
///
/// kinds:
///   dispersion_table  kappa_min, kappa_max, steps            -> <name>.csv
///   landau_spectrum   n_max, l_min, l_max, [oracle{r_max, n_points}]
///                                                            -> <name>.csv, [<name>_oracle.csv]
///   propagate         grid, mode, variant, z_samples, [snapshots], [basis]
///                                                            -> <name>.csv, <name>_<i>.xbeam
///   compare           grid, mode, z_max, samples | z_samples, [basis]
///                                                            -> <name>.csv
///
/// The context block holds mass, energy, charge, b_field, spin and s_z.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "xbeam/core.hpp"
#include "xbeam/dispersion.hpp"
#include "xbeam/io.hpp"
#include "xbeam/modes.hpp"
#include "xbeam/oracle.hpp"
#include "xbeam/propagation.hpp"

namespace xbeam::scenario {

using nlohmann::json;

inline const std::vector<std::string>& scenario_kinds() {
  static const std::vector<std::string> kinds{"dispersion_table", "propagate", "compare",
                                              "landau_spectrum"};
  return kinds;
}

struct Diagnostic {
  std::string where;  // "line 3" or "scenarios[1].context.energy"
  std::string message;
};

inline std::string to_string(const Diagnostic& d) { return d.where + ": " + d.message; }

namespace detail {

inline std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? ", " : "") + items[i];
  return out;
}

/// Collects violations for one config without stopping at the first.
class Checker {
 public:
  std::vector<Diagnostic> diagnostics;

  void fail(const std::string& where, const std::string& message) { diagnostics.push_back({where, message}); }

  bool number(const json& obj, const std::string& key, const std::string& where, bool required = true) {
    if (!obj.contains(key)) {
      if (required) fail(where + "." + key, "missing required number");
      return false;
    }
    if (!obj.at(key).is_number()) {
      fail(where + "." + key, "must be a number");
      return false;
    }
    return true;
  }

  bool integer(const json& obj, const std::string& key, const std::string& where, bool required = true) {
    if (!obj.contains(key)) {
      if (required) fail(where + "." + key, "missing required integer");
      return false;
    }
    if (!obj.at(key).is_number_integer()) {
      fail(where + "." + key, "must be an integer");
      return false;
    }
    return true;
  }

  bool object(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key)) {
      fail(where + "." + key, "missing required block");
      return false;
    }
    if (!obj.at(key).is_object()) {
      fail(where + "." + key, "must be an object");
      return false;
    }
    return true;
  }

  bool number_array(const json& obj, const std::string& key, const std::string& where, bool required) {
    if (!obj.contains(key)) {
      if (required) fail(where + "." + key, "missing required array of numbers");
      return false;
    }
    const auto& a = obj.at(key);
    if (!a.is_array() || !std::all_of(a.begin(), a.end(), [](const json& v) { return v.is_number(); })) {
      fail(where + "." + key, "must be an array of numbers");
      return false;
    }
    return true;
  }

  /// Returns true when the context block is valid; `magnetic` reports charge*b_field != 0.
  bool context(const json& s, const std::string& where, bool* magnetic) {
    if (!object(s, "context", where)) return false;
    const auto& c = s.at("context");
    const std::string w = where + ".context";
    bool ok = number(c, "mass", w) & number(c, "energy", w);
    ok &= number(c, "charge", w, false) | !c.contains("charge");
    ok &= number(c, "b_field", w, false) | !c.contains("b_field");
    ok &= number(c, "s_z", w, false) | !c.contains("s_z");
    if (!c.contains("spin") || !c.at("spin").is_string()) {
      fail(w + ".spin", "missing spin tag (allowed: spinless, spin-1/2, spin-1, photon)");
      ok = false;
    }
    if (!ok) return false;
    const double mass = c.at("mass").get<double>(), energy = c.at("energy").get<double>();
    if (!(energy > mass)) {
      fail(w + ".energy", "energy (" + io::format_double(energy) + ") must exceed mass (" +
                              io::format_double(mass) + "): no propagating carrier");
      return false;
    }
    try {
      const auto ctx = io::context_from_json(c);
      if (magnetic) *magnetic = ctx.magnetic();
    } catch (const std::exception& e) {
      fail(w, e.what());
      return false;
    }
    return true;
  }

  bool grid(const json& s, const std::string& where) {
    if (!object(s, "grid", where)) return false;
    const auto& g = s.at("grid");
    const std::string w = where + ".grid";
    bool ok = integer(g, "nx", w) & integer(g, "ny", w) & number(g, "dx", w) & number(g, "dy", w);
    if (!ok) return false;
    for (const char* key : {"nx", "ny"}) {
      const auto v = g.at(key).get<long long>();
      if (v <= 0 || !is_power_of_two(static_cast<std::size_t>(v))) {
        fail(w + "." + key, "must be a positive power of two");
        ok = false;
      }
    }
    for (const char* key : {"dx", "dy"})
      if (!(g.at(key).get<double>() > 0.0)) {
        fail(w + "." + key, "must be > 0");
        ok = false;
      }
    return ok;
  }

  void mode(const json& s, const std::string& where, bool magnetic_context) {
    if (!object(s, "mode", where)) return;
    const auto& m = s.at("mode");
    const std::string w = where + ".mode";
    if (!m.contains("family") || !m.at("family").is_string()) {
      fail(w + ".family", "missing mode family (allowed: " + std::string(modes::family_names) + ")");
      return;
    }
    const auto family = m.at("family").get<std::string>();
    modes::ModeFamily f;
    try {
      f = modes::family_from_string(family);
    } catch (const std::exception&) {
      fail(w + ".family", "unknown mode family '" + family + "' (allowed: " +
                              std::string(modes::family_names) + ")");
      return;
    }
    for (const char* key : {"p", "l", "m", "n", "aperture_order"}) integer(m, key, w, false);
    for (const char* key : {"center_x", "center_y"}) number(m, key, w, false);
    switch (f) {
      case modes::ModeFamily::gaussian:
      case modes::ModeFamily::laguerre_gauss:
      case modes::ModeFamily::hermite_gauss:
        if (number(m, "waist", w) && !(m.at("waist").get<double>() > 0.0)) fail(w + ".waist", "must be > 0");
        break;
      case modes::ModeFamily::bessel:
        if (number(m, "kappa0", w) && !(m.at("kappa0").get<double>() > 0.0)) fail(w + ".kappa0", "must be > 0");
        if (number(m, "aperture_radius", w) && !(m.at("aperture_radius").get<double>() > 0.0))
          fail(w + ".aperture_radius", "must be > 0");
        break;
      case modes::ModeFamily::landau:
        if (!magnetic_context) fail(w + ".family", "landau modes need charge * b_field != 0");
        break;
    }
    for (const char* key : {"p", "m", "n"})
      if (m.contains(key) && m.at(key).is_number_integer() && m.at(key).get<int>() < 0)
        fail(w + "." + key, "must be >= 0");
  }

  void basis(const json& s, const std::string& where) {
    if (!s.contains("basis")) return;
    if (!s.at("basis").is_object()) {
      fail(where + ".basis", "must be an object");
      return;
    }
    const auto& b = s.at("basis");
    const std::string w = where + ".basis";
    integer(b, "n_max", w, false);
    integer(b, "l_min", w, false);
    integer(b, "l_max", w, false);
    number(b, "tolerance", w, false);
    if (b.contains("n_max") && b.at("n_max").is_number_integer() && b.at("n_max").get<int>() < 0)
      fail(w + ".n_max", "must be >= 0");
  }
};

inline std::string location_of(const std::string& text, std::size_t byte) {
  const std::size_t end = std::min(byte, text.size());
  const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(end), '\n');
  return "line " + std::to_string(line);
}

}  // namespace detail

/// Schema check of a parsed config; every violation is listed.
inline std::vector<Diagnostic> validate_config(const json& cfg) {
  detail::Checker ck;
  if (!cfg.is_object()) {
    ck.fail("config", "top level must be an object with keys units, scenarios");
    return ck.diagnostics;
  }
  if (!cfg.contains("units") || cfg.at("units") != "natural")
    ck.fail("units", "must be \"natural\"");
  if (!cfg.contains("scenarios") || !cfg.at("scenarios").is_array()) {
    ck.fail("scenarios", "must be an array");
    return ck.diagnostics;
  }
  std::set<std::string> names;
  const auto& list = cfg.at("scenarios");
  for (std::size_t i = 0; i < list.size(); ++i) {
    const auto& s = list[i];
    std::string where = "scenarios[" + std::to_string(i) + "]";
    if (!s.is_object()) {
      ck.fail(where, "scenario must be an object");
      continue;
    }
    if (!s.contains("name") || !s.at("name").is_string() || s.at("name").get<std::string>().empty()) {
      ck.fail(where + ".name", "missing scenario name");
    } else {
      const auto name = s.at("name").get<std::string>();
      where += " (" + name + ")";
      if (name.find_first_of("/\\") != std::string::npos || name == "." || name == "..")
        ck.fail(where + ".name", "must be usable as a file name");
      if (!names.insert(name).second) ck.fail(where + ".name", "duplicate scenario name");
    }
    const auto& kinds = scenario_kinds();
    const std::string kind = s.contains("kind") && s.at("kind").is_string() ? s.at("kind").get<std::string>() : "";
    if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end()) {
      ck.fail(where + ".kind", "unknown kind '" + kind + "' (allowed: " + detail::join(kinds) + ")");
      continue;
    }
    bool magnetic = false;
    const bool ctx_ok = ck.context(s, where, &magnetic);

    if (kind == "dispersion_table") {
      const bool ok = ck.number(s, "kappa_min", where) & ck.number(s, "kappa_max", where) &
                      ck.integer(s, "steps", where);
      if (ok) {
        if (s.at("steps").get<long long>() < 1) ck.fail(where + ".steps", "must be >= 1");
        if (s.at("kappa_min").get<double>() < 0.0) ck.fail(where + ".kappa_min", "must be >= 0");
        if (s.at("kappa_max").get<double>() < s.at("kappa_min").get<double>())
          ck.fail(where + ".kappa_max", "must be >= kappa_min");
      }
    } else if (kind == "landau_spectrum") {
      const bool ok = ck.integer(s, "n_max", where) & ck.integer(s, "l_min", where) & ck.integer(s, "l_max", where);
      if (ok) {
        if (s.at("n_max").get<int>() < 0) ck.fail(where + ".n_max", "must be >= 0");
        if (s.at("l_min").get<int>() > s.at("l_max").get<int>()) ck.fail(where + ".l_max", "must be >= l_min");
      }
      if (ctx_ok && !magnetic) ck.fail(where + ".context", "landau_spectrum needs charge * b_field != 0");
      if (s.contains("oracle")) {
        if (!s.at("oracle").is_object()) {
          ck.fail(where + ".oracle", "must be an object");
        } else {
          const auto& o = s.at("oracle");
          if (ck.number(o, "r_max", where + ".oracle") && !(o.at("r_max").get<double>() > 0.0))
            ck.fail(where + ".oracle.r_max", "must be > 0");
          if (ck.integer(o, "n_points", where + ".oracle") &&
              o.at("n_points").get<long long>() < oracle::min_radial_points)
            ck.fail(where + ".oracle.n_points", "must be >= 512");
        }
      }
    } else {
      ck.grid(s, where);
      ck.mode(s, where, magnetic);
      ck.basis(s, where);
      if (kind == "propagate") {
        if (!s.contains("variant") || !s.at("variant").is_string() ||
            (s.at("variant") != "exact" && s.at("variant") != "paraxial"))
          ck.fail(where + ".variant", "must be \"exact\" or \"paraxial\"");
        ck.number_array(s, "z_samples", where, true);
        ck.number_array(s, "snapshots", where, false);
      } else {
        const bool explicit_z = ck.number_array(s, "z_samples", where, false);
        if (!explicit_z) {
          const bool ok = ck.number(s, "z_max", where) & ck.integer(s, "samples", where);
          if (ok && s.at("samples").get<long long>() < 1) ck.fail(where + ".samples", "must be >= 1");
        }
      }
    }
  }
  return ck.diagnostics;
}

/// Parses and validates a config file; parse errors carry a line number.
inline std::vector<Diagnostic> validate_file(const std::filesystem::path& path, json* parsed = nullptr) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  json cfg;
  try {
    cfg = json::parse(text);
  } catch (const json::parse_error& e) {
    return {{detail::location_of(text, e.byte), e.what()}};
  }
  auto diags = validate_config(cfg);
  if (parsed) *parsed = std::move(cfg);
  return diags;
}

struct ScenarioResult {
  std::string name;
  std::string kind;
  bool ok = false;
  std::string summary;  // key observables, or the error message
  std::vector<std::string> outputs;
};

namespace detail {

inline modes::ModeRequest mode_from_json(const json& m) {
  modes::ModeRequest r;
  r.family = modes::family_from_string(m.at("family").get<std::string>());
  r.waist = m.value("waist", 1.0);
  r.p = m.value("p", 0);
  r.l = m.value("l", 0);
  r.m = m.value("m", 0);
  r.n = m.value("n", 0);
  r.kappa0 = m.value("kappa0", 0.0);
  r.aperture_radius = m.value("aperture_radius", 0.0);
  r.aperture_order = m.value("aperture_order", 8);
  r.center_x = m.value("center_x", 0.0);
  r.center_y = m.value("center_y", 0.0);
  return r;
}

inline propagation::LandauBasis basis_from_json(const json& s) {
  propagation::LandauBasis b;
  if (!s.contains("basis")) return b;
  const auto& j = s.at("basis");
  b.n_max = j.value("n_max", b.n_max);
  b.l_min = j.value("l_min", b.l_min);
  b.l_max = j.value("l_max", b.l_max);
  b.tolerance = j.value("tolerance", b.tolerance);
  return b;
}

inline std::string fmt(double v, int digits = 6) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

inline void emit(const std::filesystem::path& dir, const std::string& file, const std::string& bytes,
                 ScenarioResult& res) {
  io::write_file_atomic(dir / file, bytes);
  res.outputs.push_back(file);
}

inline void run_dispersion_table(const json& s, const PhysicalContext& ctx,
                                 const std::filesystem::path& out, ScenarioResult& res) {
  const double lo = s.at("kappa_min").get<double>(), hi = s.at("kappa_max").get<double>();
  const int steps = s.at("steps").get<int>();
  std::vector<DispersionRecord> rows;
  double max_rate = 0.0;
  for (int i = 0; i < steps; ++i) {
    const double kappa = steps == 1 ? lo : lo + (hi - lo) * i / (steps - 1);
    rows.push_back(dispersion::free_dispersion_record(kappa, ctx.carrier_k));
    max_rate = std::max(max_rate, rows.back().phase_error_rate);
  }
  std::ostringstream os;
  io::write_dispersion_csv(os, rows);
  emit(out, res.name + ".csv", os.str(), res);
  res.summary = "k=" + fmt(ctx.carrier_k) + " rows=" + std::to_string(rows.size()) +
                " max_phase_error_rate=" + fmt(max_rate);
}

inline void run_landau_spectrum(const json& s, const PhysicalContext& ctx,
                                const std::filesystem::path& out, ScenarioResult& res) {
  const int n_max = s.at("n_max").get<int>(), l_min = s.at("l_min").get<int>(),
            l_max = s.at("l_max").get<int>();
  std::vector<DispersionRecord> rows;
  for (int l = l_min; l <= l_max; ++l)
    for (int n = 0; n <= n_max; ++n)
      rows.push_back(dispersion::magnetic_dispersion_record({n, l, ctx.s_z}, ctx));
  std::ostringstream os;
  io::write_dispersion_csv(os, rows);
  emit(out, res.name + ".csv", os.str(), res);
  res.summary = "w_B=" + fmt(modes::magnetic_waist(ctx)) + " modes=" + std::to_string(rows.size());

  if (s.contains("oracle")) {
    const double r_max = s.at("oracle").at("r_max").get<double>();
    const int n_points = s.at("oracle").at("n_points").get<int>();
    std::ostringstream oc;
    oc << "n,l,lambda_analytic,lambda_fd,abs_diff\n";
    double worst = 0.0;
    for (int l = l_min; l <= l_max; ++l) {
      const auto fd = oracle::fd_landau_spectrum(l, ctx.s_z, ctx, r_max, n_points, n_max + 1);
      for (int n = 0; n <= n_max; ++n) {
        const double a = dispersion::landau_transverse_eigenvalue({n, l, ctx.s_z}, ctx);
        const double d = std::abs(a - fd.eigenvalues[n]);
        worst = std::max(worst, d);
        oc << n << ',' << l << ',' << io::format_double(a) << ',' << io::format_double(fd.eigenvalues[n])
           << ',' << io::format_double(d) << '\n';
      }
    }
    emit(out, res.name + "_oracle.csv", oc.str(), res);
    res.summary += " oracle_max_abs_diff=" + fmt(worst, 3);
  }
}

inline std::vector<double> z_samples_of(const json& s) {
  if (s.contains("z_samples")) return s.at("z_samples").get<std::vector<double>>();
  const double z_max = s.at("z_max").get<double>();
  const int samples = s.at("samples").get<int>();
  std::vector<double> z(samples);
  for (int i = 0; i < samples; ++i) z[i] = samples == 1 ? z_max : z_max * i / (samples - 1);
  return z;
}

inline void run_propagate(const json& s, const PhysicalContext& ctx, const std::filesystem::path& out,
                          ScenarioResult& res) {
  const auto grid = io::grid_from_json(s.at("grid"));
  const auto initial = modes::generate(mode_from_json(s.at("mode")), grid, ctx);
  const auto variant = propagation::variant_from_string(s.at("variant").get<std::string>());
  const auto basis = basis_from_json(s);
  std::optional<propagation::MagneticPropagator> magnetic;
  if (ctx.magnetic()) magnetic.emplace(grid, ctx, basis);
  auto step = [&](double z) {
    return magnetic ? (*magnetic)(initial, z, variant) : propagation::propagate_free(initial, z, variant);
  };

  std::ostringstream os;
  os << io::observables_header << '\n';
  double last_rms = 0.0;
  for (double z : s.at("z_samples").get<std::vector<double>>()) {
    const auto st = step(z);
    const auto o = propagation::observables(st);
    os << io::format_double(z) << ',' << io::format_double(o.norm) << ',' << io::format_double(o.centroid_x)
       << ',' << io::format_double(o.centroid_y) << ',' << io::format_double(o.rms_radius) << ','
       << io::format_double(o.oam_mean) << ',' << io::format_double(st.metadata().lost_norm) << ','
       << io::format_double(st.metadata().truncation_residual) << '\n';
    last_rms = o.rms_radius;
  }
  emit(out, res.name + ".csv", os.str(), res);

  if (s.contains("snapshots")) {
    const auto snaps = s.at("snapshots").get<std::vector<double>>();
    for (std::size_t i = 0; i < snaps.size(); ++i)
      emit(out, res.name + "_" + std::to_string(i) + ".xbeam", io::snapshot_bytes(step(snaps[i])), res);
  }
  res.summary = std::string(propagation::to_string(variant)) + " final_rms=" + fmt(last_rms);
  if (!initial.metadata().warnings.empty()) res.summary += " warning=" + initial.metadata().warnings.front();
}

inline void run_compare(const json& s, const PhysicalContext& ctx, const std::filesystem::path& out,
                        ScenarioResult& res) {
  const auto grid = io::grid_from_json(s.at("grid"));
  const auto initial = modes::generate(mode_from_json(s.at("mode")), grid, ctx);
  const auto report = propagation::compare_variants(initial, z_samples_of(s), basis_from_json(s));
  std::ostringstream os;
  io::write_comparison_csv(os, report);
  emit(out, res.name + ".csv", os.str(), res);
  const auto& last = report.rows.back();
  res.summary = "final_l2=" + fmt(last.l2_distance) + " final_phase_error=" + fmt(last.phase_error);
}

}  // namespace detail

/// Runs one validated scenario, writing its outputs into `out`. Never throws.
inline ScenarioResult run_scenario(const json& s, const std::filesystem::path& out) {
  ScenarioResult res;
  res.name = s.at("name").get<std::string>();
  res.kind = s.at("kind").get<std::string>();
  try {
    const auto ctx = io::context_from_json(s.at("context"));
    if (res.kind == "dispersion_table") detail::run_dispersion_table(s, ctx, out, res);
    else if (res.kind == "landau_spectrum") detail::run_landau_spectrum(s, ctx, out, res);
    else if (res.kind == "propagate") detail::run_propagate(s, ctx, out, res);
    else detail::run_compare(s, ctx, out, res);
    res.ok = true;
  } catch (const std::exception& e) {
    res.ok = false;
    res.summary = e.what();
  }
  return res;
}

/// Runs every scenario of a validated config. Up to `threads` scenarios run
/// at once; results come back in config order and do not depend on `threads`.
inline std::vector<ScenarioResult> run_config(const json& cfg, const std::filesystem::path& out,
                                              unsigned threads = 1) {
  const auto& list = cfg.at("scenarios");
  std::vector<ScenarioResult> results(list.size());
  const std::size_t width = std::max(1u, threads);
  for (std::size_t start = 0; start < list.size(); start += width) {
    const std::size_t stop = std::min(list.size(), start + width);
    if (stop - start == 1) {
      results[start] = run_scenario(list[start], out);
      continue;
    }
    std::vector<std::future<ScenarioResult>> batch;
    for (std::size_t i = start; i < stop; ++i)
      batch.push_back(std::async(std::launch::async, [&list, &out, i] { return run_scenario(list[i], out); }));
    for (std::size_t i = start; i < stop; ++i) results[i] = batch[i - start].get();
  }
  return results;
}

inline void print_summary(std::ostream& os, const std::vector<ScenarioResult>& results) {
  os << results.size() << " scenarios\n";
  std::size_t w = 8;
  for (const auto& r : results) w = std::max(w, r.name.size());
  for (const auto& r : results) {
    os << r.name << std::string(w - r.name.size() + 2, ' ') << r.kind
       << std::string(r.kind.size() < 18 ? 18 - r.kind.size() : 1, ' ') << (r.ok ? "ok    " : "FAILED")
       << "  " << r.summary << '\n';
  }
}

enum ExitCode : int { exit_ok = 0, exit_schema = 1, exit_runtime = 2 };

/// Full `run` command: validate, execute, summarize. Returns the process exit code.
inline int run_command(const std::filesystem::path& config, const std::filesystem::path& out,
                       unsigned threads, std::ostream& os, std::ostream& err) {
  json cfg;
  std::vector<Diagnostic> diags;
  try {
    diags = validate_file(config, &cfg);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_runtime;
  }
  if (!diags.empty()) {
    for (const auto& d : diags) err << config.string() << ": " << to_string(d) << '\n';
    return exit_schema;
  }
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) {
    err << "error: cannot create output directory " << out.string() << ": " << ec.message() << '\n';
    return exit_runtime;
  }
  const auto results = run_config(cfg, out, threads);
  print_summary(os, results);
  int code = exit_ok;
  for (const auto& r : results)
    if (!r.ok) {
      err << "scenario " << r.name << " failed: " << r.summary << '\n';
      code = exit_runtime;
    }
  return code;
}

}  // namespace xbeam::scenario
