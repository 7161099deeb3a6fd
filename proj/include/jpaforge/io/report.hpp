#pragma once

// CSV and JSON serialization of curves, metrics and fit results, and the
// noise-dataset CSV reader.

#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "jpaforge/error.hpp"
#include "jpaforge/gain.hpp"
#include "jpaforge/noise.hpp"
#include "jpaforge/optimizer.hpp"

namespace jpaforge::io {

inline constexpr int schema_version = 1;

/// Shortest text that reads back to exactly `v`.
inline std::string format_double(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline nlohmann::json to_json(const GainMetrics& m) {
  nlohmann::json j;
  j["peak_gain_db"] = m.peak_gain_db;
  j["peak_frequency_hz"] = m.peak_frequency.in_hz();
  j["level_db"] = m.level_db;
  j["bandwidth_at_level_hz"] = m.bandwidth_at_level_hz;
  j["bandwidth_3db_hz"] = m.bandwidth_3db_hz;
  j["gbw_product_hz"] = m.gbw_product_hz;
  j["ripple_db"] = m.ripple_db;
  j["profile_class"] = m.profile ? nlohmann::json(std::string(to_string(*m.profile))) : nlohmann::json(nullptr);
  j["warnings"] = m.warnings;
  return j;
}

inline nlohmann::json to_json(const NoiseFitResult& r, Frequency omega) {
  nlohmann::json j;
  j["frequency_hz"] = omega.in_hz();
  j["gain"] = r.gain;
  j["gain_db"] = 10.0 * std::log10(r.gain);
  j["gain_stderr"] = r.gain_stderr;
  j["t_sys_k"] = r.t_sys;
  j["t_sys_unconstrained_k"] = r.t_sys_unconstrained;
  j["t_sys_stderr_k"] = r.t_sys_stderr;
  j["t_sys_clamped"] = r.t_sys_clamped;
  j["n_add"] = r.n_add;
  j["t_sql_k"] = sql_temperature(omega);
  j["residual_rms_k"] = r.residual_rms;
  j["warnings"] = r.warnings;
  return j;
}

/// `freq_hz,gain_db,re_g,im_g`; failed points keep their frequency and
/// leave the value columns empty, with the reason in a trailing column.
inline std::string gain_csv(const GainCurve& curve) {
  std::string out = "freq_hz,gain_db,re_g,im_g,error\n";
  for (const auto& p : curve.points) {
    out += format_double(p.omega.in_hz());
    if (p.ok()) {
      out += ',' + format_double(p.gain_db) + ',' + format_double(p.g->real()) + ',' + format_double(p.g->imag()) + ",\n";
    } else {
      out += ",,,," + std::string(to_string(*p.error)) + '\n';
    }
  }
  return out;
}

/// Inverse of gain_csv(); used to recompute metrics from a written curve.
inline GainCurve read_gain_csv(std::string_view text) {
  GainCurve curve;
  std::istringstream in{std::string(text)};
  std::string line;
  std::getline(in, line);
  if (line.rfind("freq_hz,gain_db,re_g,im_g", 0) != 0) fail(ErrorKind::usage, "not a gain CSV");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ',')) cols.push_back(c);
    GainPoint p;
    p.omega = Frequency::hz(std::stod(cols.at(0)));
    if (cols.size() >= 4 && !cols[1].empty()) {
      p.gain_db = std::stod(cols[1]);
      p.g = complex{std::stod(cols[2]), std::stod(cols[3])};
    } else {
      p.error = ErrorKind::oscillation_threshold;
    }
    curve.points.push_back(std::move(p));
  }
  return curve;
}

/// `freq_hz,re_zext_ohm,im_zext_ohm,ratio_mag,ratio_re`; pole rows carry the
/// frequency only.
inline std::string transformer_csv(const std::vector<TransformerPoint>& pts) {
  std::string out = "freq_hz,re_zext_ohm,im_zext_ohm,ratio_mag,ratio_re\n";
  for (const auto& p : pts) {
    out += format_double(p.omega.in_hz());
    if (p.ok()) {
      out += ',' + format_double(p.z_ext->real()) + ',' + format_double(p.z_ext->imag()) + ',' +
             format_double(p.ratio_mag) + ',' + format_double(p.ratio_re) + '\n';
    } else {
      out += ",,,,\n";
    }
  }
  return out;
}

namespace detail {

inline double parse_field(const std::string& s, std::size_t line, std::string_view column) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  while (b < e && (*b == ' ' || *b == '\t')) ++b;
  while (e > b && (e[-1] == ' ' || e[-1] == '\t' || e[-1] == '\r')) --e;
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e || b == e) {
    fail(ErrorKind::usage, "line " + std::to_string(line) + ": malformed " + std::string(column) + " value '" + s + "'");
  }
  return v;
}

}  // namespace detail

/// Reads a `temperature_K,psd_K[,weight]` CSV. PSD values are multiplied by
/// `psd_scale` to bring raw spectra to input-referred kelvin.
inline NoiseDataset read_noise_csv(std::string_view text, Frequency omega, double psd_scale = 1.0) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::usage, "noise CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  bool weighted = false;
  if (line == "temperature_K,psd_K") {
    weighted = false;
  } else if (line == "temperature_K,psd_K,weight") {
    weighted = true;
  } else {
    fail(ErrorKind::usage, "noise CSV header must be 'temperature_K,psd_K' or 'temperature_K,psd_K,weight', got '" +
                               line + "'");
  }
  NoiseDataset data{omega, {}};
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ',')) cols.push_back(c);
    const std::size_t expected = weighted ? 3 : 2;
    if (cols.size() != expected) {
      fail(ErrorKind::usage, "line " + std::to_string(lineno) + ": expected " + std::to_string(expected) + " columns");
    }
    NoiseSample s{detail::parse_field(cols[0], lineno, "temperature_K"),
                  detail::parse_field(cols[1], lineno, "psd_K") * psd_scale, 1.0};
    if (weighted) s.weight = detail::parse_field(cols[2], lineno, "weight");
    data.samples.push_back(s);
  }
  return data;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::usage, "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::usage, "cannot write '" + path + "'");
  out << text;
}

}  // namespace jpaforge::io
