// jpa-forge: command-line front end for the JPA design toolkit.
//
//   jpa-forge --config amp.toml --out-dir out gain
//   jpa-forge --config amp.toml transformer --fmin 0.1 --fmax 80 --points 2001
//   jpa-forge noise-fit data.csv --freq-ghz 6.35
//   jpa-forge --config amp.toml --seed 7 optimize
//   jpa-forge --config amp.toml sweep
//
// Exit codes: 0 ok, 2 config/usage, 3 numeric, 4 degenerate fit,
// 5 infeasible optimization.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "jpaforge/error.hpp"
#include "jpaforge/gain.hpp"
#include "jpaforge/io/report.hpp"
#include "jpaforge/io/run_config.hpp"
#include "jpaforge/network.hpp"
#include "jpaforge/noise.hpp"
#include "jpaforge/optimizer.hpp"

#ifndef JPA_FORGE_VERSION
#define JPA_FORGE_VERSION "unknown"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace jpaforge;

namespace {

enum ExitCode : int { ok = 0, usage = 2, numeric = 3, degenerate = 4, infeasible = 5 };

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::usage:
    case ErrorKind::domain:
      return usage;
    case ErrorKind::degenerate_fit:
      return degenerate;
    case ErrorKind::infeasible:
      return infeasible;
    default:
      return numeric;
  }
}

// --- logging ---------------------------------------------------------------

enum class LogLevel { quiet, error, warn, info, debug };

LogLevel log_level() {
  const char* env = std::getenv("JPA_FORGE_LOG");
  if (!env) return LogLevel::warn;
  const std::string v(env);
  if (v == "quiet" || v == "off") return LogLevel::quiet;
  if (v == "error") return LogLevel::error;
  if (v == "info") return LogLevel::info;
  if (v == "debug") return LogLevel::debug;
  return LogLevel::warn;
}

void log(LogLevel level, const std::string& msg) {
  static const LogLevel threshold = log_level();
  if (level > threshold) return;
  static constexpr const char* names[] = {"", "error", "warn", "info", "debug"};
  std::cerr << "jpa-forge: " << names[static_cast<int>(level)] << ": " << msg << '\n';
}

// --- shared state ----------------------------------------------------------

struct Globals {
  std::string config_path;
  std::string out_dir = ".";
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  std::uint64_t seed = default_seed;
  std::string format = "json";
};

class Report {
 public:
  Report(std::string command, const Globals& g) : start_(std::chrono::steady_clock::now()), g_(g) {
    doc_["schema"] = io::schema_version;
    doc_["tool"] = "jpa-forge";
    doc_["version"] = JPA_FORGE_VERSION;
    doc_["command"] = std::move(command);
    doc_["errors"] = json::array();
    doc_["warnings"] = json::array();
  }

  json& operator[](const char* key) { return doc_[key]; }
  void warn(const std::string& w) {
    log(LogLevel::warn, w);
    doc_["warnings"].push_back(w);
  }
  void warn_all(const std::vector<std::string>& ws) {
    for (const auto& w : ws) warn(w);
  }
  void error(const std::string& e) { doc_["errors"].push_back(e); }

  void write(const std::string& name) {
    doc_["duration_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    const std::string text = doc_.dump(2) + '\n';
    io::write_text_file((fs::path(g_.out_dir) / name).string(), text);
    if (g_.format == "json") std::cout << text;
    log(LogLevel::info, "wrote " + (fs::path(g_.out_dir) / name).string());
  }

 private:
  json doc_;
  std::chrono::steady_clock::time_point start_;
  const Globals& g_;
};

void write_csv(const Globals& g, const std::string& name, const std::string& text) {
  io::write_text_file((fs::path(g.out_dir) / name).string(), text);
  if (g.format == "csv") std::cout << text;
  log(LogLevel::info, "wrote " + (fs::path(g.out_dir) / name).string());
}

io::RunConfig load_config(const Globals& g) {
  if (g.config_path.empty()) fail(ErrorKind::usage, "this subcommand needs --config");
  return io::RunConfig::from_file(g.config_path);
}

// --- transformer -----------------------------------------------------------

struct TransformerArgs {
  std::optional<double> fmin_ghz, fmax_ghz;
  std::optional<std::size_t> points;
};

int cmd_transformer(const Globals& g, const TransformerArgs& a) {
  const auto cfg = load_config(g);
  const auto spec = cfg.transformer();
  Report report("transformer", g);
  report["config"] = cfg.resolved();

  const double fc_ghz = spec.cutoff().in_ghz();
  const auto file_grid = cfg.sweep_grid_if_present();
  const double fmin = a.fmin_ghz.value_or(file_grid ? file_grid->f_min_ghz : fc_ghz / 100.0);
  const double fmax = a.fmax_ghz.value_or(file_grid ? file_grid->f_max_ghz : 0.99 * fc_ghz);
  const std::size_t points = a.points.value_or(file_grid ? file_grid->points : 500);
  const auto grid = io::GridSpec{fmin, fmax, points}.grid();

  const auto pts = transformation_ratio(spec, grid);
  write_csv(g, "transformer.csv", io::transformer_csv(pts));

  std::size_t poles = 0;
  for (const auto& p : pts) {
    if (!p.ok()) {
      ++poles;
      report.warn("pole at " + io::format_double(p.omega.in_hz()) + " Hz: " + p.error);
    }
  }
  const complex z_low = ruthroff_impedance(spec, ElectricalAngle{1e-4});
  report["summary"] = {
      {"cutoff_frequency_hz", spec.cutoff().in_hz()},
      {"low_frequency_ratio", spec.z_high() / z_low.real()},
      {"low_frequency_z_ext_ohm", z_low.real()},
      {"points", pts.size()},
      {"pole_rows", poles},
  };
  report.write("transformer.json");
  return poles == pts.size() ? numeric : ok;
}

// --- gain ------------------------------------------------------------------

int cmd_gain(const Globals& g) {
  const auto cfg = load_config(g);
  const auto amp = cfg.amplifier();
  const auto grid = cfg.sweep_grid().grid();
  const auto ms = cfg.metrics();
  Report report("gain", g);
  report["config"] = cfg.resolved();

  const auto curve = gain_sweep(amp, grid, g.jobs);
  write_csv(g, "gain.csv", io::gain_csv(curve));
  for (const auto& p : curve.points) {
    if (!p.ok()) report.error(io::format_double(p.omega.in_hz()) + " Hz: " + p.message);
  }
  if (curve.valid_count() == 0) {
    report.write("gain.json");
    log(LogLevel::error, "no valid gain points");
    return numeric;
  }
  const auto m = gain_metrics(curve, ms.level_db, ms.band);
  report.warn_all(m.warnings);
  report["metrics"] = io::to_json(m);
  report.write("gain.json");
  return ok;
}

// --- noise-fit -------------------------------------------------------------

struct NoiseArgs {
  std::string datafile;
  std::optional<double> freq_ghz;
  std::optional<double> psd_scale;
};

int cmd_noise_fit(const Globals& g, const NoiseArgs& a) {
  std::optional<double> freq = a.freq_ghz;
  double scale = 1.0;
  json sidecar_echo;
  const fs::path sidecar = fs::path(a.datafile).replace_extension(".json");
  if (fs::exists(sidecar)) {
    json side;
    try {
      side = json::parse(io::read_text_file(sidecar.string()));
    } catch (const json::exception& e) {
      fail(ErrorKind::usage, "sidecar " + sidecar.string() + ": " + e.what());
    }
    for (const auto& [k, v] : side.items()) {
      if (k != "freq_ghz" && k != "psd_scale") fail(ErrorKind::usage, "unknown sidecar key '" + k + "'");
      if (!v.is_number()) fail(ErrorKind::usage, "sidecar key '" + k + "' must be a number");
    }
    if (!freq && side.contains("freq_ghz")) freq = side["freq_ghz"].get<double>();
    if (side.contains("psd_scale")) scale = side["psd_scale"].get<double>();
    sidecar_echo = side;
  }
  if (a.psd_scale) scale = *a.psd_scale;
  if (!freq) fail(ErrorKind::usage, "noise-fit needs --freq-ghz or a sidecar JSON with freq_ghz");
  if (!(*freq > 0.0)) fail(ErrorKind::usage, "--freq-ghz must be positive");
  if (!(scale > 0.0)) fail(ErrorKind::usage, "--psd-scale must be positive");

  const Frequency omega = Frequency::ghz(*freq);
  const auto data = io::read_noise_csv(io::read_text_file(a.datafile), omega, scale);
  Report report("noise-fit", g);
  report["input"] = {{"datafile", fs::path(a.datafile).filename().string()},
                     {"freq_ghz", *freq},
                     {"psd_scale", scale},
                     {"samples", data.samples.size()}};
  const auto r = fit_noise(data);
  report.warn_all(r.warnings);
  report["result"] = io::to_json(r, omega);
  report.write("noise_fit.json");
  return ok;
}

// --- optimize --------------------------------------------------------------

json parameter_values(const ParameterSpace& space, const std::vector<double>& values) {
  json j = json::object();
  for (std::size_t i = 0; i < space.size(); ++i) {
    const auto& pk = io::parameter_key(space.bounds[i].parameter);
    j[std::string(pk.key)] = values[i] / pk.to_si;
  }
  return j;
}

json evaluation_json(const ParameterSpace& space, const Evaluation& ev) {
  json j;
  j["parameters"] = parameter_values(space, ev.values);
  j["feasible"] = ev.feasible;
  j["score_hz"] = ev.score;
  j["violation"] = ev.violation;
  j["violation_reason"] = ev.violation_reason;
  j["metrics"] = ev.metrics ? io::to_json(*ev.metrics) : json(nullptr);
  return j;
}

std::string trace_csv(const ParameterSpace& space, const std::vector<Evaluation>& trace) {
  std::string out = "evaluation";
  for (const auto& b : space.bounds) out += "," + std::string(io::parameter_key(b.parameter).key);
  out += ",feasible,score_hz,violation,peak_gain_db,ripple_db\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& ev = trace[i];
    out += std::to_string(i);
    for (std::size_t k = 0; k < space.size(); ++k) {
      out += ',' + io::format_double(ev.values[k] / io::parameter_key(space.bounds[k].parameter).to_si);
    }
    out += ev.feasible ? ",1," : ",0,";
    out += io::format_double(ev.score) + ',' + io::format_double(ev.violation) + ',';
    if (ev.metrics) {
      out += io::format_double(ev.metrics->peak_gain_db) + ',' + io::format_double(ev.metrics->ripple_db);
    } else {
      out += ',';
    }
    out += '\n';
  }
  return out;
}

int cmd_optimize(const Globals& g) {
  const auto cfg = load_config(g);
  const auto amp = cfg.amplifier();
  const auto spec = cfg.optimize();
  Objective obj;
  obj.target_gain_db = spec.target_gain_db;
  obj.band = spec.band;
  obj.ripple_limit_db = spec.ripple_limit_db;
  obj.grid = cfg.sweep_grid().grid();
  obj.jobs = g.jobs;

  Report report("optimize", g);
  report["config"] = cfg.resolved();
  report["seed"] = g.seed;

  const auto r = optimize(amp, spec.space, obj, spec.budget, g.seed);
  write_csv(g, "optimize_trace.csv", trace_csv(spec.space, r.trace));

  report["feasible"] = r.feasible;
  report["evaluations"] = r.trace.size();
  report["best"] = evaluation_json(spec.space, r.best);
  report["trace_file"] = "optimize_trace.csv";
  if (r.best.metrics) report.warn_all(r.best.metrics->warnings);
  if (!r.feasible) report.error("no feasible design found: " + r.best.violation_reason);
  report.write("optimize.json");
  if (!r.feasible) {
    log(LogLevel::error, "infeasible: best violation " + io::format_double(r.best.violation) + " (" +
                             r.best.violation_reason + ")");
    return infeasible;
  }
  return ok;
}

// --- sweep -----------------------------------------------------------------

int cmd_sweep(const Globals& g) {
  const auto cfg = load_config(g);
  const auto amp = cfg.amplifier();
  const auto ps = cfg.parameter_sweep();
  const auto ms = cfg.metrics();
  SweepSettings settings;
  settings.grid = cfg.sweep_grid().grid();
  settings.level_db = ms.level_db;
  settings.band = ms.band;
  settings.jobs = g.jobs;

  Report report("sweep", g);
  report["config"] = cfg.resolved();
  const auto rows = sweep(amp, ps.parameter, ps.values_si, settings);

  std::string csv = ps.key +
                    ",peak_gain_db,peak_freq_hz,level_db,bandwidth_at_level_hz,bandwidth_3db_hz,gbw_hz,ripple_db,"
                    "profile_class,error\n";
  json jrows = json::array();
  std::size_t failures = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    csv += io::format_double(ps.values_file[i]);
    json jr;
    jr[ps.key] = ps.values_file[i];
    if (row.metrics) {
      const auto& m = *row.metrics;
      csv += ',' + io::format_double(m.peak_gain_db) + ',' + io::format_double(m.peak_frequency.in_hz()) + ',' +
             io::format_double(m.level_db) + ',' + io::format_double(m.bandwidth_at_level_hz) + ',' +
             io::format_double(m.bandwidth_3db_hz) + ',' + io::format_double(m.gbw_product_hz) + ',' +
             io::format_double(m.ripple_db) + ',' + (m.profile ? std::string(to_string(*m.profile)) : "") + ",\n";
      jr["metrics"] = io::to_json(m);
    } else {
      ++failures;
      csv += ",,,,,,,,," + std::string(to_string(*row.error)) + '\n';
      jr["error"] = row.message;
      report.error(ps.key + " = " + io::format_double(ps.values_file[i]) + ": " + row.message);
    }
    jrows.push_back(std::move(jr));
  }
  write_csv(g, "sweep.csv", csv);
  report["parameter"] = ps.key;
  report["rows"] = std::move(jrows);
  report.write("sweep.json");
  return failures == rows.size() ? numeric : ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Josephson parametric amplifier design toolkit", "jpa-forge"};
  app.set_version_flag("--version", std::string(JPA_FORGE_VERSION));
  app.require_subcommand(1);

  Globals g;
  app.add_option("--config", g.config_path, "run configuration (TOML)");
  app.add_option("--out-dir", g.out_dir, "directory for CSV/JSON output")->capture_default_str();
  app.add_option("--jobs", g.jobs, "worker threads for frequency sweeps")->check(CLI::PositiveNumber);
  app.add_option("--seed", g.seed, "optimizer seed")->capture_default_str();
  app.add_option("--format", g.format, "what to echo on stdout")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();

  TransformerArgs targs;
  auto* transformer = app.add_subcommand("transformer", "Ruthroff transformer impedance and ratio sweep");
  transformer->add_option("--fmin", targs.fmin_ghz, "lowest frequency, GHz");
  transformer->add_option("--fmax", targs.fmax_ghz, "highest frequency, GHz");
  transformer->add_option("--points", targs.points, "grid points")->check(CLI::PositiveNumber);

  auto* gain = app.add_subcommand("gain", "reflection gain sweep and metrics");

  NoiseArgs nargs;
  auto* noise = app.add_subcommand("noise-fit", "fit gain and system noise temperature to a noise dataset");
  noise->add_option("datafile", nargs.datafile, "CSV with temperature_K,psd_K[,weight]")->required();
  noise->add_option("--freq-ghz", nargs.freq_ghz, "measurement frequency, GHz");
  noise->add_option("--psd-scale", nargs.psd_scale, "factor applied to psd_K");

  auto* opt = app.add_subcommand("optimize", "bounded design optimization");
  auto* sw = app.add_subcommand("sweep", "gain metrics across a parameter sweep");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? ok : usage;
  }

  try {
    if (!fs::exists(g.out_dir)) fs::create_directories(g.out_dir);
    if (*transformer) return cmd_transformer(g, targs);
    if (*gain) return cmd_gain(g);
    if (*noise) return cmd_noise_fit(g, nargs);
    if (*opt) return cmd_optimize(g);
    if (*sw) return cmd_sweep(g);
  } catch (const Error& e) {
    log(LogLevel::error, std::string(to_string(e.kind())) + ": " + e.what());
    return exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    log(LogLevel::error, e.what());
    return usage;
  } catch (const std::exception& e) {
    log(LogLevel::error, e.what());
    return numeric;
  }
  return usage;
}
