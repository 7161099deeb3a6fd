#pragma once

// Run configuration: a TOML-syntax document whose keys carry their units
// (`f_pump_ghz`, `c_shunt_pf`, ...). Unknown sections and keys are rejected
// up front; required keys are checked only when a subcommand asks for the
// part of the configuration that needs them, so each subcommand can run
// from a partial file.

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "jpaforge/error.hpp"
#include "jpaforge/gain.hpp"
#include "jpaforge/io/toml_lite.hpp"
#include "jpaforge/network.hpp"
#include "jpaforge/optimizer.hpp"
#include "jpaforge/pumpistor.hpp"
#include "jpaforge/quantities.hpp"

namespace jpaforge::io {

/// Config-file names of the optimizable parameters and the factor that
/// converts the file's unit to SI.
struct ParameterKey {
  std::string_view key;
  Parameter parameter;
  double to_si;
};

inline constexpr std::array<ParameterKey, 6> parameter_keys{{
    {"z_odd_ohm", Parameter::z_odd, 1.0},
    {"reactance_slope_nh", Parameter::reactance_slope, units::nano},
    {"phi_dc_over_phi0", Parameter::phi_dc, 1.0},
    {"phi_ac_over_phi0", Parameter::phi_ac, 1.0},
    {"f_pump_ghz", Parameter::pump_frequency, constants::two_pi * units::giga},
    {"c_shunt_pf", Parameter::shunt_capacitance, units::pico},
}};

inline const ParameterKey& parameter_key(std::string_view key) {
  for (const auto& k : parameter_keys) {
    if (k.key == key) return k;
  }
  fail(ErrorKind::usage, "unknown optimizable parameter '" + std::string(key) + "'");
}

inline const ParameterKey& parameter_key(Parameter p) {
  for (const auto& k : parameter_keys) {
    if (k.parameter == p) return k;
  }
  fail(ErrorKind::usage, "parameter has no config key");
}

struct GridSpec {
  double f_min_ghz = 0.0;
  double f_max_ghz = 0.0;
  std::size_t points = 0;

  std::vector<Frequency> grid() const {
    if (!(f_min_ghz > 0.0)) fail(ErrorKind::usage, "sweep.f_min_ghz must be positive");
    return linear_grid(Frequency::ghz(f_min_ghz), Frequency::ghz(f_max_ghz), points);
  }
};

struct MetricsSpec {
  std::optional<double> level_db;
  std::optional<FrequencyBand> band;
};

struct OptimizeSpec {
  double target_gain_db = 20.0;
  FrequencyBand band;
  double ripple_limit_db = 1.0;
  std::size_t budget = default_budget;
  ParameterSpace space;
};

struct ParameterSweepSpec {
  std::string key;
  Parameter parameter;
  std::vector<double> values_si;
  std::vector<double> values_file;  // as written, for reporting
};

class RunConfig {
 public:
  explicit RunConfig(nlohmann::json doc) : doc_(std::move(doc)) {
    check_keys();
    fill_defaults();
  }

  static RunConfig from_file(const std::string& path) {
    try {
      return RunConfig(parse_toml_file(path));
    } catch (const TomlError& e) {
      fail(ErrorKind::usage, "config " + path + ": " + e.what());
    } catch (const Error&) {
      throw;
    } catch (const std::runtime_error& e) {
      fail(ErrorKind::usage, e.what());
    }
  }

  static RunConfig from_string(std::string_view text) {
    try {
      return RunConfig(parse_toml(text));
    } catch (const TomlError& e) {
      fail(ErrorKind::usage, std::string("config: ") + e.what());
    }
  }

  /// Parsed document with defaults filled in.
  const nlohmann::json& resolved() const { return doc_; }

  bool has(std::string_view section) const { return doc_.contains(std::string(section)); }

  AmplifierConfig amplifier() const {
    AmplifierConfig c;
    const double c_shunt = number("environment", "c_shunt_pf") * units::pico;
    c.squid = {number("squid", "critical_current_ua") * units::micro, c_shunt};
    c.bias = {number("bias", "phi_dc_over_phi0"), number("bias", "phi_ac_over_phi0"),
              Frequency::ghz(number("bias", "f_pump_ghz"))};
    c.environment.source_impedance = number("environment", "source_ohm");
    c.environment.shunt_capacitance = c_shunt;
    if (has("transformer")) c.environment.elements.emplace_back(RuthroffTransformer{transformer()});
    if (doc_.contains("element")) {
      std::size_t index = 0;
      for (const auto& e : doc_.at("element")) c.environment.elements.push_back(element(e, index++));
    }
    if (has("tuning")) {
      c.environment.elements.emplace_back(SlopeResonator{number("tuning", "reactance_slope_nh") * units::nano,
                                                         Frequency::ghz(number("tuning", "f_center_ghz"))});
    }
    c.validate();
    return c;
  }

  CoupledLineSpec transformer() const {
    return CoupledLineSpec(number("transformer", "z_high_ohm"), number("transformer", "z_odd_ohm"),
                           number("transformer", "z_even_ohm"), number("transformer", "length_mm") * units::milli,
                           number("transformer", "velocity_m_per_s"));
  }

  GridSpec sweep_grid() const {
    return {number("sweep", "f_min_ghz"), number("sweep", "f_max_ghz"), count("sweep", "points")};
  }

  std::optional<GridSpec> sweep_grid_if_present() const {
    if (!has("sweep")) return std::nullopt;
    return sweep_grid();
  }

  MetricsSpec metrics() const {
    MetricsSpec m;
    if (!has("metrics")) return m;
    const auto& s = doc_.at("metrics");
    if (s.contains("level_db")) m.level_db = number("metrics", "level_db");
    const bool lo = s.contains("band_lo_ghz");
    const bool hi = s.contains("band_hi_ghz");
    if (lo != hi) fail(ErrorKind::usage, "metrics.band_lo_ghz and metrics.band_hi_ghz must be given together");
    if (lo) m.band = band("metrics");
    return m;
  }

  OptimizeSpec optimize() const {
    OptimizeSpec o;
    o.target_gain_db = number("optimize", "target_gain_db");
    o.band = band("optimize");
    o.ripple_limit_db = number("optimize", "ripple_limit_db");
    o.budget = count("optimize", "budget");
    const auto& bounds = required("optimize", "bounds");
    if (!bounds.is_object() || bounds.empty()) fail(ErrorKind::usage, "optimize.bounds must be a non-empty table");
    for (const auto& [key, value] : bounds.items()) {
      const auto& pk = parameter_key(key);
      if (!value.is_array() || value.size() != 2 || !value[0].is_number() || !value[1].is_number()) {
        fail(ErrorKind::usage, "optimize.bounds." + key + " must be [lower, upper]");
      }
      o.space.bounds.push_back({pk.parameter, value[0].get<double>() * pk.to_si, value[1].get<double>() * pk.to_si});
    }
    o.space.validate();
    return o;
  }

  ParameterSweepSpec parameter_sweep() const {
    const auto& name = required("parameter_sweep", "parameter");
    if (!name.is_string()) fail(ErrorKind::usage, "parameter_sweep.parameter must be a string");
    const auto& pk = parameter_key(name.get<std::string>());
    const auto& values = required("parameter_sweep", "values");
    if (!values.is_array() || values.empty()) fail(ErrorKind::usage, "parameter_sweep.values must be a non-empty array");
    ParameterSweepSpec s{std::string(pk.key), pk.parameter, {}, {}};
    for (const auto& v : values) {
      if (!v.is_number()) fail(ErrorKind::usage, "parameter_sweep.values must be numbers");
      s.values_file.push_back(v.get<double>());
      s.values_si.push_back(v.get<double>() * pk.to_si);
    }
    return s;
  }

 private:
  nlohmann::json doc_;

  struct SectionSchema {
    std::string_view name;
    std::vector<std::string_view> keys;
  };

  static const std::vector<SectionSchema>& schema() {
    static const std::vector<SectionSchema> s{
        {"squid", {"critical_current_ua"}},
        {"bias", {"phi_dc_over_phi0", "phi_ac_over_phi0", "f_pump_ghz"}},
        {"environment", {"source_ohm", "c_shunt_pf"}},
        {"transformer", {"z_high_ohm", "z_odd_ohm", "z_even_ohm", "length_mm", "velocity_m_per_s"}},
        {"tuning", {"reactance_slope_nh", "f_center_ghz"}},
        {"sweep", {"f_min_ghz", "f_max_ghz", "points"}},
        {"metrics", {"level_db", "band_lo_ghz", "band_hi_ghz"}},
        {"optimize", {"target_gain_db", "band_lo_ghz", "band_hi_ghz", "ripple_limit_db", "budget", "bounds"}},
        {"parameter_sweep", {"parameter", "values"}},
    };
    return s;
  }

  static std::vector<std::string_view> element_keys(std::string_view kind) {
    if (kind == "tline") return {"kind", "z_c_ohm", "length_mm", "velocity_m_per_s"};
    if (kind == "series_l") return {"kind", "l_nh"};
    if (kind == "series_c" || kind == "shunt_c") return {"kind", "c_pf"};
    fail(ErrorKind::usage, "unknown element kind '" + std::string(kind) + "'");
  }

  void check_keys() const {
    if (!doc_.is_object()) fail(ErrorKind::usage, "config must be a table");
    for (const auto& [name, body] : doc_.items()) {
      if (name == "element") {
        if (!body.is_array()) fail(ErrorKind::usage, "'element' must be an array of tables ([[element]])");
        for (const auto& e : body) {
          if (!e.contains("kind") || !e.at("kind").is_string()) {
            fail(ErrorKind::usage, "missing required key 'element.kind'");
          }
          const auto allowed = element_keys(e.at("kind").get<std::string>());
          for (const auto& [k, v] : e.items()) {
            if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
              fail(ErrorKind::usage, "unknown key 'element." + k + "' for kind " + e.at("kind").get<std::string>());
            }
          }
        }
        continue;
      }
      const auto it = std::find_if(schema().begin(), schema().end(), [&](const auto& s) { return s.name == name; });
      if (it == schema().end()) fail(ErrorKind::usage, "unknown section '" + name + "'");
      if (!body.is_object()) fail(ErrorKind::usage, "'" + name + "' must be a table");
      for (const auto& [k, v] : body.items()) {
        if (std::find(it->keys.begin(), it->keys.end(), k) == it->keys.end()) {
          fail(ErrorKind::usage, "unknown key '" + name + "." + k + "'");
        }
      }
    }
  }

  void set_default(const std::string& section, const std::string& key, nlohmann::json value) {
    if (doc_.contains(section) && !doc_[section].contains(key)) doc_[section][key] = std::move(value);
  }

  void fill_defaults() {
    set_default("environment", "source_ohm", 50.0);
    const double source = doc_.contains("environment") && doc_["environment"]["source_ohm"].is_number()
                              ? doc_["environment"]["source_ohm"].get<double>()
                              : 50.0;
    set_default("transformer", "z_high_ohm", source);
    if (doc_.contains("bias") && doc_["bias"].contains("f_pump_ghz") && doc_["bias"]["f_pump_ghz"].is_number()) {
      set_default("tuning", "f_center_ghz", 0.5 * doc_["bias"]["f_pump_ghz"].get<double>());
    }
    set_default("optimize", "target_gain_db", 20.0);
    set_default("optimize", "ripple_limit_db", 1.0);
    set_default("optimize", "budget", static_cast<std::int64_t>(default_budget));
  }

  const nlohmann::json& required(std::string_view section, std::string_view key) const {
    const std::string s(section), k(key);
    if (!doc_.contains(s) || !doc_.at(s).contains(k)) {
      fail(ErrorKind::usage, "missing required key '" + s + "." + k + "'");
    }
    return doc_.at(s).at(k);
  }

  double number(std::string_view section, std::string_view key) const {
    const auto& v = required(section, key);
    if (!v.is_number()) fail(ErrorKind::usage, "key '" + std::string(section) + "." + std::string(key) + "' must be a number");
    return v.get<double>();
  }

  std::size_t count(std::string_view section, std::string_view key) const {
    const auto& v = required(section, key);
    if (!v.is_number_integer() || v.get<long long>() <= 0) {
      fail(ErrorKind::usage, "key '" + std::string(section) + "." + std::string(key) + "' must be a positive integer");
    }
    return static_cast<std::size_t>(v.get<long long>());
  }

  FrequencyBand band(std::string_view section) const {
    const double lo = number(section, "band_lo_ghz");
    const double hi = number(section, "band_hi_ghz");
    if (!(lo > 0.0) || !(hi > lo)) fail(ErrorKind::usage, std::string(section) + " band must satisfy 0 < lo < hi");
    return {Frequency::ghz(lo), Frequency::ghz(hi)};
  }

  static double element_number(const nlohmann::json& e, std::string_view key, std::size_t index) {
    const std::string k(key);
    if (!e.contains(k)) fail(ErrorKind::usage, "missing required key 'element." + k + "' (element " + std::to_string(index) + ")");
    if (!e.at(k).is_number()) fail(ErrorKind::usage, "key 'element." + k + "' must be a number");
    return e.at(k).get<double>();
  }

  static Element element(const nlohmann::json& e, std::size_t index) {
    const auto kind = e.at("kind").get<std::string>();
    if (kind == "tline") {
      return TransmissionLine{element_number(e, "z_c_ohm", index), element_number(e, "velocity_m_per_s", index),
                              element_number(e, "length_mm", index) * units::milli};
    }
    if (kind == "series_l") return SeriesInductor{element_number(e, "l_nh", index) * units::nano};
    if (kind == "series_c") return SeriesCapacitor{element_number(e, "c_pf", index) * units::pico};
    return ShuntCapacitor{element_number(e, "c_pf", index) * units::pico};
  }
};

}  // namespace jpaforge::io
