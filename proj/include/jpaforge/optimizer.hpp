#pragma once

// Parameter sweeps and bounded derivative-free design optimization.
//
// A design is scored by the bandwidth over which the gain stays within
// 1 dB of the target, subject to a minimum peak gain and a ripple limit in
// a declared band. Infeasible designs score zero and carry the size of the
// violation, which is what the simplex minimizes until it finds a feasible
// point.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "jpaforge/error.hpp"
#include "jpaforge/gain.hpp"
#include "jpaforge/network.hpp"
#include "jpaforge/simplex.hpp"

namespace jpaforge {

/// Tunable design quantities. Values are SI: ohm, henry, fraction of phi0,
/// rad/s, farad.
enum class Parameter { z_odd, reactance_slope, phi_dc, phi_ac, pump_frequency, shunt_capacitance };

constexpr std::string_view to_string(Parameter p) {
  switch (p) {
    case Parameter::z_odd: return "z_odd";
    case Parameter::reactance_slope: return "reactance_slope";
    case Parameter::phi_dc: return "phi_dc";
    case Parameter::phi_ac: return "phi_ac";
    case Parameter::pump_frequency: return "pump_frequency";
    case Parameter::shunt_capacitance: return "shunt_capacitance";
  }
  return "unknown";
}

inline Parameter parameter_from_name(std::string_view name) {
  for (auto p : {Parameter::z_odd, Parameter::reactance_slope, Parameter::phi_dc, Parameter::phi_ac,
                 Parameter::pump_frequency, Parameter::shunt_capacitance}) {
    if (to_string(p) == name) return p;
  }
  fail(ErrorKind::usage, "unknown parameter '" + std::string(name) + "'");
}

/// Returns a copy of `config` with one parameter replaced. A parameter that
/// targets an element the chain does not contain is a usage error.
inline AmplifierConfig apply_parameter(AmplifierConfig config, Parameter p, double value) {
  auto& elements = config.environment.elements;
  switch (p) {
    case Parameter::z_odd: {
      if (elements.empty() || !std::holds_alternative<RuthroffTransformer>(elements.front())) {
        fail(ErrorKind::usage, "z_odd needs a Ruthroff transformer in the chain");
      }
      auto& t = std::get<RuthroffTransformer>(elements.front());
      t.spec = t.spec.with_z_odd(value);
      break;
    }
    case Parameter::reactance_slope: {
      auto it = std::find_if(elements.begin(), elements.end(),
                             [](const Element& e) { return std::holds_alternative<SlopeResonator>(e); });
      if (it == elements.end()) fail(ErrorKind::usage, "reactance_slope needs a slope resonator in the chain");
      std::get<SlopeResonator>(*it).slope = value;
      break;
    }
    case Parameter::phi_dc: config.bias.phi_dc = value; break;
    case Parameter::phi_ac: config.bias.phi_ac = value; break;
    case Parameter::pump_frequency: config.bias.pump = Frequency::angular(value); break;
    case Parameter::shunt_capacitance: config.set_shunt_capacitance(value); break;
  }
  return config;
}

struct ParameterBound {
  Parameter parameter;
  double lower;
  double upper;
};

struct ParameterSpace {
  std::vector<ParameterBound> bounds;

  std::size_t size() const { return bounds.size(); }

  void validate() const {
    if (bounds.empty()) fail(ErrorKind::usage, "parameter space is empty");
    for (std::size_t i = 0; i < bounds.size(); ++i) {
      const auto& b = bounds[i];
      if (!std::isfinite(b.lower) || !std::isfinite(b.upper) || !(b.lower < b.upper)) {
        fail(ErrorKind::usage, "bounds for " + std::string(to_string(b.parameter)) + " must be finite with lower < upper");
      }
      for (std::size_t j = 0; j < i; ++j) {
        if (bounds[j].parameter == b.parameter) {
          fail(ErrorKind::usage, "parameter " + std::string(to_string(b.parameter)) + " listed twice");
        }
      }
    }
  }

  AmplifierConfig apply(AmplifierConfig config, std::span<const double> values) const {
    for (std::size_t i = 0; i < bounds.size(); ++i) config = apply_parameter(std::move(config), bounds[i].parameter, values[i]);
    return config;
  }

  std::vector<double> midpoint() const {
    std::vector<double> m;
    for (const auto& b : bounds) m.push_back(0.5 * (b.lower + b.upper));
    return m;
  }
};

struct Objective {
  double target_gain_db = 20.0;
  FrequencyBand band;
  double ripple_limit_db = 1.0;
  std::vector<Frequency> grid;  // signal grid used for every evaluation
  unsigned jobs = 1;
};

struct Evaluation {
  std::vector<double> values;
  double score = 0.0;  // Hz above target - 1 dB; 0 when infeasible
  bool feasible = false;
  double violation = 0.0;  // dB-equivalent size of the constraint violation
  std::string violation_reason;
  std::optional<GainMetrics> metrics;
};

/// Scores one design. Never throws for physically invalid parameter values;
/// those become infeasible evaluations.
inline Evaluation evaluate_design(const AmplifierConfig& base, const ParameterSpace& space,
                                  std::span<const double> values, const Objective& objective) {
  Evaluation ev;
  ev.values.assign(values.begin(), values.end());
  constexpr double hard_violation = 100.0;
  try {
    const auto config = space.apply(base, values);
    const auto curve = gain_sweep(config, objective.grid, objective.jobs);
    std::size_t band_errors = 0;
    for (const auto& p : curve.points) {
      if (!p.ok() && objective.band.contains(p.omega)) ++band_errors;
    }
    const double level = objective.target_gain_db - 1.0;
    GainMetrics m;
    try {
      m = gain_metrics(curve, level, objective.band);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::no_bandwidth) throw;
      // Peak below target - 1 dB: metrics at the peak itself.
      m = gain_metrics(curve, -std::numeric_limits<double>::infinity(), objective.band);
      m.level_db = level;
      m.bandwidth_at_level_hz = 0.0;
    }
    double violation = 0.0;
    std::string reason;
    if (band_errors > 0) {
      violation += hard_violation;
      reason += std::to_string(band_errors) + " in-band points at oscillation or other error; ";
    }
    if (m.peak_gain_db < objective.target_gain_db) {
      violation += objective.target_gain_db - m.peak_gain_db;
      reason += "peak below target; ";
    }
    if (m.ripple_db > objective.ripple_limit_db) {
      violation += m.ripple_db - objective.ripple_limit_db;
      reason += "ripple above limit; ";
    }
    if (!reason.empty()) reason.resize(reason.size() - 2);
    ev.violation = violation;
    ev.violation_reason = reason;
    ev.feasible = violation == 0.0;
    ev.score = ev.feasible ? m.bandwidth_at_level_hz : 0.0;
    ev.metrics = std::move(m);
  } catch (const Error& e) {
    ev.feasible = false;
    ev.score = 0.0;
    ev.violation = hard_violation;
    ev.violation_reason = e.what();
  }
  return ev;
}

/// Single scalar the simplex minimizes: -score in GHz for feasible designs,
/// the violation otherwise. Every feasible design ranks ahead of every
/// infeasible one.
inline double design_cost(const Evaluation& ev) {
  return ev.feasible ? -ev.score / units::giga : ev.violation;
}

inline bool better(const Evaluation& a, const Evaluation& b) { return design_cost(a) < design_cost(b); }

struct OptimizationResult {
  bool feasible = false;
  Evaluation best;
  AmplifierConfig best_config;
  std::vector<Evaluation> trace;
  std::uint64_t seed = 0;
};

inline constexpr std::size_t default_budget = 500;
inline constexpr std::uint64_t default_seed = 20220101;

/// Bounded Nelder-Mead in coordinates normalized to the unit box. The first
/// simplex sits at the midpoint of the space with seeded perturbations; when
/// a simplex collapses the search restarts around the incumbent with a fresh
/// seeded simplex until the budget is spent or two consecutive restarts fail
/// to improve. Deterministic for identical inputs.
inline OptimizationResult optimize(const AmplifierConfig& base, const ParameterSpace& space,
                                   const Objective& objective, std::size_t budget = default_budget,
                                   std::uint64_t seed = default_seed) {
  space.validate();
  if (budget < 10) fail(ErrorKind::usage, "optimization budget must be at least 10 evaluations");
  detail::check_grid(objective.grid);

  const std::size_t n = space.size();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  OptimizationResult result;
  result.seed = seed;

  auto to_values = [&](const std::vector<double>& u) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& b = space.bounds[i];
      v[i] = b.lower + std::clamp(u[i], 0.0, 1.0) * (b.upper - b.lower);
    }
    return v;
  };
  auto cost = [&](const std::vector<double>& u) {
    if (result.trace.size() >= budget) return std::numeric_limits<double>::infinity();
    auto ev = evaluate_design(base, space, to_values(u), objective);
    const double c = design_cost(ev);
    result.trace.push_back(std::move(ev));
    return c;
  };
  auto seeded_simplex = [&](const std::vector<double>& centre, double scale) {
    std::vector<std::vector<double>> s(n + 1, centre);
    for (std::size_t i = 0; i < n; ++i) {
      const double step = scale * (0.75 + 0.5 * unit(rng));
      // Step inwards when the centre sits in the upper half of the box.
      s[i + 1][i] += centre[i] > 0.5 ? -step : step;
    }
    return s;
  };

  SimplexOptions opt;
  opt.lower = std::vector<double>(n, 0.0);
  opt.upper = std::vector<double>(n, 1.0);
  opt.f_tolerance = 1e-9;
  opt.x_tolerance = 1e-7;

  std::vector<double> centre(n, 0.5);
  double scale = 0.25;
  double best_cost = std::numeric_limits<double>::infinity();
  int stale = 0;
  while (result.trace.size() < budget && stale < 2) {
    opt.max_evaluations = budget - result.trace.size();
    const auto r = nelder_mead(cost, seeded_simplex(centre, scale), opt);
    if (r.x.empty()) break;
    if (r.value < best_cost - 1e-12 * std::max(1.0, std::abs(best_cost))) {
      best_cost = r.value;
      centre = r.x;
      stale = 0;
    } else {
      ++stale;
    }
    scale = std::max(0.02, 0.5 * scale);
  }

  auto best = std::min_element(result.trace.begin(), result.trace.end(), better);
  result.best = *best;
  result.feasible = best->feasible;
  result.best_config = space.apply(base, best->values);
  return result;
}

/// Dense grid evaluation of a 1-D or 2-D space, including the bounds.
inline std::vector<Evaluation> grid_search(const AmplifierConfig& base, const ParameterSpace& space,
                                           const Objective& objective, std::size_t points_per_dim) {
  space.validate();
  if (space.size() > 2) fail(ErrorKind::usage, "grid search supports at most two parameters");
  if (points_per_dim < 2) fail(ErrorKind::usage, "grid search needs at least two points per dimension");
  auto axis = [&](std::size_t i, std::size_t k) {
    const auto& b = space.bounds[i];
    return b.lower + (b.upper - b.lower) * static_cast<double>(k) / static_cast<double>(points_per_dim - 1);
  };
  std::vector<Evaluation> out;
  const std::size_t outer = space.size() == 2 ? points_per_dim : 1;
  for (std::size_t a = 0; a < points_per_dim; ++a) {
    for (std::size_t b = 0; b < outer; ++b) {
      std::vector<double> v{axis(0, a)};
      if (space.size() == 2) v.push_back(axis(1, b));
      out.push_back(evaluate_design(base, space, v, objective));
    }
  }
  return out;
}

struct SweepSettings {
  std::vector<Frequency> grid;
  std::optional<double> level_db;      // default: 3 dB below the peak of each row
  std::optional<FrequencyBand> band;   // default: the whole grid
  unsigned jobs = 1;
};

struct SweepRow {
  double value = 0.0;
  std::optional<GainMetrics> metrics;
  std::optional<ErrorKind> error;
  std::string message;
};

/// One gain sweep and metrics extraction per parameter value; failures are
/// recorded per row.
inline std::vector<SweepRow> sweep(const AmplifierConfig& config, Parameter parameter,
                                   std::span<const double> values, const SweepSettings& settings) {
  detail::check_grid(settings.grid);
  if (values.empty()) fail(ErrorKind::usage, "parameter sweep needs at least one value");
  std::vector<SweepRow> rows;
  rows.reserve(values.size());
  for (double v : values) {
    SweepRow row;
    row.value = v;
    try {
      const auto c = apply_parameter(config, parameter, v);
      const auto curve = gain_sweep(c, settings.grid, settings.jobs);
      row.metrics = gain_metrics(curve, settings.level_db, settings.band);
    } catch (const Error& e) {
      row.error = e.kind();
      row.message = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::vector<SweepRow> sweep(const AmplifierConfig& config, std::string_view parameter,
                                   std::span<const double> values, const SweepSettings& settings) {
  return sweep(config, parameter_from_name(parameter), values, settings);
}

}  // namespace jpaforge
