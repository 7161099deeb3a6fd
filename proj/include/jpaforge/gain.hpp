#pragma once

// Reflection gain of the pumped SQUID against its environment, swept over a
// signal-frequency grid, and the figures of merit extracted from the curve.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "jpaforge/error.hpp"
#include "jpaforge/network.hpp"
#include "jpaforge/pumpistor.hpp"
#include "jpaforge/quantities.hpp"
#include "jpaforge/simplex.hpp"

namespace jpaforge {

/// Power-wave reflection coefficient of the SQUID admittance Y_A against an
/// environment Y_ext:  G = (Y_ext* - Y_A) / (Y_ext + Y_A).
/// For real Y_ext this is (Y_ext - Y_A)/(Y_ext + Y_A); the conjugate keeps
/// |G| = 1 for any lossless Y_A when the environment is reactive.
inline complex reflection_gain(const ComplexImmittance& y_ext, const ComplexImmittance& y_a) {
  if (!y_ext.is_admittance() || !y_a.is_admittance()) {
    fail(ErrorKind::usage, "reflection gain expects admittances");
  }
  const complex den = y_ext.value + y_a.value;
  const double scale = std::abs(y_ext.value) + std::abs(y_a.value);
  if (!(std::abs(den) > 1e-14 * scale)) {
    fail(ErrorKind::oscillation_threshold, "Y_ext + Y_A vanishes: parametric oscillation threshold");
  }
  return (std::conj(y_ext.value) - y_a.value) / den;
}

struct AmplifierConfig {
  SquidSpec squid;
  OperatingPoint bias;
  EnvironmentChain environment;

  void validate() const {
    squid.validate();
    bias.validate();
    environment.validate();
    if (squid.shunt_capacitance != environment.shunt_capacitance) {
      fail(ErrorKind::usage, "squid and environment disagree on the shunt capacitance");
    }
  }

  void set_shunt_capacitance(double c) {
    squid.shunt_capacitance = c;
    environment.shunt_capacitance = c;
  }
};

/// Complex gain at one signal frequency. Throws on any typed error.
inline complex evaluate_gain(const AmplifierConfig& config, Frequency signal) {
  const Frequency idler = config.bias.idler(signal);
  if (!(idler.rad_per_s() > 0.0)) fail(ErrorKind::domain, "idler frequency omega_p - omega_s must be positive");
  const auto y_s = environment_admittance(config.environment, signal);
  const auto y_i = environment_admittance(config.environment, idler);
  const auto elems = pumpistor_elements(config.squid, config.bias, signal, y_i);
  const auto y_a = pumpistor_admittance(elems, signal);
  return reflection_gain(y_s, y_a);
}

struct GainPoint {
  Frequency omega;
  std::optional<complex> g;
  double gain_db = std::numeric_limits<double>::quiet_NaN();  // 20 log10 |G|
  std::optional<ErrorKind> error;
  std::string message;

  bool ok() const { return g.has_value(); }
};

struct GainCurve {
  std::vector<GainPoint> points;

  std::size_t valid_count() const {
    return static_cast<std::size_t>(std::count_if(points.begin(), points.end(), [](const auto& p) { return p.ok(); }));
  }
};

namespace detail {

inline void check_grid(std::span<const Frequency> grid) {
  if (grid.empty()) fail(ErrorKind::usage, "frequency grid is empty");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) fail(ErrorKind::usage, "frequency grid must be strictly increasing");
  }
}

/// Runs fn(i) for i in [0, n) on up to `jobs` threads, contiguous blocks.
template <typename Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn&& fn) {
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
  if (jobs <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> workers;
  workers.reserve(jobs);
  const std::size_t block = (n + jobs - 1) / jobs;
  for (unsigned w = 0; w < jobs; ++w) {
    const std::size_t lo = w * block;
    const std::size_t hi = std::min(n, lo + block);
    if (lo >= hi) break;
    workers.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
}

}  // namespace detail

inline std::vector<Frequency> linear_grid(Frequency lo, Frequency hi, std::size_t points) {
  if (points == 0) fail(ErrorKind::usage, "grid needs at least one point");
  if (points == 1) return {lo};
  if (!(hi > lo)) fail(ErrorKind::usage, "grid upper bound must exceed the lower bound");
  std::vector<Frequency> g(points);
  const double a = lo.rad_per_s();
  const double step = (hi.rad_per_s() - a) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) g[i] = Frequency::angular(a + step * static_cast<double>(i));
  g.back() = hi;
  return g;
}

/// Evaluates the gain at every grid point. Points that hit a typed error
/// keep their slot with the error recorded. Results are in grid order for
/// any `jobs`.
inline GainCurve gain_sweep(const AmplifierConfig& config, std::span<const Frequency> grid, unsigned jobs = 1) {
  detail::check_grid(grid);
  config.validate();
  GainCurve curve;
  curve.points.resize(grid.size());
  detail::parallel_for(grid.size(), jobs, [&](std::size_t i) {
    GainPoint& p = curve.points[i];
    p.omega = grid[i];
    try {
      const complex g = evaluate_gain(config, grid[i]);
      p.g = g;
      p.gain_db = 20.0 * std::log10(std::abs(g));
      if (!std::isfinite(p.gain_db)) {
        p.g.reset();
        p.error = ErrorKind::oscillation_threshold;
        p.message = "non-finite gain";
      }
    } catch (const Error& e) {
      p.error = e.kind();
      p.message = e.what();
    }
  });
  return curve;
}

enum class ProfileClass { lorentzian, flattened, double_peaked };

constexpr std::string_view to_string(ProfileClass c) {
  switch (c) {
    case ProfileClass::lorentzian: return "lorentzian";
    case ProfileClass::flattened: return "flattened";
    case ProfileClass::double_peaked: return "double_peaked";
  }
  return "unknown";
}

struct FrequencyBand {
  Frequency lo;
  Frequency hi;

  bool contains(Frequency w) const { return w >= lo && w <= hi; }
};

struct GainMetrics {
  double peak_gain_db = 0.0;
  Frequency peak_frequency;
  double level_db = 0.0;
  double bandwidth_at_level_hz = 0.0;
  double bandwidth_3db_hz = 0.0;  // at peak - 3 dB
  double gbw_product_hz = 0.0;    // sqrt(peak linear power gain) * bandwidth_3db
  double ripple_db = 0.0;         // max - min inside the declared band
  std::optional<ProfileClass> profile;  // needs >= 32 valid points
  std::vector<std::string> warnings;
};

/// sqrt(10^(peak/10)) * bandwidth.
inline double gain_bandwidth_product(double peak_gain_db, double bandwidth_hz) {
  return std::sqrt(std::pow(10.0, peak_gain_db / 10.0)) * bandwidth_hz;
}

namespace detail {

struct Sample {
  double w;   // rad/s
  double db;
};

inline std::vector<Sample> valid_samples(const GainCurve& curve) {
  std::vector<Sample> s;
  s.reserve(curve.points.size());
  for (const auto& p : curve.points) {
    if (p.ok()) s.push_back({p.omega.rad_per_s(), p.gain_db});
  }
  return s;
}

/// Total measure (rad/s) of the grid where the piecewise-linear curve is at
/// or above `level`.
inline double measure_above(std::span<const Sample> s, double level) {
  double total = 0.0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    const auto& a = s[i - 1];
    const auto& b = s[i];
    const bool ua = a.db >= level;
    const bool ub = b.db >= level;
    const double width = b.w - a.w;
    if (ua && ub) {
      total += width;
    } else if (ua != ub) {
      const double t = (level - a.db) / (b.db - a.db);  // crossing fraction from a
      total += ua ? t * width : (1.0 - t) * width;
    }
  }
  return total;
}

inline std::size_t argmax(std::span<const Sample> s) {
  std::size_t k = 0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (s[i].db > s[k].db) k = i;
  }
  return k;
}

}  // namespace detail

inline ProfileClass classify_profile(const GainCurve& curve);

/// Peak (grid maximum with parabolic refinement), bandwidth above
/// `level_db`, 3-dB bandwidth, gain-bandwidth product, ripple inside `band`
/// and, when the curve is dense enough, the profile class.
inline GainMetrics gain_metrics(const GainCurve& curve, double level_db, FrequencyBand band) {
  const auto s = detail::valid_samples(curve);
  if (s.empty()) fail(ErrorKind::usage, "gain curve has no valid points");

  GainMetrics m;
  const std::size_t k = detail::argmax(s);
  double peak_db = s[k].db;
  double peak_w = s[k].w;
  if (k > 0 && k + 1 < s.size()) {
    // Parabola through the three samples around the maximum.
    const double x0 = s[k - 1].w, x1 = s[k].w, x2 = s[k + 1].w;
    const double y0 = s[k - 1].db, y1 = s[k].db, y2 = s[k + 1].db;
    const double d01 = (y1 - y0) / (x1 - x0);
    const double d12 = (y2 - y1) / (x2 - x1);
    const double a = (d12 - d01) / (x2 - x0);
    if (a < 0.0) {
      const double b = d01 - a * (x0 + x1);
      const double xv = -b / (2.0 * a);
      if (xv > x0 && xv < x2) {
        peak_w = xv;
        peak_db = y1 + d01 * (xv - x1) + a * (xv - x0) * (xv - x1);
      }
    }
  }
  m.peak_gain_db = peak_db;
  m.peak_frequency = Frequency::angular(peak_w);
  m.level_db = level_db;

  if (level_db > s[k].db) {
    fail(ErrorKind::no_bandwidth, "level " + std::to_string(level_db) + " dB is above the curve peak " +
                                      std::to_string(s[k].db) + " dB");
  }
  const double to_hz = 1.0 / constants::two_pi;
  m.bandwidth_at_level_hz = detail::measure_above(s, level_db) * to_hz;
  m.bandwidth_3db_hz = detail::measure_above(s, peak_db - 3.0) * to_hz;
  m.gbw_product_hz = gain_bandwidth_product(peak_db, m.bandwidth_3db_hz);

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& p : s) {
    if (p.w >= band.lo.rad_per_s() && p.w <= band.hi.rad_per_s()) {
      lo = std::min(lo, p.db);
      hi = std::max(hi, p.db);
    }
  }
  if (!(hi >= lo)) fail(ErrorKind::usage, "ripple band contains no valid grid points");
  m.ripple_db = hi - lo;

  // At least 8 samples across the 3-dB width.
  if (s.size() >= 2 && m.bandwidth_3db_hz > 0.0) {
    const double span = s.back().w - s.front().w;
    const double spacing = span / static_cast<double>(s.size() - 1);
    if (m.bandwidth_3db_hz / to_hz < 8.0 * spacing) {
      m.warnings.emplace_back("grid resolves the 3-dB width with fewer than 8 points");
    }
  }
  if (curve.valid_count() != curve.points.size()) {
    m.warnings.emplace_back(std::to_string(curve.points.size() - curve.valid_count()) +
                            " grid points excluded by errors");
  }
  if (s.size() >= 32) m.profile = classify_profile(curve);
  return m;
}

/// Metrics with defaults for the unspecified parts: level 3 dB below the
/// highest valid sample, ripple over the whole grid.
inline GainMetrics gain_metrics(const GainCurve& curve, std::optional<double> level_db,
                                std::optional<FrequencyBand> band = std::nullopt) {
  const auto s = detail::valid_samples(curve);
  if (s.empty()) fail(ErrorKind::usage, "gain curve has no valid points");
  const double level = level_db ? *level_db : s[detail::argmax(s)].db - 3.0;
  const FrequencyBand b = band ? *band : FrequencyBand{curve.points.front().omega, curve.points.back().omega};
  return gain_metrics(curve, level, b);
}

struct LorentzianFit {
  double center = 0.0;     // rad/s
  double half_width = 0.0; // rad/s
  double amplitude = 0.0;
  double baseline = 0.0;
  double relative_residual = 0.0;  // ||fit - data|| / ||data||
};

/// Least-squares fit of baseline + amplitude / (1 + ((w - center)/half_width)^2)
/// to linear power samples. Amplitude and baseline are solved in closed form
/// for each (center, width) pair; the two nonlinear parameters are found by
/// Nelder-Mead.
inline LorentzianFit fit_lorentzian(std::span<const double> w, std::span<const double> power) {
  const std::size_t n = w.size();
  if (n < 4 || power.size() != n) fail(ErrorKind::usage, "Lorentzian fit needs at least 4 samples");
  const double span = w.back() - w.front();

  double norm2 = 0.0;
  for (double p : power) norm2 += p * p;

  // Linear sub-problem: returns the residual sum of squares and fills a, b.
  auto solve = [&](double c, double g, double& amp, double& base) {
    double sff = 0.0, sf = 0.0, sfp = 0.0, sp = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double u = (w[i] - c) / g;
      const double f = 1.0 / (1.0 + u * u);
      sff += f * f;
      sf += f;
      sfp += f * power[i];
      sp += power[i];
    }
    const double nn = static_cast<double>(n);
    const double det = sff * nn - sf * sf;
    if (std::abs(det) <= 1e-14 * sff * nn) {
      amp = 0.0;
      base = sp / nn;
    } else {
      amp = (sfp * nn - sf * sp) / det;
      base = (sff * sp - sf * sfp) / det;
    }
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double u = (w[i] - c) / g;
      const double r = base + amp / (1.0 + u * u) - power[i];
      rss += r * r;
    }
    return rss;
  };

  // Starting point from the maximum and its half-maximum crossings.
  std::size_t k = 0;
  double pmin = power[0];
  for (std::size_t i = 1; i < n; ++i) {
    if (power[i] > power[k]) k = i;
    pmin = std::min(pmin, power[i]);
  }
  const double half = 0.5 * (power[k] + pmin);
  std::size_t lo = k, hi = k;
  while (lo > 0 && power[lo] > half) --lo;
  while (hi + 1 < n && power[hi] > half) ++hi;
  const double g0 = std::max(0.5 * (w[hi] - w[lo]), span / static_cast<double>(4 * n));

  // Coordinates: center in units of span, log of width.
  auto cost = [&](const std::vector<double>& x) {
    const double c = w.front() + x[0] * span;
    const double g = std::exp(x[1]);
    double a, b;
    return solve(c, g, a, b) / norm2;
  };
  const std::vector<double> x0{(w[k] - w.front()) / span, std::log(g0)};
  SimplexOptions opt;
  opt.max_evaluations = 2000;
  opt.f_tolerance = 1e-15;
  opt.x_tolerance = 1e-9;
  auto best = nelder_mead(cost, axis_simplex(x0, {0.02, 0.3}), opt);
  // One restart from the converged point guards against premature collapse.
  best = nelder_mead(cost, axis_simplex(best.x, {0.005, 0.1}), opt);

  LorentzianFit fit;
  fit.center = w.front() + best.x[0] * span;
  fit.half_width = std::exp(best.x[1]);
  const double rss = solve(fit.center, fit.half_width, fit.amplitude, fit.baseline);
  fit.relative_residual = norm2 > 0.0 ? std::sqrt(rss / norm2) : 0.0;
  return fit;
}

inline constexpr double double_peak_prominence_db = 0.5;
inline constexpr double lorentzian_residual_limit = 0.02;
inline constexpr std::size_t min_classify_points = 32;

/// True when two local maxima each rise at least 0.5 dB above the lowest
/// point between them.
inline bool has_double_peak(std::span<const detail::Sample> s) {
  // Interior local maxima; a plateau counts once.
  std::vector<std::size_t> maxima;
  for (std::size_t i = 1; i + 1 < s.size();) {
    std::size_t j = i;
    while (j + 1 < s.size() && s[j + 1].db == s[i].db) ++j;
    if (j + 1 < s.size() && s[i - 1].db < s[i].db && s[j + 1].db < s[i].db) maxima.push_back(i);
    i = j + 1;
  }
  for (std::size_t a = 0; a < maxima.size(); ++a) {
    double valley = std::numeric_limits<double>::infinity();
    for (std::size_t b = a + 1; b < maxima.size(); ++b) {
      for (std::size_t i = maxima[b - 1]; i <= maxima[b]; ++i) valley = std::min(valley, s[i].db);
      if (s[maxima[a]].db - valley >= double_peak_prominence_db &&
          s[maxima[b]].db - valley >= double_peak_prominence_db) {
        return true;
      }
    }
  }
  return false;
}

inline ProfileClass classify_profile(const GainCurve& curve) {
  const auto s = detail::valid_samples(curve);
  if (s.size() < min_classify_points) {
    fail(ErrorKind::usage, "profile classification needs at least 32 valid points, got " + std::to_string(s.size()));
  }
  if (has_double_peak(s)) return ProfileClass::double_peaked;
  std::vector<double> w(s.size()), p(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    w[i] = s[i].w;
    p[i] = std::pow(10.0, s[i].db / 10.0);
  }
  const auto fit = fit_lorentzian(w, p);
  return fit.relative_residual <= lorentzian_residual_limit ? ProfileClass::lorentzian : ProfileClass::flattened;
}

}  // namespace jpaforge
