#pragma once

// Hot/cold-load noise calibration: forward model of the output spectral
// density of a phase-preserving amplifier fed by a thermal load,
//
//   S(w, T) = 2 G (P(w, T) + T_sys),   P(w, T) = (hbar w / k_B) / (exp(hbar w / k_B T) - 1),
//
// its linear least-squares inversion, and conversions to added photons and
// the standard quantum limit. S is input-referred and expressed in kelvin,
// so G is dimensionless.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "jpaforge/error.hpp"
#include "jpaforge/quantities.hpp"

namespace jpaforge {

/// hbar*omega/k_B in kelvin.
inline double photon_temperature(Frequency omega) {
  return constants::reduced_planck * omega.rad_per_s() / constants::boltzmann;
}

/// Planck occupancy expressed as a temperature, in kelvin.
inline double planck_occupancy_temperature(Frequency omega, double temperature) {
  if (!(temperature > 0.0)) fail(ErrorKind::domain, "temperature must be positive");
  if (!(omega.rad_per_s() > 0.0)) fail(ErrorKind::domain, "frequency must be positive");
  const double tq = photon_temperature(omega);
  return tq / std::expm1(tq / temperature);
}

inline double noise_forward(Frequency omega, double temperature, double gain, double t_sys) {
  if (!(gain > 0.0)) fail(ErrorKind::domain, "gain must be positive");
  return 2.0 * gain * (planck_occupancy_temperature(omega, temperature) + t_sys);
}

/// n_add = k_B T_sys / (hbar omega).
inline double added_photons(double t_sys, Frequency omega) {
  if (!(t_sys >= 0.0)) fail(ErrorKind::domain, "system noise temperature must be non-negative");
  if (!(omega.rad_per_s() > 0.0)) fail(ErrorKind::domain, "frequency must be positive");
  return t_sys / photon_temperature(omega);
}

/// Half a photon: hbar omega / (2 k_B).
inline double sql_temperature(Frequency omega) {
  if (!(omega.rad_per_s() > 0.0)) fail(ErrorKind::domain, "frequency must be positive");
  return 0.5 * photon_temperature(omega);
}

struct NoiseSample {
  double temperature;  // K
  double psd;          // K, input referred
  double weight = 1.0;
};

struct NoiseDataset {
  Frequency omega;
  std::vector<NoiseSample> samples;
};

struct NoiseFitResult {
  double gain = 0.0;                // linear, G
  double t_sys = 0.0;               // K, clamped at 0
  double t_sys_unconstrained = 0.0; // K
  bool t_sys_clamped = false;
  double n_add = 0.0;               // photons, from the clamped T_sys
  double residual_rms = 0.0;        // K
  double gain_stderr = 0.0;
  double t_sys_stderr = 0.0;
  std::vector<std::string> warnings;
};

/// Weighted linear least squares for S_j = a P_j + b with a = 2G and
/// b = 2G T_sys, solved through the 2x2 normal equations. Standard errors
/// come from the residual variance (zero for an exactly determined fit).
inline NoiseFitResult fit_noise(const NoiseDataset& data) {
  const auto& xs = data.samples;
  if (xs.size() < 2) fail(ErrorKind::usage, "noise fit needs at least two samples");
  if (!(data.omega.rad_per_s() > 0.0)) fail(ErrorKind::domain, "frequency must be positive");

  NoiseFitResult r;
  double t_min = xs.front().temperature, t_max = t_min;
  for (const auto& s : xs) {
    if (!(s.temperature > 0.0)) fail(ErrorKind::domain, "sample temperatures must be positive");
    if (!(s.weight > 0.0)) fail(ErrorKind::domain, "sample weights must be positive");
    if (!std::isfinite(s.psd)) fail(ErrorKind::domain, "sample PSD must be finite");
    t_min = std::min(t_min, s.temperature);
    t_max = std::max(t_max, s.temperature);
  }
  if (t_max < 2.0 * t_min) r.warnings.emplace_back("temperature span ratio below 2; fit is poorly conditioned");

  std::vector<double> p(xs.size());
  double sw = 0.0, swp = 0.0, swpp = 0.0, sws = 0.0, swps = 0.0;
  for (std::size_t j = 0; j < xs.size(); ++j) {
    p[j] = planck_occupancy_temperature(data.omega, xs[j].temperature);
    const double w = xs[j].weight;
    sw += w;
    swp += w * p[j];
    swpp += w * p[j] * p[j];
    sws += w * xs[j].psd;
    swps += w * p[j] * xs[j].psd;
  }
  const double det = swpp * sw - swp * swp;
  if (!(det > 1e-12 * swpp * sw)) {
    fail(ErrorKind::degenerate_fit, "design is rank deficient: sample temperatures do not vary");
  }
  const double a = (swps * sw - swp * sws) / det;
  const double b = (swpp * sws - swp * swps) / det;
  if (!(a > 0.0)) fail(ErrorKind::degenerate_fit, "fitted gain is not positive");

  double ssr_w = 0.0, ssr = 0.0;
  for (std::size_t j = 0; j < xs.size(); ++j) {
    const double res = xs[j].psd - (a * p[j] + b);
    ssr_w += xs[j].weight * res * res;
    ssr += res * res;
  }
  const auto n = static_cast<double>(xs.size());
  r.residual_rms = std::sqrt(ssr / n);
  const double sigma2 = xs.size() > 2 ? ssr_w / (n - 2.0) : 0.0;
  // Inverse of the normal matrix [[swpp, swp], [swp, sw]].
  const double var_a = sigma2 * sw / det;
  const double var_b = sigma2 * swpp / det;
  const double cov_ab = -sigma2 * swp / det;

  r.gain = 0.5 * a;
  r.gain_stderr = 0.5 * std::sqrt(var_a);
  r.t_sys_unconstrained = b / a;
  // Delta method for b/a.
  const double var_t = var_b / (a * a) + b * b * var_a / (a * a * a * a) - 2.0 * b * cov_ab / (a * a * a);
  r.t_sys_stderr = std::sqrt(std::max(0.0, var_t));
  if (r.t_sys_unconstrained < 0.0) {
    r.t_sys = 0.0;
    r.t_sys_clamped = true;
    r.warnings.emplace_back("negative system noise temperature clamped to 0");
  } else {
    r.t_sys = r.t_sys_unconstrained;
  }
  r.n_add = added_photons(r.t_sys, data.omega);
  return r;
}

}  // namespace jpaforge
