#pragma once

// Small-signal (pumpistor) model of a flux-pumped SQUID.
//
// Under a flux pump at omega_p = omega_s + omega_i the SQUID behaves, at the
// signal frequency, as a static admittance with two branches: the bias
// inductance L0 and a series combination of L1 with a complex element X
// that depends on the environment at the idler. Flux values are fractions
// of the flux quantum throughout.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "jpaforge/error.hpp"
#include "jpaforge/quantities.hpp"

namespace jpaforge {

/// L_J = phi0 / (2 pi I_c).
inline double squid_inductance(double critical_current) {
  if (!(critical_current > 0.0)) {
    fail(ErrorKind::domain, "critical current must be positive, got " + std::to_string(critical_current) + " A");
  }
  return constants::flux_quantum / (constants::two_pi * critical_current);
}

struct SquidSpec {
  double critical_current = 0.0;   // A
  double shunt_capacitance = 0.0;  // F

  double josephson_inductance() const { return squid_inductance(critical_current); }

  void validate() const {
    squid_inductance(critical_current);
    if (!(shunt_capacitance >= 0.0)) fail(ErrorKind::domain, "shunt capacitance must be non-negative");
  }
};

struct OperatingPoint {
  double phi_dc = 0.0;  // dc flux bias / phi0, in [0, 0.5)
  double phi_ac = 0.0;  // pump flux amplitude / phi0, > 0
  Frequency pump;

  void validate() const {
    if (!(phi_dc >= 0.0)) fail(ErrorKind::domain, "phi_dc/phi0 must be non-negative");
    if (!(phi_dc < 0.5)) fail(ErrorKind::divergence, "phi_dc/phi0 must be below 1/2 (bias inductance diverges)");
    if (!(phi_ac > 0.0)) fail(ErrorKind::domain, "phi_ac/phi0 must be positive");
    if (!(pump.rad_per_s() > 0.0)) fail(ErrorKind::domain, "pump frequency must be positive");
  }

  Frequency idler(Frequency signal) const { return Frequency::angular(pump.rad_per_s() - signal.rad_per_s()); }
};

struct PumpistorElements {
  double l0 = 0.0;  // H
  double l1 = 0.0;  // H, negative for 0 < phi_dc < 1/2
  complex x;        // ohm
};

namespace detail {

// cos(pi x) and sin(pi x) with the product formed in extended precision, so
// that rational bias points such as x = 1/3 give correctly rounded values
// (cos = 0.5 exactly rather than 0.5 + 1 ulp).
inline double cos_pi(double x) { return static_cast<double>(std::cos(std::numbers::pi_v<long double> * x)); }
inline double sin_pi(double x) { return static_cast<double>(std::sin(std::numbers::pi_v<long double> * x)); }

}  // namespace detail

/// L0 = L_J / cos(pi phi_dc).
inline double bias_inductance(const SquidSpec& squid, double phi_dc) {
  if (!(phi_dc >= 0.0)) fail(ErrorKind::domain, "phi_dc/phi0 must be non-negative");
  const double c = detail::cos_pi(phi_dc);
  if (!(phi_dc < 0.5) || !(c > 0.0)) {
    fail(ErrorKind::divergence, "bias inductance diverges at phi_dc/phi0 = " + std::to_string(phi_dc));
  }
  return squid.josephson_inductance() / c;
}

/// Pumpistor branch elements at signal frequency `signal`, given the full
/// environment admittance at the idler. The idler admittance enters
/// conjugated.
inline PumpistorElements pumpistor_elements(const SquidSpec& squid, const OperatingPoint& op, Frequency signal,
                                            const ComplexImmittance& y_ext_idler) {
  op.validate();
  if (!y_ext_idler.is_admittance()) fail(ErrorKind::usage, "idler environment must be given as an admittance");
  const double ws = signal.rad_per_s();
  const double wi = op.pump.rad_per_s() - ws;
  if (!(ws > 0.0)) fail(ErrorKind::domain, "signal frequency must be positive");
  if (!(wi > 0.0)) fail(ErrorKind::domain, "idler frequency omega_p - omega_s must be positive");

  const double lj = squid.josephson_inductance();
  const double l0 = bias_inductance(squid, op.phi_dc);
  const double sin_a = detail::sin_pi(op.phi_dc);
  const double sin2 = sin_a * sin_a;
  if (op.phi_dc == 0.0 || sin2 == 0.0) {
    fail(ErrorKind::degenerate_bias, "phi_dc = 0 gives no parametric coupling");
  }
  const double pi2 = std::numbers::pi * std::numbers::pi;
  const double pump_factor = 1.0 / (op.phi_ac * op.phi_ac);  // (phi0/phi_ac)^2

  PumpistorElements e;
  e.l0 = l0;
  e.l1 = -4.0 * lj * detail::cos_pi(op.phi_dc) / (pi2 * sin2) * pump_factor;
  e.x = -4.0 * ws * wi * lj * lj * std::conj(y_ext_idler.value) / (pi2 * sin2) * pump_factor;
  return e;
}

/// Y_A(omega_s) = 1/(j omega_s L0) + 1/(j omega_s L1 + X).
inline ComplexImmittance pumpistor_admittance(const PumpistorElements& e, Frequency signal) {
  const double ws = signal.rad_per_s();
  if (!(ws > 0.0)) fail(ErrorKind::domain, "signal frequency must be positive");
  if (!(e.l0 > 0.0)) fail(ErrorKind::domain, "L0 must be positive");
  const complex branch = complex{0.0, ws * e.l1} + e.x;
  const double scale = std::max(std::abs(ws * e.l1), std::abs(e.x));
  if (!(std::abs(branch) > 1e-15 * scale)) {
    fail(ErrorKind::singular_operating_point, "pumpistor branch j*omega*L1 + X vanishes");
  }
  return ComplexImmittance::admittance(1.0 / complex{0.0, ws * e.l0} + 1.0 / branch);
}

struct BareResonance {
  Frequency omega0;
  double q = 0.0;
};

/// Unpumped resonance of L0 with the shunt capacitor, and its quality
/// factor Q = omega0 Z0 C against a real environment Z0.
inline BareResonance bare_resonance(const SquidSpec& squid, double phi_dc, double z0) {
  if (!(squid.shunt_capacitance > 0.0)) fail(ErrorKind::domain, "shunt capacitance must be positive");
  if (!(z0 > 0.0)) fail(ErrorKind::domain, "environment impedance must be positive");
  const double l0 = bias_inductance(squid, phi_dc);
  const double w0 = 1.0 / std::sqrt(l0 * squid.shunt_capacitance);
  return {Frequency::angular(w0), w0 * z0 * squid.shunt_capacitance};
}

}  // namespace jpaforge
