#pragma once

// Physical constants, unit conventions and complex immittance arithmetic.
//
// Internally everything is SI with angular frequency in rad/s. Unit
// conversions to lab units (GHz, pH, fF, mK) happen only at the I/O
// boundary, through the helpers in the `units` namespace below.

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "jpaforge/error.hpp"

namespace jpaforge {

using complex = std::complex<double>;

/// CODATA 2018 values, fixed.
namespace constants {
inline constexpr double flux_quantum = 2.067833848e-15;     // Wb
inline constexpr double reduced_planck = 1.054571817e-34;   // J s
inline constexpr double boltzmann = 1.380649e-23;           // J/K
inline constexpr double two_pi = 2.0 * std::numbers::pi;
}  // namespace constants

namespace units {
inline constexpr double giga = 1e9;
inline constexpr double nano = 1e-9;
inline constexpr double pico = 1e-12;
inline constexpr double femto = 1e-15;
inline constexpr double milli = 1e-3;
inline constexpr double micro = 1e-6;
}  // namespace units

/// Angular frequency in rad/s. Constructed only through the named factories
/// so a cyclic value can never be passed where an angular one is expected.
class Frequency {
 public:
  constexpr Frequency() = default;

  static constexpr Frequency angular(double rad_per_s) { return Frequency(rad_per_s); }
  static constexpr Frequency hz(double cyclic) { return Frequency(constants::two_pi * cyclic); }
  static constexpr Frequency ghz(double cyclic) { return hz(cyclic * units::giga); }

  constexpr double rad_per_s() const { return value_; }
  constexpr double in_hz() const { return value_ / constants::two_pi; }
  constexpr double in_ghz() const { return in_hz() / units::giga; }

  friend constexpr auto operator<=>(Frequency, Frequency) = default;

 private:
  constexpr explicit Frequency(double v) : value_(v) {}
  double value_ = 0.0;
};

/// Converts a cyclic frequency to angular; rejects f <= 0.
inline Frequency to_angular(double cyclic_hz) {
  if (!(cyclic_hz > 0.0)) {
    fail(ErrorKind::domain, "frequency must be positive, got " + std::to_string(cyclic_hz) + " Hz");
  }
  return Frequency::hz(cyclic_hz);
}

enum class ImmittanceKind { impedance, admittance };

/// A complex impedance (ohm) or admittance (siemens), tagged with its kind.
/// Passivity (Re >= 0) is not enforced: pumped elements are active.
struct ComplexImmittance {
  complex value;
  ImmittanceKind kind = ImmittanceKind::impedance;

  static ComplexImmittance impedance(complex z) { return {z, ImmittanceKind::impedance}; }
  static ComplexImmittance admittance(complex y) { return {y, ImmittanceKind::admittance}; }

  bool is_impedance() const { return kind == ImmittanceKind::impedance; }
  bool is_admittance() const { return kind == ImmittanceKind::admittance; }

  ComplexImmittance invert() const;
};

inline ComplexImmittance immittance_invert(const ComplexImmittance& x) {
  if (x.value == complex{0.0, 0.0}) {
    fail(ErrorKind::singular_value, std::string("cannot invert a zero ") +
                                        (x.is_impedance() ? "impedance" : "admittance"));
  }
  auto kind = x.is_impedance() ? ImmittanceKind::admittance : ImmittanceKind::impedance;
  return {1.0 / x.value, kind};
}

inline ComplexImmittance ComplexImmittance::invert() const { return immittance_invert(*this); }

}  // namespace jpaforge
