#pragma once

// Two-port cascade engine and the Ruthroff coupled-line transformer.
//
// The environment seen by the SQUID is described as an ordered chain of
// lossless elements running from the source (the input line) to the SQUID
// plane. The chain is reduced with ABCD matrices; a Ruthroff transformer,
// which is only available as a terminated one-port, must sit next to the
// source and replaces the source impedance with its looking-back impedance.

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "jpaforge/error.hpp"
#include "jpaforge/quantities.hpp"

namespace jpaforge {

struct AbcdMatrix {
  complex a{1.0, 0.0};
  complex b{0.0, 0.0};  // ohm
  complex c{0.0, 0.0};  // siemens
  complex d{1.0, 0.0};

  static AbcdMatrix identity() { return {}; }

  complex determinant() const { return a * d - b * c; }

  bool is_reciprocal(double tolerance = 1e-9) const {
    return std::abs(determinant() - 1.0) <= tolerance;
  }

  friend AbcdMatrix operator*(const AbcdMatrix& l, const AbcdMatrix& r) {
    return {l.a * r.a + l.b * r.c, l.a * r.b + l.b * r.d,
            l.c * r.a + l.d * r.c, l.c * r.b + l.d * r.d};
  }
};

/// Electrical length theta = beta*l of a line section, in radians.
struct ElectricalAngle {
  double radians = 0.0;

  static ElectricalAngle of(Frequency omega, double length, double velocity) {
    return {omega.rad_per_s() * length / velocity};
  }
};

/// Smallest even/odd impedance ratio for which the tightly-coupled
/// approximation behind ruthroff_impedance() is accepted.
inline constexpr double min_even_odd_ratio = 50.0;

/// Physical and electrical parameters of a broadside-coupled Ruthroff
/// transformer. Validated on construction.
class CoupledLineSpec {
 public:
  CoupledLineSpec(double z_high, double z_odd, double z_even, double length, double odd_mode_velocity)
      : z_high_(z_high), z_odd_(z_odd), z_even_(z_even), length_(length), velocity_(odd_mode_velocity) {
    if (!(z_high > 0.0)) fail(ErrorKind::domain, "transformer z_high must be positive");
    if (!(z_odd > 0.0)) fail(ErrorKind::domain, "transformer z_odd must be positive");
    if (!(length > 0.0)) fail(ErrorKind::domain, "transformer length must be positive");
    if (!(odd_mode_velocity > 0.0)) fail(ErrorKind::domain, "transformer odd-mode velocity must be positive");
    if (!(z_even / z_odd >= min_even_odd_ratio)) {
      fail(ErrorKind::domain, "transformer even/odd impedance ratio " + std::to_string(z_even / z_odd) +
                                  " is below the tight-coupling minimum of 50");
    }
  }

  double z_high() const { return z_high_; }
  double z_odd() const { return z_odd_; }
  double z_even() const { return z_even_; }
  double length() const { return length_; }
  double odd_mode_velocity() const { return velocity_; }

  ElectricalAngle angle(Frequency omega) const { return ElectricalAngle::of(omega, length_, velocity_); }

  /// Frequency at which the lines are half a wavelength long (theta = pi).
  Frequency cutoff() const { return Frequency::angular(std::numbers::pi * velocity_ / length_); }

  CoupledLineSpec with_z_odd(double z_odd) const {
    return CoupledLineSpec(z_high_, z_odd, z_even_, length_, velocity_);
  }

 private:
  double z_high_;
  double z_odd_;
  double z_even_;
  double length_;
  double velocity_;
};

/// Looking-back impedance at the low-impedance port of the transformer,
/// with the high-impedance port terminated in z_high.
inline complex ruthroff_impedance(const CoupledLineSpec& spec, ElectricalAngle theta) {
  const double zo = spec.z_high();
  const double zoo = spec.z_odd();
  const double cos_t = std::cos(theta.radians);
  const double sin_t = std::sin(theta.radians);
  const complex numerator{zo * cos_t, -2.0 * zoo * sin_t};
  const complex denominator{4.0 * zoo * (cos_t + 1.0), -zo * sin_t};
  if (std::abs(denominator) < 1e-12 * zo) {
    throw PoleError("transformer pole at theta = " + std::to_string(theta.radians) +
                        " rad; cutoff frequency " + std::to_string(spec.cutoff().in_hz()) + " Hz",
                    spec.cutoff().rad_per_s());
  }
  return 2.0 * zoo * numerator / denominator;
}

inline ComplexImmittance ruthroff_impedance(const CoupledLineSpec& spec, Frequency omega) {
  if (!(omega.rad_per_s() > 0.0)) fail(ErrorKind::domain, "frequency must be positive");
  return ComplexImmittance::impedance(ruthroff_impedance(spec, spec.angle(omega)));
}

struct TransformerPoint {
  Frequency omega;
  std::optional<complex> z_ext;  // empty at a pole
  double ratio_mag = 0.0;        // |Z_o / Z_ext|
  double ratio_re = 0.0;         // Re(Z_o / Z_ext)
  std::string error;

  bool ok() const { return z_ext.has_value(); }
};

/// Impedance transformation ratio over a strictly increasing grid. Points at
/// the pole are reported individually; the rest of the grid is unaffected.
inline std::vector<TransformerPoint> transformation_ratio(const CoupledLineSpec& spec,
                                                          std::span<const Frequency> grid) {
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) fail(ErrorKind::usage, "frequency grid must be strictly increasing");
  }
  std::vector<TransformerPoint> out;
  out.reserve(grid.size());
  for (Frequency omega : grid) {
    TransformerPoint p{omega, std::nullopt, 0.0, 0.0, {}};
    try {
      const complex z = ruthroff_impedance(spec, omega).value;
      const complex ratio = spec.z_high() / z;
      p.z_ext = z;
      p.ratio_mag = std::abs(ratio);
      p.ratio_re = ratio.real();
    } catch (const PoleError& e) {
      p.error = e.what();
    }
    out.push_back(std::move(p));
  }
  return out;
}

// Element two-ports. All are lossless and reciprocal.

inline AbcdMatrix series_impedance_abcd(complex z) { return {1.0, z, 0.0, 1.0}; }
inline AbcdMatrix shunt_admittance_abcd(complex y) { return {1.0, 0.0, y, 1.0}; }

inline AbcdMatrix tline_abcd(double z_c, double velocity, double length, Frequency omega) {
  if (!(z_c > 0.0)) fail(ErrorKind::domain, "line impedance must be positive");
  if (!(velocity > 0.0)) fail(ErrorKind::domain, "line velocity must be positive");
  if (!(length >= 0.0)) fail(ErrorKind::domain, "line length must be non-negative");
  const double theta = omega.rad_per_s() * length / velocity;
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return {c, complex{0.0, z_c * s}, complex{0.0, s / z_c}, c};
}

/// Left-to-right product; the empty product is the identity.
inline AbcdMatrix cascade(std::span<const AbcdMatrix> ms) {
  AbcdMatrix acc = AbcdMatrix::identity();
  for (const auto& m : ms) acc = acc * m;
  return acc;
}

struct TransmissionLine {
  double z_c;       // ohm
  double velocity;  // m/s
  double length;    // m
};
struct SeriesInductor {
  double inductance;  // H
};
struct SeriesCapacitor {
  double capacitance;  // F
};
struct ShuntCapacitor {
  double capacitance;  // F
};
/// Series LC resonant at `center` whose reactance slope dX/domega there
/// equals `slope` (L = slope/2, C = 1/(center^2 L)). A zero slope is a
/// through connection. Stands in for the cable-length tuning of the
/// reactive part of the environment.
struct SlopeResonator {
  double slope;  // H
  Frequency center;
};
struct RuthroffTransformer {
  CoupledLineSpec spec;
};

using Element = std::variant<TransmissionLine, SeriesInductor, SeriesCapacitor, ShuntCapacitor,
                             SlopeResonator, RuthroffTransformer>;

inline AbcdMatrix element_abcd(const Element& element, Frequency omega) {
  const double w = omega.rad_per_s();
  struct Visitor {
    double w;
    Frequency omega;
    AbcdMatrix operator()(const TransmissionLine& t) const { return tline_abcd(t.z_c, t.velocity, t.length, omega); }
    AbcdMatrix operator()(const SeriesInductor& l) const {
      return series_impedance_abcd({0.0, w * l.inductance});
    }
    AbcdMatrix operator()(const SeriesCapacitor& c) const {
      if (!(c.capacitance > 0.0)) fail(ErrorKind::domain, "series capacitance must be positive");
      return series_impedance_abcd({0.0, -1.0 / (w * c.capacitance)});
    }
    AbcdMatrix operator()(const ShuntCapacitor& c) const {
      return shunt_admittance_abcd({0.0, w * c.capacitance});
    }
    AbcdMatrix operator()(const SlopeResonator& r) const {
      if (!(r.slope >= 0.0)) fail(ErrorKind::domain, "reactance slope must be non-negative");
      if (r.slope == 0.0) return AbcdMatrix::identity();
      const double l = 0.5 * r.slope;
      const double wc = r.center.rad_per_s();
      // omega*L - 1/(omega*C) with C = 1/(wc^2 L)
      return series_impedance_abcd({0.0, l * (w - wc * wc / w)});
    }
    AbcdMatrix operator()(const RuthroffTransformer&) const {
      fail(ErrorKind::usage, "a Ruthroff transformer has no two-port form; place it first in the chain");
    }
  };
  return std::visit(Visitor{w, omega}, element);
}

/// Everything between the source and the SQUID plane, plus the resonance
/// capacitor at the SQUID plane.
struct EnvironmentChain {
  double source_impedance = 50.0;  // ohm, real
  std::vector<Element> elements;
  double shunt_capacitance = 0.0;  // F

  void validate() const {
    if (!(source_impedance > 0.0)) fail(ErrorKind::domain, "source impedance must be positive");
    if (!(shunt_capacitance >= 0.0)) fail(ErrorKind::domain, "shunt capacitance must be non-negative");
    for (std::size_t i = 0; i < elements.size(); ++i) {
      if (const auto* t = std::get_if<RuthroffTransformer>(&elements[i])) {
        if (i != 0) fail(ErrorKind::usage, "the Ruthroff transformer must be the element adjacent to the source");
        if (std::abs(t->spec.z_high() - source_impedance) > 1e-9 * source_impedance) {
          fail(ErrorKind::usage, "transformer z_high must equal the source impedance");
        }
      }
    }
  }

  const RuthroffTransformer* transformer() const {
    return elements.empty() ? nullptr : std::get_if<RuthroffTransformer>(&elements.front());
  }
};

namespace detail {

// Impedance presented by the source side of the chain at the input of the
// first two-port element, and the cascade of the remaining elements.
struct ReducedChain {
  complex z_source;
  AbcdMatrix m;
};

inline ReducedChain reduce(const EnvironmentChain& chain, Frequency omega) {
  if (!(omega.rad_per_s() > 0.0)) fail(ErrorKind::domain, "frequency must be positive");
  chain.validate();
  std::span<const Element> rest(chain.elements);
  complex z_src{chain.source_impedance, 0.0};
  if (const auto* t = chain.transformer()) {
    z_src = ruthroff_impedance(t->spec, omega).value;
    rest = rest.subspan(1);
  }
  AbcdMatrix m = AbcdMatrix::identity();
  for (const auto& e : rest) m = m * element_abcd(e, omega);
  return {z_src, m};
}

}  // namespace detail

/// Impedance looking from the SQUID plane back towards the source, without
/// the shunt capacitor.
inline ComplexImmittance looking_back_impedance(const EnvironmentChain& chain, Frequency omega) {
  const auto [zs, m] = detail::reduce(chain, omega);
  // Reversed reciprocal two-port: A and D swap roles.
  const complex den = m.c * zs + m.a;
  if (den == complex{0.0, 0.0}) fail(ErrorKind::singular_value, "looking-back admittance is zero");
  return ComplexImmittance::impedance((m.d * zs + m.b) / den);
}

/// Y_ext(omega): admittance of the environment seen by the SQUID, including
/// the shunt resonance capacitor.
inline ComplexImmittance environment_admittance(const EnvironmentChain& chain, Frequency omega) {
  const auto [zs, m] = detail::reduce(chain, omega);
  const complex den = m.d * zs + m.b;
  if (den == complex{0.0, 0.0}) fail(ErrorKind::singular_value, "looking-back impedance is zero");
  const complex y_back = (m.c * zs + m.a) / den;
  return ComplexImmittance::admittance(y_back + complex{0.0, omega.rad_per_s() * chain.shunt_capacitance});
}

/// d Im(Z_back)/d omega at omega0 by a central difference with step
/// 1e-5*omega0. Units of henry.
inline double reactance_slope(const EnvironmentChain& chain, Frequency omega0) {
  const double w0 = omega0.rad_per_s();
  if (!(w0 > 0.0)) fail(ErrorKind::domain, "frequency must be positive");
  const double h = 1e-5 * w0;
  if (const auto* t = chain.transformer()) {
    // A pole inside the stencil makes the difference meaningless even if
    // neither sample lands exactly on it.
    const double wc = t->spec.cutoff().rad_per_s();
    for (double k = 1.0; k * wc <= w0 + h; k += 2.0) {
      if (k * wc >= w0 - h) {
        throw PoleError("transformer pole inside the reactance-slope stencil at " +
                            std::to_string(omega0.in_hz()) + " Hz",
                        wc);
      }
    }
  }
  const double x_hi = looking_back_impedance(chain, Frequency::angular(w0 + h)).value.imag();
  const double x_lo = looking_back_impedance(chain, Frequency::angular(w0 - h)).value.imag();
  return (x_hi - x_lo) / (2.0 * h);
}

}  // namespace jpaforge
