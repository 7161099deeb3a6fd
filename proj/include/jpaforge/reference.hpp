#pragma once

// Reference amplifier used by the regression and acceptance suites and
// shipped as configs/reference.toml. A single SQUID resonating near 6 GHz
// behind a 50-to-12.5 ohm Ruthroff transformer and a series tuning
// resonator whose reactance slope is the design knob. Circuit values are
// our own; they are chosen so the flat-gain condition falls at a reactance
// slope of 1.45 nH with the centre gain near 20 dB.

#include <vector>

#include "jpaforge/gain.hpp"
#include "jpaforge/network.hpp"
#include "jpaforge/optimizer.hpp"
#include "jpaforge/pumpistor.hpp"
#include "jpaforge/quantities.hpp"

namespace jpaforge::reference {

inline constexpr double critical_current = 5e-6;      // A, L_J = 65.8 pH
inline constexpr double shunt_capacitance = 7.036e-12; // F
inline constexpr double phi_dc = 0.2768;               // L0 ~ 100 pH
inline constexpr double phi_ac = 0.1548;
inline constexpr double pump_ghz = 12.0;
inline constexpr double centre_ghz = 6.0;

inline constexpr double z_high = 50.0;
inline constexpr double z_odd = 10.0;
inline constexpr double z_even = 1000.0;
inline constexpr double line_length = 0.96e-3;        // m
inline constexpr double odd_mode_velocity = 1.2e8;    // m/s, cutoff 62.5 GHz

inline constexpr double flat_slope = 1.45e-9;         // H

inline AmplifierConfig amplifier(double reactance_slope = 0.0) {
  AmplifierConfig c;
  c.squid = {critical_current, shunt_capacitance};
  c.bias = {phi_dc, phi_ac, Frequency::ghz(pump_ghz)};
  c.environment.source_impedance = z_high;
  c.environment.shunt_capacitance = shunt_capacitance;
  c.environment.elements.emplace_back(
      RuthroffTransformer{CoupledLineSpec(z_high, z_odd, z_even, line_length, odd_mode_velocity)});
  c.environment.elements.emplace_back(SlopeResonator{reactance_slope, Frequency::ghz(centre_ghz)});
  return c;
}

/// 4.5-7.5 GHz in 5 MHz steps.
inline std::vector<Frequency> grid() { return linear_grid(Frequency::ghz(4.5), Frequency::ghz(7.5), 601); }

inline FrequencyBand flat_band() { return {Frequency::ghz(5.75), Frequency::ghz(6.25)}; }

inline Objective objective(double target_gain_db = 20.0) {
  Objective o;
  o.target_gain_db = target_gain_db;
  o.band = flat_band();
  o.ripple_limit_db = 1.0;
  o.grid = grid();
  return o;
}

inline ParameterSpace slope_space() { return {{{Parameter::reactance_slope, 0.0, 2.5e-9}}}; }

}  // namespace jpaforge::reference
