#include <algorithm>
#include <chrono>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "jpaforge/optimizer.hpp"
#include "jpaforge/reference.hpp"
#include "support.hpp"

using namespace jpaforge;
using jpatest::Gen;

namespace {

int rank(ProfileClass c) { return static_cast<int>(c); }

}  // namespace

TEST(Parameters, NamesRoundTrip) {
  for (auto p : {Parameter::z_odd, Parameter::reactance_slope, Parameter::phi_dc, Parameter::phi_ac,
                 Parameter::pump_frequency, Parameter::shunt_capacitance}) {
    EXPECT_EQ(parameter_from_name(to_string(p)), p);
  }
  EXPECT_ERROR_KIND(parameter_from_name("gain"), ErrorKind::usage);
}

TEST(Parameters, ApplyTargetsTheRightField) {
  const auto base = reference::amplifier(1e-9);
  EXPECT_EQ(apply_parameter(base, Parameter::phi_ac, 0.2).bias.phi_ac, 0.2);
  const auto c = apply_parameter(base, Parameter::shunt_capacitance, 3e-12);
  EXPECT_EQ(c.squid.shunt_capacitance, 3e-12);
  EXPECT_EQ(c.environment.shunt_capacitance, 3e-12);
  const auto z = apply_parameter(base, Parameter::z_odd, 12.0);
  EXPECT_EQ(std::get<RuthroffTransformer>(z.environment.elements[0]).spec.z_odd(), 12.0);
  const auto s = apply_parameter(base, Parameter::reactance_slope, 2e-9);
  EXPECT_EQ(std::get<SlopeResonator>(s.environment.elements[1]).slope, 2e-9);
  AmplifierConfig bare = base;
  bare.environment.elements.clear();
  EXPECT_ERROR_KIND(apply_parameter(bare, Parameter::z_odd, 12.0), ErrorKind::usage);
  EXPECT_ERROR_KIND(apply_parameter(bare, Parameter::reactance_slope, 1e-9), ErrorKind::usage);
}

TEST(ParameterSpace, Validation) {
  EXPECT_ERROR_KIND(ParameterSpace{}.validate(), ErrorKind::usage);
  EXPECT_ERROR_KIND((ParameterSpace{{{Parameter::phi_ac, 0.2, 0.1}}}.validate()), ErrorKind::usage);
  EXPECT_ERROR_KIND((ParameterSpace{{{Parameter::phi_ac, 0.1, 0.2}, {Parameter::phi_ac, 0.1, 0.3}}}.validate()),
                    ErrorKind::usage);
}

TEST(Sweep, ReferenceSlopeClasses) {
  const std::vector<double> slopes{0.0, 0.7e-9, reference::flat_slope, 2.2e-9};
  SweepSettings s;
  s.grid = reference::grid();
  s.band = reference::flat_band();
  const auto rows = sweep(reference::amplifier(), Parameter::reactance_slope, slopes, s);
  ASSERT_EQ(rows.size(), 4u);
  for (const auto& r : rows) ASSERT_TRUE(r.metrics && r.metrics->profile) << r.message;
  EXPECT_EQ(*rows[0].metrics->profile, ProfileClass::lorentzian);
  // The model places the lorentzian/flattened boundary between 1.0 and
  // 1.2 nH, so 0.7 nH is still lorentzian here.
  EXPECT_EQ(*rows[1].metrics->profile, ProfileClass::lorentzian);
  EXPECT_EQ(*rows[2].metrics->profile, ProfileClass::flattened);
  EXPECT_EQ(*rows[3].metrics->profile, ProfileClass::double_peaked);
}

TEST(Sweep, SlopeClassesAreOrdered) {
  std::vector<double> slopes;
  for (int i = 0; i <= 60; ++i) slopes.push_back(2.4e-9 * i / 60.0);
  SweepSettings s;
  s.grid = reference::grid();
  const auto rows = sweep(reference::amplifier(), "reactance_slope", slopes, s);
  int prev = rank(ProfileClass::lorentzian);
  std::vector<int> seen(3, 0);
  for (const auto& r : rows) {
    ASSERT_TRUE(r.metrics && r.metrics->profile) << r.message;
    const int k = rank(*r.metrics->profile);
    EXPECT_GE(k, prev) << "slope " << r.value;
    prev = k;
    ++seen[k];
  }
  EXPECT_GT(seen[0], 0);
  EXPECT_GT(seen[1], 0);
  EXPECT_GT(seen[2], 0);
}

TEST(Sweep, PeakGainRisesWithPumpUntilThreshold) {
  std::vector<double> amps;
  for (int i = 1; i <= 400; ++i) amps.push_back(0.25 * i / 400.0);
  SweepSettings s;
  s.grid = reference::grid();
  const auto rows = sweep(reference::amplifier(), Parameter::phi_ac, amps, s);
  std::size_t top = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ASSERT_TRUE(rows[i].metrics) << rows[i].message;
    if (rows[i].metrics->peak_gain_db > rows[top].metrics->peak_gain_db) top = i;
  }
  for (std::size_t i = 1; i <= top; ++i) {
    EXPECT_GT(rows[i].metrics->peak_gain_db, rows[i - 1].metrics->peak_gain_db) << amps[i];
  }
  // The maximum is the oscillation threshold, not the end of the range.
  EXPECT_LT(top + 1, rows.size());
  EXPECT_GT(rows[top].metrics->peak_gain_db, 35.0);
}

TEST(Sweep, SinglePointGridMatchesDirectEvaluation) {
  SweepSettings s;
  s.grid = {Frequency::ghz(6.1)};
  const std::vector<double> v{0.16};
  const auto rows = sweep(reference::amplifier(), Parameter::phi_ac, v, s);
  ASSERT_EQ(rows.size(), 1u);
  auto c = reference::amplifier();
  c.bias.phi_ac = 0.16;
  EXPECT_EQ(rows[0].metrics->peak_gain_db, 20.0 * std::log10(std::abs(evaluate_gain(c, Frequency::ghz(6.1)))));
}

TEST(Sweep, FailuresAreRecordedPerRow) {
  SweepSettings s;
  s.grid = reference::grid();
  const std::vector<double> v{0.25, 0.55};
  const auto rows = sweep(reference::amplifier(), Parameter::phi_dc, v, s);
  EXPECT_TRUE(rows[0].metrics);
  ASSERT_TRUE(rows[1].error);
  EXPECT_EQ(*rows[1].error, ErrorKind::divergence);
}

TEST(Evaluate, InvalidValuesBecomeInfeasible) {
  const ParameterSpace space{{{Parameter::phi_dc, 0.0, 1.0}}};
  const std::vector<double> v{0.7};
  const auto ev = evaluate_design(reference::amplifier(), space, v, reference::objective());
  EXPECT_FALSE(ev.feasible);
  EXPECT_EQ(ev.score, 0.0);
  EXPECT_GT(ev.violation, 0.0);
  EXPECT_FALSE(ev.violation_reason.empty());
}

TEST(Evaluate, FeasibleRanksAheadOfInfeasible) {
  Evaluation a, b;
  a.feasible = true;
  a.score = 1.0;
  b.feasible = false;
  b.violation = 1e-9;
  EXPECT_TRUE(better(a, b));
}

TEST(EvaluateProperty, OrderOfParametersDoesNotMatter) {
  Gen g(51);
  const ParameterSpace ab{{{Parameter::reactance_slope, 0.0, 2.5e-9}, {Parameter::phi_ac, 0.1, 0.2}}};
  const ParameterSpace ba{{{Parameter::phi_ac, 0.1, 0.2}, {Parameter::reactance_slope, 0.0, 2.5e-9}}};
  const auto o = reference::objective();
  for (int i = 0; i < 40; ++i) {
    const double slope = g.uniform(0.0, 2.5e-9), amp = g.uniform(0.1, 0.2);
    const std::vector<double> x{slope, amp}, y{amp, slope};
    const auto e1 = evaluate_design(reference::amplifier(), ab, x, o);
    const auto e2 = evaluate_design(reference::amplifier(), ba, y, o);
    EXPECT_EQ(e1.score, e2.score);
    EXPECT_EQ(e1.feasible, e2.feasible);
    EXPECT_EQ(e1.violation, e2.violation);
  }
}

TEST(Optimize, ReferenceSlopeReachesFlatGain) {
  const auto o = reference::objective();
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = optimize(reference::amplifier(), reference::slope_space(), o);
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  ASSERT_TRUE(r.feasible) << r.best.violation_reason;
  ASSERT_TRUE(r.best.metrics);
  EXPECT_GE(r.best.metrics->peak_gain_db, 20.0);
  EXPECT_LE(r.best.metrics->ripple_db, 1.0);
  EXPECT_LE(r.trace.size(), default_budget);
  EXPECT_EQ(r.seed, default_seed);
  EXPECT_LT(dt, 60.0);

  // Slope 0 at the same gain level.
  const auto lor = gain_metrics(gain_sweep(reference::amplifier(0.0), o.grid), o.target_gain_db - 1.0, o.band);
  EXPECT_GE(r.best.score, 1.5 * lor.bandwidth_at_level_hz);
}

TEST(Optimize, BeatsAnyGridOfHalfTheBudget) {
  const auto o = reference::objective();
  const auto r = optimize(reference::amplifier(), reference::slope_space(), o);
  const auto grid = grid_search(reference::amplifier(), reference::slope_space(), o, default_budget / 2);
  ASSERT_EQ(grid.size(), default_budget / 2);
  double best_grid = 0.0;
  for (const auto& ev : grid) best_grid = std::max(best_grid, ev.score);
  EXPECT_GE(r.best.score, best_grid);
}

TEST(Optimize, StaysInsideBounds) {
  const ParameterSpace space{{{Parameter::reactance_slope, 0.5e-9, 2.0e-9}, {Parameter::phi_ac, 0.12, 0.17}}};
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    const auto r = optimize(reference::amplifier(), space, reference::objective(), 200, seed);
    for (const auto& ev : r.trace) {
      for (std::size_t i = 0; i < space.size(); ++i) {
        EXPECT_GE(ev.values[i], space.bounds[i].lower);
        EXPECT_LE(ev.values[i], space.bounds[i].upper);
      }
    }
  }
}

TEST(Optimize, SameSeedSameTrace) {
  const ParameterSpace space{{{Parameter::reactance_slope, 0.0, 2.5e-9}, {Parameter::phi_ac, 0.12, 0.17}}};
  const auto a = optimize(reference::amplifier(), space, reference::objective(), 150, 99);
  const auto b = optimize(reference::amplifier(), space, reference::objective(), 150, 99);
  ASSERT_EQ(a.trace.size(), b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    EXPECT_EQ(a.trace[i].values, b.trace[i].values);
    EXPECT_EQ(a.trace[i].score, b.trace[i].score);
  }
}

TEST(Optimize, UnreachableTargetIsInfeasible) {
  auto weak = reference::amplifier();
  weak.bias.phi_ac = 0.05;
  const ParameterSpace space{{{Parameter::reactance_slope, 0.0, 1.0e-9}}};
  const auto r = optimize(weak, space, reference::objective(60.0), 100);
  EXPECT_FALSE(r.feasible);
  EXPECT_GT(r.best.violation, 0.0);
  EXPECT_NE(r.best.violation_reason.find("peak below target"), std::string::npos);
}

TEST(Optimize, TinyBudgetIsUsageError) {
  EXPECT_ERROR_KIND(optimize(reference::amplifier(), reference::slope_space(), reference::objective(), 5),
                    ErrorKind::usage);
}

TEST(GridSearch, TwoDimensionalCountAndLimits) {
  const ParameterSpace space{{{Parameter::reactance_slope, 0.0, 2.5e-9}, {Parameter::phi_ac, 0.12, 0.17}}};
  const auto g = grid_search(reference::amplifier(), space, reference::objective(), 5);
  EXPECT_EQ(g.size(), 25u);
  const ParameterSpace three{{{Parameter::reactance_slope, 0.0, 2.5e-9},
                              {Parameter::phi_ac, 0.12, 0.17},
                              {Parameter::phi_dc, 0.2, 0.3}}};
  EXPECT_ERROR_KIND(grid_search(reference::amplifier(), three, reference::objective(), 5), ErrorKind::usage);
}
