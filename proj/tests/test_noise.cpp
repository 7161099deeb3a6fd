#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "jpaforge/noise.hpp"
#include "support.hpp"

using namespace jpaforge;
using jpatest::Gen;
using jpatest::rel_err;

namespace {

const Frequency f6 = Frequency::ghz(6.0);

NoiseDataset synthetic(Frequency w, double gain, double t_sys, const std::vector<double>& temps) {
  NoiseDataset d{w, {}};
  for (double t : temps) d.samples.push_back({t, noise_forward(w, t, gain, t_sys)});
  return d;
}

std::vector<double> spaced(double lo, double hi, int n) {
  std::vector<double> t(n);
  for (int i = 0; i < n; ++i) t[i] = lo + (hi - lo) * i / (n - 1);
  return t;
}

}  // namespace

TEST(Planck, ThreeKelvinAtSixGigahertz) {
  // hbar w / k = 0.2879 K; x = 0.2879/3; P = 0.2879/(e^x - 1)
  const double tq = 1.054571817e-34 * 2 * std::numbers::pi * 6e9 / 1.380649e-23;
  EXPECT_LE(rel_err(tq, 0.2879), 1e-3);
  const double oracle = tq / (std::exp(tq / 3.0) - 1.0);
  EXPECT_LE(rel_err(planck_occupancy_temperature(f6, 3.0), oracle), 1e-12);
  EXPECT_LE(rel_err(planck_occupancy_temperature(f6, 3.0), 2.858), 1e-3);
}

TEST(Planck, RayleighJeansLimit) {
  const double tq = photon_temperature(f6);
  const double t = 100.0 * tq;
  EXPECT_LE(rel_err(planck_occupancy_temperature(f6, t), t - tq / 2.0), 1e-3);
}

TEST(Planck, FrozenOut) {
  EXPECT_LT(planck_occupancy_temperature(f6, 0.01 * photon_temperature(f6)), 1e-40);
}

TEST(Planck, NonPositiveTemperature) {
  EXPECT_ERROR_KIND(planck_occupancy_temperature(f6, 0.0), ErrorKind::domain);
}

TEST(PlanckProperty, MonotoneInTemperatureAndFrequency) {
  Gen g(41);
  for (int i = 0; i < 20000; ++i) {
    const double t = g.log_uniform(0.01, 10.0);
    const Frequency w = Frequency::ghz(g.uniform(1.0, 20.0));
    const double dt = t * g.uniform(1e-6, 0.5);
    const Frequency w2 = Frequency::angular(w.rad_per_s() * (1.0 + g.uniform(1e-6, 0.5)));
    EXPECT_GT(planck_occupancy_temperature(w, t + dt), planck_occupancy_temperature(w, t));
    EXPECT_LT(planck_occupancy_temperature(w2, t), planck_occupancy_temperature(w, t));
  }
}

TEST(NoiseForward, Examples) {
  EXPECT_LT(noise_forward(f6, 1e-3, 50.0, 0.0), 1e-40);
  const double p = planck_occupancy_temperature(f6, 3.0);
  EXPECT_NEAR(noise_forward(f6, 3.0, 100.0, 0.38), 2.0 * 100.0 * (p + 0.38), 1e-12);
  // 647.6 is built from P rounded to 2.858, so it carries that 0.1%.
  EXPECT_LE(rel_err(noise_forward(f6, 3.0, 100.0, 0.38), 647.6), 1e-3);
  EXPECT_EQ(noise_forward(f6, 3.0, 200.0, 0.38), 2.0 * noise_forward(f6, 3.0, 100.0, 0.38));
}

TEST(AddedPhotons, Examples) {
  const Frequency w = Frequency::ghz(6.35);
  // k T / (hbar w) with T = 0.38 K
  const double oracle = 1.380649e-23 * 0.38 / (1.054571817e-34 * 2 * std::numbers::pi * 6.35e9);
  EXPECT_LE(rel_err(added_photons(0.38, w), oracle), 1e-12);
  EXPECT_LE(rel_err(added_photons(0.38, w), 1.25), 0.01);
  EXPECT_EQ(added_photons(0.0, w), 0.0);
  EXPECT_EQ(added_photons(sql_temperature(w), w), 0.5);
}

TEST(SqlTemperature, Examples) {
  EXPECT_LE(rel_err(sql_temperature(f6), 0.1440), 1e-3);
  EXPECT_EQ(sql_temperature(Frequency::ghz(12.0)), 2.0 * sql_temperature(f6));
  Gen g(42);
  for (int i = 0; i < 10000; ++i) {
    const Frequency w = Frequency::ghz(g.log_uniform(0.1, 100.0));
    EXPECT_EQ(added_photons(sql_temperature(w), w), 0.5);
  }
}

TEST(FitNoise, NoiselessRoundTrip) {
  const auto d = synthetic(f6, 50.0, 0.5, spaced(0.05, 3.0, 10));
  const auto r = fit_noise(d);
  EXPECT_LE(rel_err(r.gain, 50.0), 1e-9);
  EXPECT_LE(rel_err(r.t_sys, 0.5), 1e-9);
  EXPECT_FALSE(r.t_sys_clamped);
  EXPECT_LE(r.residual_rms, 1e-9 * 50.0);
}

TEST(FitNoise, TwoSamplesInterpolateExactly) {
  const auto d = synthetic(f6, 80.0, 0.3, {0.1, 2.0});
  const auto r = fit_noise(d);
  EXPECT_LE(rel_err(r.gain, 80.0), 1e-12);
  EXPECT_LE(rel_err(r.t_sys, 0.3), 1e-12);
  EXPECT_LE(r.residual_rms, 1e-12);
  EXPECT_EQ(r.gain_stderr, 0.0);
}

TEST(FitNoise, RepeatedTemperatureIsDegenerate) {
  const auto d = synthetic(f6, 80.0, 0.3, {1.0, 1.0, 1.0});
  EXPECT_ERROR_KIND(fit_noise(d), ErrorKind::degenerate_fit);
}

TEST(FitNoise, NegativeIntercept) {
  auto d = synthetic(f6, 80.0, 0.0, spaced(0.1, 3.0, 6));
  for (auto& s : d.samples) s.psd -= 20.0;
  const auto r = fit_noise(d);
  EXPECT_TRUE(r.t_sys_clamped);
  EXPECT_EQ(r.t_sys, 0.0);
  EXPECT_LT(r.t_sys_unconstrained, 0.0);
  EXPECT_EQ(r.n_add, 0.0);
  EXPECT_FALSE(r.warnings.empty());
}

TEST(FitNoise, NarrowTemperatureSpanWarns) {
  const auto r = fit_noise(synthetic(f6, 80.0, 0.3, {1.0, 1.5}));
  EXPECT_FALSE(r.warnings.empty());
}

TEST(FitNoise, RejectsBadSamples) {
  EXPECT_ERROR_KIND(fit_noise(synthetic(f6, 80.0, 0.3, {1.0})), ErrorKind::usage);
  auto d = synthetic(f6, 80.0, 0.3, {1.0, 2.0});
  d.samples[0].temperature = -1.0;
  EXPECT_ERROR_KIND(fit_noise(d), ErrorKind::domain);
}

TEST(FitNoise, WeightsDownplayOutliers) {
  auto d = synthetic(f6, 50.0, 0.5, spaced(0.1, 3.0, 8));
  d.samples[3].psd *= 1.5;
  for (auto& s : d.samples) s.weight = 1.0;
  d.samples[3].weight = 1e-12;
  const auto r = fit_noise(d);
  EXPECT_LE(rel_err(r.t_sys, 0.5), 1e-6);
}

TEST(FitNoiseProperty, RoundTripOverRandomParameters) {
  Gen g(43);
  for (int i = 0; i < 5000; ++i) {
    const double gain = g.log_uniform(10.0, 1e4);
    const double t_sys = g.uniform(0.05, 2.0);
    const Frequency w = Frequency::ghz(g.uniform(4.0, 8.0));
    const int n = 2 + static_cast<int>(g.uniform(0.0, 30.0));
    std::vector<double> temps(n);
    for (auto& t : temps) t = g.uniform(0.02, 4.0);
    temps[0] = 0.05;
    temps[1] = 3.5;
    const auto r = fit_noise(synthetic(w, gain, t_sys, temps));
    EXPECT_LE(rel_err(r.gain, gain), 1e-9);
    EXPECT_LE(rel_err(r.t_sys, t_sys), 1e-9);
  }
}

TEST(FitNoiseProperty, InvariantUnderReorderingAndScaling) {
  Gen g(44);
  for (int i = 0; i < 500; ++i) {
    auto d = synthetic(f6, g.log_uniform(10.0, 1e3), g.uniform(0.05, 2.0), spaced(0.1, 3.0, 12));
    for (auto& s : d.samples) s.psd *= 1.0 + 0.01 * g.normal();
    const auto base = fit_noise(d);
    auto shuffled = d;
    std::shuffle(shuffled.samples.begin(), shuffled.samples.end(), g.engine());
    const auto r1 = fit_noise(shuffled);
    EXPECT_LE(rel_err(r1.gain, base.gain), 1e-10);
    EXPECT_LE(std::abs(r1.t_sys - base.t_sys), 1e-10);
    const double scale = g.log_uniform(1e-3, 1e3);
    auto scaled = d;
    for (auto& s : scaled.samples) s.psd *= scale;
    const auto r2 = fit_noise(scaled);
    EXPECT_LE(rel_err(r2.gain, base.gain * scale), 1e-10);
    EXPECT_LE(std::abs(r2.t_sys - base.t_sys), 1e-10);
  }
}

TEST(FitNoiseProperty, ResidualsAreZeroMean) {
  Gen g(45);
  const auto temps = spaced(0.4, 3.0, 50);
  double mean_sum = 0.0;
  const int trials = 500;
  for (int i = 0; i < trials; ++i) {
    auto d = synthetic(f6, 50.0, 0.5, temps);
    for (auto& s : d.samples) s.psd *= 1.0 + 0.01 * g.normal();
    const auto r = fit_noise(d);
    double m = 0.0;
    for (const auto& s : d.samples) {
      m += s.psd - noise_forward(f6, s.temperature, r.gain, r.t_sys_unconstrained);
    }
    mean_sum += m / static_cast<double>(temps.size());
  }
  // An OLS fit with an intercept has exactly zero-mean residuals per trial.
  EXPECT_NEAR(mean_sum / trials, 0.0, 1e-9);
}

TEST(FitNoiseProperty, MonteCarloOnePercentNoise) {
  Gen g(46);
  const auto temps = spaced(0.4, 3.0, 50);
  const int trials = 500;
  int within = 0;
  for (int i = 0; i < trials; ++i) {
    auto d = synthetic(f6, 50.0, 0.5, temps);
    for (auto& s : d.samples) s.psd *= 1.0 + 0.01 * g.normal();
    if (std::abs(fit_noise(d).t_sys - 0.5) <= 0.05 * 0.5) ++within;
  }
  EXPECT_GE(within, static_cast<int>(0.95 * trials)) << within << " of " << trials;
}
