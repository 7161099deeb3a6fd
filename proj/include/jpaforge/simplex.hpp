#pragma once

// Derivative-free Nelder-Mead minimizer with optional box projection.
// Shared by the Lorentzian profile fit and the design optimizer.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

namespace jpaforge {

struct SimplexOptions {
  std::size_t max_evaluations = 1000;
  double f_tolerance = 1e-12;   // stop when best/worst spread falls below this
  double x_tolerance = 1e-10;   // ... or when the simplex diameter does
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
  // Optional box; every trial point is clamped into it before evaluation.
  std::optional<std::vector<double>> lower;
  std::optional<std::vector<double>> upper;
};

struct SimplexResult {
  std::vector<double> x;
  double value = std::numeric_limits<double>::infinity();
  std::size_t evaluations = 0;
  bool converged = false;
};

/// Minimizes `f` from an explicit initial simplex of n+1 vertices.
inline SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                 std::vector<std::vector<double>> simplex, const SimplexOptions& opt = {}) {
  const std::size_t n = simplex.empty() ? 0 : simplex.front().size();
  SimplexResult out;
  if (n == 0 || simplex.size() != n + 1) return out;

  auto project = [&](std::vector<double>& x) {
    if (opt.lower) {
      for (std::size_t i = 0; i < n; ++i) x[i] = std::max(x[i], (*opt.lower)[i]);
    }
    if (opt.upper) {
      for (std::size_t i = 0; i < n; ++i) x[i] = std::min(x[i], (*opt.upper)[i]);
    }
  };
  auto eval = [&](std::vector<double>& x) {
    project(x);
    ++out.evaluations;
    const double v = f(x);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  };

  std::vector<double> fx(n + 1);
  for (std::size_t j = 0; j <= n && out.evaluations < opt.max_evaluations; ++j) fx[j] = eval(simplex[j]);
  if (out.evaluations < n + 1) {
    // Budget smaller than the simplex; report the best evaluated vertex.
    const auto best = std::min_element(fx.begin(), fx.begin() + static_cast<std::ptrdiff_t>(out.evaluations));
    out.x = simplex[static_cast<std::size_t>(best - fx.begin())];
    out.value = *best;
    return out;
  }

  std::vector<std::size_t> order(n + 1);
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fx[a] < fx[b]; });
    std::vector<std::vector<double>> s2(n + 1);
    std::vector<double> f2(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
      s2[k] = std::move(simplex[order[k]]);
      f2[k] = fx[order[k]];
    }
    simplex.swap(s2);
    fx.swap(f2);
  };
  auto along = [&](const std::vector<double>& from, const std::vector<double>& to, double t) {
    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = from[i] + t * (to[i] - from[i]);
    return p;
  };

  while (true) {
    sort_simplex();
    double diameter = 0.0;
    for (std::size_t j = 1; j <= n; ++j) {
      for (std::size_t i = 0; i < n; ++i) diameter = std::max(diameter, std::abs(simplex[j][i] - simplex[0][i]));
    }
    if (std::abs(fx[n] - fx[0]) <= opt.f_tolerance || diameter <= opt.x_tolerance) {
      out.converged = true;
      break;
    }
    if (out.evaluations >= opt.max_evaluations) break;

    std::vector<double> centroid(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < n; ++i) centroid[i] += simplex[j][i] / static_cast<double>(n);
    }

    auto xr = along(centroid, simplex[n], -opt.reflection);
    const double fr = eval(xr);
    if (fr < fx[0]) {
      if (out.evaluations >= opt.max_evaluations) {
        simplex[n] = std::move(xr);
        fx[n] = fr;
        continue;
      }
      auto xe = along(centroid, xr, opt.expansion);
      const double fe = eval(xe);
      if (fe < fr) {
        simplex[n] = std::move(xe);
        fx[n] = fe;
      } else {
        simplex[n] = std::move(xr);
        fx[n] = fr;
      }
    } else if (fr < fx[n - 1]) {
      simplex[n] = std::move(xr);
      fx[n] = fr;
    } else {
      if (out.evaluations >= opt.max_evaluations) break;
      const bool outside = fr < fx[n];
      auto xc = outside ? along(centroid, xr, opt.contraction) : along(centroid, simplex[n], opt.contraction);
      const double fc = eval(xc);
      if (fc < (outside ? fr : fx[n])) {
        simplex[n] = std::move(xc);
        fx[n] = fc;
      } else {
        for (std::size_t j = 1; j <= n && out.evaluations < opt.max_evaluations; ++j) {
          simplex[j] = along(simplex[0], simplex[j], opt.shrink);
          fx[j] = eval(simplex[j]);
        }
      }
    }
  }

  sort_simplex();
  out.x = simplex[0];
  out.value = fx[0];
  return out;
}

/// Axis-aligned initial simplex around `x0` with per-coordinate steps.
inline std::vector<std::vector<double>> axis_simplex(const std::vector<double>& x0, const std::vector<double>& steps) {
  std::vector<std::vector<double>> s(x0.size() + 1, x0);
  for (std::size_t i = 0; i < x0.size(); ++i) s[i + 1][i] += steps[i];
  return s;
}

}  // namespace jpaforge
