// analysis.hpp - turns survival curves into numbers: short-time power-law
// fits (alpha, p), exponential-law fits (Gamma), and series comparison.
//
// Both fits are plain least squares in log space. That is deterministic,
// adequate at desk scale, and easy to property-test.
#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "zenolab/errors.hpp"
#include "zenolab/series.hpp"

namespace zenolab {

enum class FitQuality { ok, window_too_short, non_exponential };

inline const char* to_string(FitQuality q) {
  switch (q) {
    case FitQuality::ok: return "ok";
    case FitQuality::window_too_short: return "window_too_short";
    case FitQuality::non_exponential: return "non_exponential";
  }
  return "?";
}

struct FitReport {
  double estimate = std::numeric_limits<double>::quiet_NaN();  // alpha or Gamma
  double exponent = std::numeric_limits<double>::quiet_NaN();  // p (short-time fit only)
  double window_lo = 0.0;
  double window_hi = 0.0;
  double residual = 0.0;  // RMS of log-residuals
  FitQuality quality = FitQuality::window_too_short;
  std::size_t n_samples = 0;
};

// Floors guarding against fitting the log of rounding noise.
inline constexpr double kDeficitFloor = 1e-14;   // smallest trusted 1 - s
inline constexpr double kSurvivalFloor = 1e-12;  // smallest trusted s

namespace detail {

struct LineFit {
  double slope = 0.0, intercept = 0.0, rms = 0.0;
};

inline LineFit least_squares_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  LineFit f;
  const double denom = n * sxx - sx * sx;
  f.slope = (n * sxy - sx * sy) / denom;
  f.intercept = (sy - f.slope * sx) / n;
  double ss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss += r * r;
  }
  f.rms = std::sqrt(ss / n);
  return f;
}

}  // namespace detail

// Fit 1 - s(t) = alpha * t^p on [window_lo, window_hi] via log-log least
// squares. Returns alpha as `estimate` and p as `exponent`. Samples whose
// deficit is below the noise floor are ignored; fewer than 4 usable samples
// flags window_too_short.
inline FitReport fit_short_time(const SurvivalSeries& s, double window_lo, double window_hi) {
  if (!(window_lo < window_hi)) throw contract_error("fit_short_time: empty window");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double t = s.time(i);
    if (t < window_lo || t > window_hi || t <= 0.0) continue;
    const double deficit = 1.0 - s.value(i);
    if (deficit <= kDeficitFloor) continue;
    x.push_back(std::log(t));
    y.push_back(std::log(deficit));
  }
  FitReport rep;
  rep.window_lo = window_lo;
  rep.window_hi = window_hi;
  rep.n_samples = x.size();
  if (x.size() < 4) {
    rep.quality = FitQuality::window_too_short;
    return rep;
  }
  const auto f = detail::least_squares_line(x, y);
  rep.estimate = std::exp(f.intercept);
  rep.exponent = f.slope;
  rep.residual = f.rms;
  rep.quality = FitQuality::ok;
  return rep;
}

// Fit s(t) = A * exp(-Gamma t) on [window_lo, window_hi] via log-linear least
// squares. Returns Gamma as `estimate`. Fewer than 8 usable samples flags
// window_too_short; RMS log-residual above 0.05 flags non_exponential.
inline FitReport fit_exponential(const SurvivalSeries& s, double window_lo, double window_hi) {
  if (!(window_lo < window_hi)) throw contract_error("fit_exponential: empty window");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double t = s.time(i);
    if (t < window_lo || t > window_hi) continue;
    const double v = s.value(i);
    if (v <= kSurvivalFloor) continue;
    x.push_back(t);
    y.push_back(std::log(v));
  }
  FitReport rep;
  rep.window_lo = window_lo;
  rep.window_hi = window_hi;
  rep.n_samples = x.size();
  if (x.size() < 8) {
    rep.quality = FitQuality::window_too_short;
    return rep;
  }
  const auto f = detail::least_squares_line(x, y);
  rep.estimate = -f.slope;
  rep.exponent = 1.0;
  rep.residual = f.rms;
  rep.quality = (f.rms > 0.05) ? FitQuality::non_exponential : FitQuality::ok;
  return rep;
}

struct ComparisonReport {
  double max_abs = 0.0;
  double at_time = 0.0;
  double rms = 0.0;
};

// Pointwise comparison of two series on the identical time grid. The grids
// must match exactly; comparisons at theorem precision (~1e-10) must not go
// through interpolation, so resampling is deliberately unsupported.
inline ComparisonReport compare_survival(const SurvivalSeries& a, const SurvivalSeries& b) {
  if (a.size() != b.size()) throw contract_error("compare_survival: grid size mismatch");
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a.time(i) != b.time(i))
      throw contract_error("compare_survival: time grids differ at sample " + std::to_string(i));
  ComparisonReport rep;
  double ss = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = std::abs(a.value(i) - b.value(i));
    ss += d * d;
    if (d > rep.max_abs) {
      rep.max_abs = d;
      rep.at_time = a.time(i);
    }
  }
  rep.rms = std::sqrt(ss / static_cast<double>(a.size()));
  return rep;
}

}  // namespace zenolab
