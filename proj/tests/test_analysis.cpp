#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "zenolab/analysis.hpp"

using namespace zenolab;

namespace {

SurvivalSeries series_from(double t_max, int n, double (*f)(double)) {
  std::vector<double> times{0.0};
  std::vector<double> values{1.0};
  for (int i = 1; i <= n; ++i) {
    const double t = t_max * i / n;
    times.push_back(t);
    values.push_back(f(t));
  }
  return SurvivalSeries(std::move(times), std::move(values));
}

}  // namespace

TEST_CASE("fit_exponential recovers a constructed rate exactly") {
  const SurvivalSeries s = series_from(50.0, 100, [](double t) { return std::exp(-0.2 * t); });
  const FitReport fit = fit_exponential(s, 1.0, 50.0);
  REQUIRE(fit.quality == FitQuality::ok);
  REQUIRE(fit.estimate == Catch::Approx(0.2).epsilon(1e-12));
  REQUIRE(fit.residual < 1e-12);
}

TEST_CASE("fit_exponential is immune to a constant prefactor") {
  // A wavefunction-renormalization offset A != 1 shifts the intercept only;
  // the slope, hence Gamma, is untouched.
  const SurvivalSeries s =
      series_from(50.0, 100, [](double t) { return 1.02 * std::exp(-0.2 * t); });
  const FitReport fit = fit_exponential(s, 1.0, 50.0);
  REQUIRE(fit.quality == FitQuality::ok);
  REQUIRE(fit.estimate == Catch::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("fit_exponential flags oscillatory input as non-exponential") {
  const SurvivalSeries s =
      series_from(20.0, 200, [](double t) { return 0.5 + 0.45 * std::cos(2.0 * t); });
  const FitReport fit = fit_exponential(s, 0.5, 20.0);
  REQUIRE(fit.quality == FitQuality::non_exponential);
}

TEST_CASE("fit_exponential needs eight usable samples") {
  const SurvivalSeries s = series_from(10.0, 10, [](double t) { return std::exp(-0.1 * t); });
  const FitReport fit = fit_exponential(s, 3.5, 8.5);  // five samples
  REQUIRE(fit.quality == FitQuality::window_too_short);
}

TEST_CASE("survival floor excludes fully decayed samples") {
  const SurvivalSeries s = series_from(500.0, 100, [](double t) { return std::exp(-0.2 * t); });
  // Beyond t ~ 138 the values underflow past the 1e-12 floor and are skipped,
  // so only the early-window samples contribute.
  const FitReport fit = fit_exponential(s, 0.0, 500.0);
  REQUIRE(fit.quality == FitQuality::ok);
  REQUIRE(fit.n_samples < 30);
  REQUIRE(fit.estimate == Catch::Approx(0.2).epsilon(1e-9));
}

TEST_CASE("fit_short_time recovers an exact power law") {
  const SurvivalSeries s =
      series_from(0.01, 40, [](double t) { return 1.0 - 0.37 * t * t; });
  const FitReport fit = fit_short_time(s, 0.0, 0.011);
  REQUIRE(fit.quality == FitQuality::ok);
  REQUIRE(fit.exponent == Catch::Approx(2.0).epsilon(1e-10));
  REQUIRE(fit.estimate == Catch::Approx(0.37).epsilon(1e-9));
}

TEST_CASE("fit_short_time sees a linear law as p = 1") {
  const SurvivalSeries s = series_from(0.01, 40, [](double t) { return 1.0 - 0.05 * t; });
  const FitReport fit = fit_short_time(s, 0.0, 0.011);
  REQUIRE(fit.exponent == Catch::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("deficit floor and window guard the short-time fit") {
  const SurvivalSeries flat = series_from(0.01, 40, [](double) { return 1.0; });
  REQUIRE(fit_short_time(flat, 0.0, 0.011).quality == FitQuality::window_too_short);

  const SurvivalSeries s =
      series_from(0.01, 10, [](double t) { return 1.0 - 0.37 * t * t; });
  REQUIRE(fit_short_time(s, 0.0, 0.003).quality == FitQuality::window_too_short);
  REQUIRE_THROWS_AS(fit_short_time(s, 0.01, 0.01), contract_error);
}

TEST_CASE("subsampling does not move the fitted rate") {
  const SurvivalSeries full = series_from(50.0, 200, [](double t) { return std::exp(-0.2 * t); });
  std::vector<double> times, values;
  for (std::size_t i = 0; i < full.size(); i += 2) {
    times.push_back(full.time(i));
    values.push_back(full.value(i));
  }
  const SurvivalSeries half(std::move(times), std::move(values));
  const double g_full = fit_exponential(full, 1.0, 50.0).estimate;
  const double g_half = fit_exponential(half, 1.0, 50.0).estimate;
  REQUIRE(g_full == Catch::Approx(g_half).epsilon(1e-12));
}

TEST_CASE("compare_survival demands identical grids and finds the worst sample") {
  const SurvivalSeries a = series_from(1.0, 10, [](double t) { return 1.0 - 0.1 * t; });
  SurvivalSeries b = series_from(1.0, 10, [](double t) {
    return 1.0 - 0.1 * t - (t == 0.5 ? 1e-4 : 0.0);
  });
  const ComparisonReport rep = compare_survival(a, b);
  REQUIRE(rep.max_abs == Catch::Approx(1e-4).epsilon(1e-12));
  REQUIRE(rep.at_time == 0.5);

  const ComparisonReport self = compare_survival(a, a);
  REQUIRE(self.max_abs == 0.0);
  REQUIRE(self.rms == 0.0);

  const SurvivalSeries other = series_from(1.0, 11, [](double t) { return 1.0 - 0.1 * t; });
  REQUIRE_THROWS_AS(compare_survival(a, other), contract_error);
}

TEST_CASE("survival series validates its construction") {
  REQUIRE_THROWS_AS(SurvivalSeries({0.0, 1.0}, {1.0}), contract_error);
  REQUIRE_THROWS_AS(SurvivalSeries({0.5, 1.0}, {1.0, 0.9}), contract_error);
  REQUIRE_THROWS_AS(SurvivalSeries({0.0, 1.0, 1.0}, {1.0, 0.9, 0.8}), contract_error);
  REQUIRE_THROWS_AS(SurvivalSeries({0.0, 1.0}, {1.0, 1.5}), numeric_error);
  REQUIRE_THROWS_AS(SurvivalSeries({0.0, 1.0}, {0.9, 0.8}), contract_error);

  // Values inside the rounding pad are clamped back onto [0, 1].
  const SurvivalSeries s({0.0, 1.0}, {1.0 + 5e-13, -5e-13});
  REQUIRE(s.value(0) == 1.0);
  REQUIRE(s.value(1) == 0.0);
}
