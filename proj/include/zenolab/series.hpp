// series.hpp - sampled survival-probability curve s(t) with provenance,
// the common currency between the simulation modules and the analysis fits.
#pragma once

#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "zenolab/errors.hpp"

namespace zenolab {

struct SeriesMeta {
  std::string model_id;                  // e.g. "two_level(omega=1)"
  double coupling_scale = 0.0;           // measurement coupling g or detector scale
  std::map<std::string, double> params;  // grid spacing, mode counts, ...
};

// Ingest tolerance: values may stick out of [0,1] by at most this much
// (rounding), and are clamped back in. Anything worse is a numeric bug.
inline constexpr double kSurvivalPad = 1e-12;

class SurvivalSeries {
 public:
  SurvivalSeries(std::vector<double> times, std::vector<double> values, SeriesMeta meta = {})
      : times_(std::move(times)), values_(std::move(values)), meta_(std::move(meta)) {
    if (times_.empty() || times_.size() != values_.size())
      throw contract_error("SurvivalSeries: times/values must be non-empty and equal length");
    if (times_.front() != 0.0)
      throw contract_error("SurvivalSeries: series must start at t = 0");
    for (std::size_t i = 1; i < times_.size(); ++i)
      if (!(times_[i] > times_[i - 1]))
        throw contract_error("SurvivalSeries: times must be strictly ascending");
    for (double& v : values_) {
      if (!std::isfinite(v) || v < -kSurvivalPad || v > 1.0 + kSurvivalPad)
        throw numeric_error("SurvivalSeries: survival value " + std::to_string(v) +
                            " outside [0,1] beyond rounding pad");
      v = std::min(std::max(v, 0.0), 1.0);
    }
    if (values_.front() != 1.0)
      throw contract_error("SurvivalSeries: s(0) must be 1");
  }

  std::size_t size() const { return times_.size(); }
  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& values() const { return values_; }
  const SeriesMeta& meta() const { return meta_; }
  SeriesMeta& meta() { return meta_; }

  double time(std::size_t i) const { return times_[i]; }
  double value(std::size_t i) const { return values_[i]; }

 private:
  std::vector<double> times_;
  std::vector<double> values_;
  SeriesMeta meta_;
};

}  // namespace zenolab
