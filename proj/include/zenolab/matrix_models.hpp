// matrix_models.hpp - finite-dimensional Zeno laboratory: toy unstable
// systems, repeated projective measurement, direct continuous measurement
// H + g*H_m, and the intertwining-identity checker.
#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "zenolab/errors.hpp"
#include "zenolab/linops.hpp"
#include "zenolab/series.hpp"

namespace zenolab {

// Bundle (H_o, H_i, H_m, |e>) for the direct-measurement experiments.
// Working-basis conventions: H_o diagonal, H_m annihilates the excited
// basis vector (the measured observable is blind to |e> itself).
struct ToyModel {
  HermitianOperator H_o;
  HermitianOperator H_i;
  HermitianOperator H_m;
  int excited_index = 0;
  std::string id;
  std::vector<std::string> warnings;

  int dim() const { return H_o.dim(); }

  HermitianOperator total(double g) const {
    return HermitianOperator(H_o.entries() + H_i.entries() + g * H_m.entries());
  }

  // <e|H_i^2|e> = ||H_i |e>||^2, the short-time coefficient alpha.
  double short_time_alpha() const { return H_i.entries().col(excited_index).squaredNorm(); }
};

inline ToyModel make_toy_model(HermitianOperator H_o, HermitianOperator H_i, HermitianOperator H_m,
                               int excited_index, std::string id) {
  const int n = H_o.dim();
  if (H_i.dim() != n || H_m.dim() != n)
    throw contract_error("ToyModel: operator dimensions disagree");
  if (excited_index < 0 || excited_index >= n)
    throw contract_error("ToyModel: excited_index out of range");
  ComplexMatrix off = H_o.entries();
  off.diagonal().setZero();
  if (off.cwiseAbs().maxCoeff() > kHermiticityTol)
    throw contract_error("ToyModel: H_o must be diagonal in the working basis");
  if (H_m.entries().col(excited_index).cwiseAbs().maxCoeff() > kHermiticityTol)
    throw contract_error("ToyModel: H_m must annihilate the excited basis vector");
  return ToyModel{std::move(H_o), std::move(H_i), std::move(H_m), excited_index, std::move(id), {}};
}

// Repeated-measurement run description: N intervals of length dt covering
// total time t, with direct coupling g (g = 0 for purely projective runs).
struct ZenoRunSpec {
  double total_time = 0.0;
  double interval = 0.0;
  int n_measurements = 0;
  double g = 0.0;

  ZenoRunSpec(double t, double dt, int n, double coupling = 0.0)
      : total_time(t), interval(dt), n_measurements(n), g(coupling) {
    if (!(dt > 0.0) || !(t > 0.0) || n < 1)
      throw contract_error("ZenoRunSpec: need dt > 0, t > 0, N >= 1");
    if (std::abs(n * dt - t) > 1e-12 * std::max(1.0, std::abs(t)))
      throw contract_error("ZenoRunSpec: N * dt must equal t");
  }
};

// Minimal realization of the direct-measurement setup: H_o = 0,
// H_i = Omega*(|0><1| + |1><0|), H_m = |1><1|, excited state |0>.
inline ToyModel build_two_level(double omega_rabi) {
  if (!(omega_rabi > 0.0)) throw contract_error("build_two_level: Omega must be > 0");
  ComplexMatrix ho = ComplexMatrix::Zero(2, 2);
  ComplexMatrix hi = ComplexMatrix::Zero(2, 2);
  hi(0, 1) = hi(1, 0) = omega_rabi;
  ComplexMatrix hm = ComplexMatrix::Zero(2, 2);
  hm(1, 1) = 1.0;
  return make_toy_model(HermitianOperator(ho), HermitianOperator(hi), HermitianOperator(hm), 0,
                        "two_level(omega=" + std::to_string(omega_rabi) + ")");
}

// Excited level at energy 0 coupled with uniform strength lambda*sqrt(d_omega)
// to N_modes quasi-continuum modes spanning [-Delta/2, Delta/2]. Exhibits the
// golden-rule exponential regime with Gamma = 2*pi*lambda^2 before the
// recurrence time 2*pi/d_omega. H_m projects onto the mode sector.
inline ToyModel build_friedrichs(int n_modes, double lambda, double delta) {
  if (n_modes < 32) throw contract_error("build_friedrichs: N_modes must be >= 32");
  if (!(lambda > 0.0) || !(delta > 0.0))
    throw contract_error("build_friedrichs: lambda and Delta must be > 0");
  const int dim = n_modes + 1;
  const double d_omega = delta / n_modes;
  const double v = lambda * std::sqrt(d_omega);
  ComplexMatrix ho = ComplexMatrix::Zero(dim, dim);
  ComplexMatrix hi = ComplexMatrix::Zero(dim, dim);
  ComplexMatrix hm = ComplexMatrix::Zero(dim, dim);
  for (int n = 0; n < n_modes; ++n) {
    const double w = -delta / 2.0 + (n + 0.5) * d_omega;  // midpoint grid, symmetric
    ho(n + 1, n + 1) = w;
    hi(0, n + 1) = hi(n + 1, 0) = v;
    hm(n + 1, n + 1) = 1.0;
  }
  ToyModel m = make_toy_model(HermitianOperator(ho), HermitianOperator(hi), HermitianOperator(hm),
                              0, "friedrichs(N=" + std::to_string(n_modes) + ")");
  const double gamma_gr = 2.0 * std::numbers::pi * lambda * lambda;
  if (gamma_gr < 3.0 * d_omega)
    m.warnings.push_back(
        "friedrichs: golden-rule width " + std::to_string(gamma_gr) +
        " is below 3x the mode spacing; decay is not resolved before recurrence");
  return m;
}

// s_g(t) = |<e| exp(-i (H + g H_m) t) |e>|^2 on the given grid. The t = 0
// sample (s = 1) is prepended if the grid does not include it.
inline SurvivalSeries survival_series(const ToyModel& m, double g,
                                      const std::vector<double>& t_grid) {
  if (t_grid.empty()) throw contract_error("survival_series: empty time grid");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (t_grid[i] < 0.0) throw contract_error("survival_series: times must be nonnegative");
    if (i > 0 && !(t_grid[i] > t_grid[i - 1]))
      throw contract_error("survival_series: times must be ascending");
  }
  const SpectralPropagator prop(m.total(g));
  // <e|U(t)|e> = sum_k |V_ek|^2 e^{-i w_k t}
  const int e = m.excited_index;
  std::vector<double> times;
  std::vector<double> values;
  times.reserve(t_grid.size() + 1);
  values.reserve(t_grid.size() + 1);
  if (t_grid.front() != 0.0) {
    times.push_back(0.0);
    values.push_back(1.0);
  }
  ComplexVector basis = ComplexVector::Zero(m.dim());
  basis[e] = 1.0;
  for (double t : t_grid) {
    if (t == 0.0) {
      times.push_back(0.0);
      values.push_back(1.0);
      continue;
    }
    const Complex amp = prop.apply(t, basis)[e];
    times.push_back(t);
    values.push_back(std::norm(amp));
  }
  SeriesMeta meta{m.id, g, {{"dim", static_cast<double>(m.dim())}}};
  return SurvivalSeries(std::move(times), std::move(values), std::move(meta));
}

// N ideal projective measurements at interval dt: evolve dt, multiply the
// accumulated survival probability by |<e|psi>|^2, reset to |e>. This is
// exactly the product form of s_N(t); no trajectory sampling is involved.
inline SurvivalSeries projective_zeno(const ToyModel& m, const ZenoRunSpec& spec) {
  if (spec.g != 0.0)
    throw contract_error("projective_zeno: spec.g must be 0 (projective runs are measurement-free "
                         "between projections)");
  const SpectralPropagator prop(m.total(0.0));
  ComplexVector excited = ComplexVector::Zero(m.dim());
  excited[m.excited_index] = 1.0;
  std::vector<double> times{0.0};
  std::vector<double> values{1.0};
  double acc = 1.0;
  for (int n = 1; n <= spec.n_measurements; ++n) {
    const ComplexVector evolved = prop.apply(spec.interval, excited);
    acc *= std::norm(evolved[m.excited_index]);
    times.push_back(n * spec.interval);
    values.push_back(acc);
  }
  SeriesMeta meta{m.id, 0.0,
                  {{"dt", spec.interval}, {"N", static_cast<double>(spec.n_measurements)}}};
  return SurvivalSeries(std::move(times), std::move(values), std::move(meta));
}

// Closed forms for the two-level model, usable as independent oracles:
// s_N(N dt) = cos^{2N}(Omega dt) for projective runs, and for constant direct
// coupling g the doubled-frequency Rabi form
// s_g(t) = 1 - Omega^2/(Omega^2 + g^2/4) sin^2(sqrt(Omega^2 + g^2/4) t).
inline double projective_survival_closed_form(double omega, double dt, int n) {
  const double c = std::cos(omega * dt);
  return std::pow(c * c, n);
}

inline double rabi_survival(double omega, double g, double t) {
  const double r2 = omega * omega + g * g / 4.0;
  const double s = std::sin(std::sqrt(r2) * t);
  return 1.0 - (omega * omega / r2) * s * s;
}

struct IntertwiningReport {
  double max_deviation = 0.0;
  int at_step = 0;
  int at_probe = -1;
  int n_steps = 0;
  double tol = 0.0;
  bool pass = false;
};

// Checks the proof identity P_C U_g^k = P_C U_0^k on the given probes for
// k = 1..n_steps. Accepts arbitrary step maps so the field model's split-step
// propagator can be verified by the same code as matrix exponentials.
inline IntertwiningReport verify_intertwining(const UnitaryMap& u_g_step,
                                              const UnitaryMap& u_0_step, const Projector& p_core,
                                              int n_steps,
                                              const std::vector<ComplexVector>& probes,
                                              double tol) {
  if (u_g_step.dim != u_0_step.dim || u_g_step.dim != p_core.dim())
    throw contract_error("verify_intertwining: dimension mismatch");
  if (n_steps < 1) throw contract_error("verify_intertwining: n_steps must be >= 1");
  if (probes.empty()) throw contract_error("verify_intertwining: need at least one probe");
  IntertwiningReport rep;
  rep.n_steps = n_steps;
  rep.tol = tol;
  for (std::size_t p = 0; p < probes.size(); ++p) {
    const ComplexVector& probe = probes[p];
    if (probe.size() != u_g_step.dim)
      throw contract_error("verify_intertwining: probe dimension mismatch");
    if (std::abs(probe.norm() - 1.0) > 1e-9)
      throw contract_error("verify_intertwining: probes must be normalized");
    ComplexVector vg = probe;
    ComplexVector v0 = probe;
    for (int k = 1; k <= n_steps; ++k) {
      vg = u_g_step(vg);
      v0 = u_0_step(v0);
      const double dev = p_core.projected_norm(vg - v0);
      if (dev > rep.max_deviation) {
        rep.max_deviation = dev;
        rep.at_step = k;
        rep.at_probe = static_cast<int>(p);
      }
    }
  }
  rep.pass = rep.max_deviation <= tol;
  return rep;
}

}  // namespace zenolab
