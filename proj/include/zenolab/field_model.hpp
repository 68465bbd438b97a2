// field_model.hpp - 1D two-level atom in [-d/2, d/2] coupled to a massless
// chiral field, simulated in the closed two-particle sector, with an optional
// wave-zone detector.
//
// State layout (scaled cell amplitudes, so the flattened state is a unit
// vector in plain l2):
//   C            excited-atom amplitude
//   F[i*nL + j]  pair amplitude, right-mover in x_R cell i, left-mover in
//                x_L cell j; physical density F(x_R,x_L) = F_cell / h
//   D[m*nL + j]  detector mode k_m with spectator left-mover in x_L cell j;
//                physical density D_k(x_L) = D_cell / sqrt(h * dk)
// Cell centers: x_R(i) = -d/2 + (i + 1/2) h, x_L(j) = d/2 - (j + 1/2) h.
//
// Time step is locked to dt = h/c, so free streaming is an exact one-cell
// diagonal shift (i,j) -> (i+1,j+1): right-movers only move right, left-movers
// only move left, and the wave zone is forward-invariant cell by cell. The
// coupling terms advance by exact exponentials of the small Hermitian blocks
// (the C<->F core block, one F<->D block per x_L column) in symmetric Strang
// order around the shift.
//
// The atom<->field block is an arrowhead matrix: C couples to the single
// normalized kernel mode |G> = sum gamma_ij |ij> / ||gamma|| and acts as the
// identity on the orthogonal complement, so its exponential reduces to an
// exact 2x2 rotation regardless of grid resolution.
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "zenolab/analysis.hpp"
#include "zenolab/errors.hpp"
#include "zenolab/linops.hpp"
#include "zenolab/series.hpp"

namespace zenolab {

struct KernelSpec {
  enum class Shape { constant, gaussian };
  Shape shape = Shape::constant;
  double g0 = 1.0;
  double sigma = 0.25;  // gaussian width; ignored for the constant kernel
};

struct FieldModelConfig {
  double d = 1.0;      // atom region length; kernel support is (-d/2, d/2)^2
  double omega = 5.0;  // excited-state energy (hbar = 1)
  KernelSpec kernel{};
  double h = 1.0 / 16;  // grid spacing; d/h must be an even integer >= 4
  double T = 8.0;       // horizon time; T*c/h must be an integer
  double c = 1.0;       // signal speed
};

struct DetectorConfig {
  double x_minus = 1.0;
  double x_plus = 2.0;
  enum class Dispersion { linear, quadratic };
  Dispersion dispersion = Dispersion::linear;
  double v_d = 1.0;      // Omega(k) = v_d * k  (linear) or v_d * k^2 (quadratic)
  double lambda0 = 1.0;  // coupling amplitude of lambda_R(x,k) = lambda0 * w(x) * u(k)
  int n_k = 64;          // detector modes, uniform on [-k_max, k_max]
  double k_max = 0.0;    // <= 0 selects the default pi/(2h)
  double scale = 1.0;    // overall multiplier applied to lambda0
  bool semidirect = false;  // permit support overlapping the atom region
};

class FieldModel;

class FieldState {
 public:
  Complex excited() const { return c_; }
  double time() const { return time_; }
  double escaped_norm_ledger() const { return escaped_; }

  Complex f_cell(int i, int j) const { return f_[static_cast<std::size_t>(i) * n_l_ + j]; }
  Complex d_cell(int m, int j) const { return d_[static_cast<std::size_t>(m) * n_l_ + j]; }

  // |C|^2 + h^2 sum|F_phys|^2 + h dk sum|D_phys|^2, evaluated in scaled
  // amplitudes where it is the plain squared l2 norm.
  double norm_sq() const {
    double s = std::norm(c_);
    for (const Complex& z : f_) s += std::norm(z);
    for (const Complex& z : d_) s += std::norm(z);
    return s;
  }

  double survival() const { return std::norm(c_); }

  // h dk sum |D_phys|^2: probability that the detector holds the excitation.
  double detector_population() const {
    double s = 0;
    for (const Complex& z : d_) s += std::norm(z);
    return s;
  }

 private:
  friend class FieldModel;
  Complex c_{0.0, 0.0};
  std::vector<Complex> f_;  // n_r * n_l
  std::vector<Complex> d_;  // n_k * n_l
  int n_r_ = 0, n_l_ = 0, n_k_ = 0;
  double time_ = 0.0;
  double escaped_ = 0.0;  // stays 0: runs abort before any amplitude escapes
};

// Index sets realizing P_C and its complement P_W (P_W1 when detector modes
// are present) over the flattened state layout.
struct SubspacePartition {
  std::vector<int> core_cells;
  std::vector<int> wave_cells;
  int dim = 0;

  Projector core_projector() const { return Projector(core_cells, dim); }
  Projector wave_projector() const { return Projector(wave_cells, dim); }
};

enum class Region { core, r_only, l_only, rl, ml };

struct RunResult {
  SurvivalSeries series;
  FieldState final_state;
  double norm_drift = 0.0;
};

class FieldModel {
 public:
  FieldModel(const FieldModelConfig& cfg, const std::optional<DetectorConfig>& det) : cfg_(cfg) {
    validate_and_size(det);
    build_kernel();
    build_core_rotation();
    if (has_detector_) build_detector_block();
  }

  // --- geometry ---
  int n_core() const { return n_core_; }
  int n_r() const { return n_r_; }
  int n_l() const { return n_l_; }
  int n_k() const { return n_k_; }
  int max_steps() const { return n_steps_; }
  double dt() const { return dt_; }
  double grid_h() const { return cfg_.h; }
  bool has_detector() const { return has_detector_; }
  int detector_lo() const { return det_lo_; }
  int detector_hi() const { return det_hi_; }
  double delta_k() const { return dk_; }
  const FieldModelConfig& config() const { return cfg_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  const std::string& id() const { return id_; }

  // sum_cells gamma^2 = <e|H_i^2|e> of the discretized model; for the constant
  // kernel this is exactly g0^2 d^2.
  double short_time_alpha() const { return gamma_norm_ * gamma_norm_; }

  int state_dim() const { return 1 + n_r_ * n_l_ + n_k_ * n_l_; }
  int idx_f(int i, int j) const { return 1 + i * n_l_ + j; }
  int idx_d(int m, int j) const { return 1 + n_r_ * n_l_ + m * n_l_ + j; }

  Region region_of(int flat_index) const {
    if (flat_index == 0) return Region::core;
    if (flat_index >= 1 + n_r_ * n_l_) return Region::ml;
    const int cell = flat_index - 1;
    const int i = cell / n_l_;
    const int j = cell % n_l_;
    if (i < n_core_ && j < n_core_) return Region::core;
    if (i >= n_core_ && j < n_core_) return Region::r_only;
    if (i < n_core_ && j >= n_core_) return Region::l_only;
    return Region::rl;
  }

  SubspacePartition partition() const {
    SubspacePartition p;
    p.dim = state_dim();
    p.core_cells.reserve(1 + n_core_ * n_core_);
    for (int idx = 0; idx < p.dim; ++idx) {
      if (region_of(idx) == Region::core)
        p.core_cells.push_back(idx);
      else
        p.wave_cells.push_back(idx);
    }
    return p;
  }

  FieldState initial_excited() const {
    FieldState s;
    s.c_ = Complex(1.0, 0.0);
    s.f_.assign(static_cast<std::size_t>(n_r_) * n_l_, Complex(0.0, 0.0));
    s.d_.assign(static_cast<std::size_t>(n_k_) * n_l_, Complex(0.0, 0.0));
    s.n_r_ = n_r_;
    s.n_l_ = n_l_;
    s.n_k_ = n_k_;
    return s;
  }

  FieldState zero_state() const {
    FieldState s = initial_excited();
    s.c_ = Complex(0.0, 0.0);
    return s;
  }

  // One split step of dt = h/c:
  //   core/2, detector/2, exact shift, detector/2, core/2.
  // Throws horizon_error if amplitude would leave the grid.
  void step(FieldState& s) const {
    check_state(s);
    check_boundary(s);
    core_halfstep(s);
    if (has_detector_) detector_halfstep(s);
    shift(s);
    if (has_detector_) detector_halfstep(s);
    core_halfstep(s);
    s.time_ += dt_;
  }

  // The step as an opaque unitary on flattened states, for the intertwining
  // and leakage checkers.
  UnitaryMap step_map() const {
    FieldModel copy = *this;
    return UnitaryMap{state_dim(), "field_step(" + id_ + ")",
                      [copy](const ComplexVector& v) -> ComplexVector {
                        FieldState s = copy.from_vector(v);
                        copy.step(s);
                        return copy.to_vector(s);
                      }};
  }

  ComplexVector to_vector(const FieldState& s) const {
    check_state(s);
    ComplexVector v(state_dim());
    v[0] = s.c_;
    for (std::size_t n = 0; n < s.f_.size(); ++n) v[1 + n] = s.f_[n];
    const int off = 1 + n_r_ * n_l_;
    for (std::size_t n = 0; n < s.d_.size(); ++n) v[off + n] = s.d_[n];
    return v;
  }

  FieldState from_vector(const ComplexVector& v) const {
    if (v.size() != state_dim()) throw contract_error("FieldModel::from_vector: dimension mismatch");
    FieldState s = zero_state();
    s.c_ = v[0];
    for (std::size_t n = 0; n < s.f_.size(); ++n) s.f_[n] = v[1 + n];
    const int off = 1 + n_r_ * n_l_;
    for (std::size_t n = 0; n < s.d_.size(); ++n) s.d_[n] = v[off + n];
    return s;
  }

  double x_r_center(int i) const { return -cfg_.d / 2 + (i + 0.5) * cfg_.h; }
  double x_l_center(int j) const { return cfg_.d / 2 - (j + 0.5) * cfg_.h; }
  double kernel_at_cell(int i, int j) const {
    if (i < 0 || j < 0 || i >= n_core_ || j >= n_core_) return 0.0;
    return kernel_[static_cast<std::size_t>(i) * n_core_ + j];
  }

 private:
  void validate_and_size(const std::optional<DetectorConfig>& det) {
    if (!(cfg_.d > 0) || !(cfg_.h > 0) || !(cfg_.c > 0) || !(cfg_.T > 0))
      throw config_error("field model: d, h, c, T must all be positive");
    const double ratio = cfg_.d / cfg_.h;
    n_core_ = static_cast<int>(std::lround(ratio));
    if (std::abs(ratio - n_core_) > 1e-9 || n_core_ < 4 || n_core_ % 2 != 0)
      throw config_error("field model: d/h must be an even integer >= 4 (got d/h = " +
                         std::to_string(ratio) + ")");
    dt_ = cfg_.h / cfg_.c;
    const double steps = cfg_.T / dt_;
    n_steps_ = static_cast<int>(std::lround(steps));
    if (std::abs(steps - n_steps_) > 1e-9 || n_steps_ < 1)
      throw config_error("field model: T must be a positive integer multiple of h/c");
    if (cfg_.kernel.shape == KernelSpec::Shape::gaussian && !(cfg_.kernel.sigma > 0))
      throw config_error("field model: gaussian kernel needs sigma > 0");

    int reach = n_core_ - 1 + n_steps_;  // furthest F cell pure transport can populate
    has_detector_ = det.has_value();
    if (has_detector_) {
      det_cfg_ = *det;
      // Snap the interval to cell boundaries so the coupled cell set is exact.
      auto snap = [&](double x) { return -cfg_.d / 2 + std::lround((x + cfg_.d / 2) / cfg_.h) * cfg_.h; };
      const double xm = snap(det_cfg_.x_minus);
      const double xp = snap(det_cfg_.x_plus);
      if (std::abs(xm - det_cfg_.x_minus) > 1e-12 || std::abs(xp - det_cfg_.x_plus) > 1e-12)
        warnings_.push_back("detector interval snapped to the grid: [" + std::to_string(xm) + ", " +
                            std::to_string(xp) + "]");
      det_cfg_.x_minus = xm;
      det_cfg_.x_plus = xp;
      if (!(xp > xm)) throw config_error("detector: x_plus must exceed x_minus by at least one cell");
      if (!det_cfg_.semidirect && !(xm > cfg_.d / 2 + 1e-12))
        throw config_error(
            "detector: wave-zone placement requires x_minus > d/2; overlapping detectors model "
            "semi-direct measurement and need the semidirect flag (semidirect-check)");
      if (det_cfg_.n_k < 1) throw config_error("detector: N_k must be >= 1");
      if (det_cfg_.k_max <= 0) det_cfg_.k_max = std::numbers::pi / (2 * cfg_.h);
      n_k_ = det_cfg_.n_k;
      dk_ = 2 * det_cfg_.k_max / n_k_;
      det_lo_ = static_cast<int>(std::lround((xm + cfg_.d / 2) / cfg_.h));
      det_hi_ = static_cast<int>(std::lround((xp + cfg_.d / 2) / cfg_.h)) - 1;
      // A cycle of absorption and re-emission can place amplitude at x_plus at
      // any time after the first instant the detector is reachable, advancing
      // the front by up to the detector length. Size the grid for it.
      const int t_first = std::max(0, det_lo_ - (n_core_ - 1));
      reach = std::max({reach, det_hi_ + n_steps_ - t_first, det_hi_});
    }
    n_r_ = reach + 3;           // two guaranteed-empty guard cells past the last reachable one
    n_l_ = n_core_ + n_steps_ + 2;

    id_ = "field(d=" + std::to_string(cfg_.d) + ",h=1/" + std::to_string(std::lround(1.0 / cfg_.h)) +
          ",omega=" + std::to_string(cfg_.omega) + ")";
  }

  void build_kernel() {
    kernel_.assign(static_cast<std::size_t>(n_core_) * n_core_, 0.0);
    for (int i = 0; i < n_core_; ++i) {
      for (int j = 0; j < n_core_; ++j) {
        const double xr = x_r_center(i);
        const double xl = x_l_center(j);
        double g = cfg_.kernel.g0;
        if (cfg_.kernel.shape == KernelSpec::Shape::gaussian) {
          const double s2 = 2 * cfg_.kernel.sigma * cfg_.kernel.sigma;
          g *= std::exp(-(xr * xr) / s2) * std::exp(-(xl * xl) / s2);
        }
        kernel_[static_cast<std::size_t>(i) * n_core_ + j] = g;
      }
    }
  }

  void build_core_rotation() {
    // Coupling of C to core cell (i,j) in scaled amplitudes is gamma = g * h.
    double norm2 = 0;
    for (double g : kernel_) norm2 += g * g * cfg_.h * cfg_.h;
    gamma_norm_ = std::sqrt(norm2);
    gamma_hat_.assign(kernel_.size(), 0.0);
    if (gamma_norm_ > 0)
      for (std::size_t n = 0; n < kernel_.size(); ++n)
        gamma_hat_[n] = kernel_[n] * cfg_.h / gamma_norm_;
    // exp(-i eps [[omega, gn], [gn, 0]]) in closed form.
    const double eps = dt_ / 2;
    const double half_omega = cfg_.omega / 2;
    const double r = std::sqrt(half_omega * half_omega + gamma_norm_ * gamma_norm_);
    const Complex phase = std::polar(1.0, -half_omega * eps);
    const double cr = std::cos(r * eps);
    const double sr = (r > 0) ? std::sin(r * eps) / r : eps;
    u00_ = phase * Complex(cr, -half_omega * sr);
    u01_ = phase * Complex(0.0, -gamma_norm_ * sr);
    u10_ = u01_;
    u11_ = phase * Complex(cr, half_omega * sr);
  }

  void build_detector_block() {
    const int nd = det_hi_ - det_lo_ + 1;
    const int nb = nd + n_k_;
    k_modes_.resize(n_k_);
    for (int m = 0; m < n_k_; ++m) k_modes_[m] = -det_cfg_.k_max + (m + 0.5) * dk_;
    auto omega_of = [&](double k) {
      return det_cfg_.dispersion == DetectorConfig::Dispersion::linear ? det_cfg_.v_d * k
                                                                       : det_cfg_.v_d * k * k;
    };
    const double amp = det_cfg_.scale * det_cfg_.lambda0;
    double mu_max = 0;
    ComplexMatrix hb = ComplexMatrix::Zero(nb, nb);
    for (int m = 0; m < n_k_; ++m) hb(nd + m, nd + m) = omega_of(k_modes_[m]);
    for (int l = 0; l < nd; ++l) {
      const double x = x_r_center(det_lo_ + l);
      const double u = (x - det_cfg_.x_minus) / (det_cfg_.x_plus - det_cfg_.x_minus);
      const double w = std::sin(std::numbers::pi * u) * std::sin(std::numbers::pi * u);
      for (int m = 0; m < n_k_; ++m) {
        const double mu = amp * w * std::sqrt(cfg_.h * dk_);  // u(k) = 1 on [-k_max, k_max]
        mu_max = std::max(mu_max, std::abs(mu));
        hb(l, nd + m) = mu;
        hb(nd + m, l) = mu;
      }
    }
    if (mu_max == 0.0) {
      // Decoupled detector: exact diagonal phases, identity on the field part,
      // so a scale-0 detector is bit-for-bit identical to no detector.
      det_block_ = ComplexMatrix::Identity(nb, nb);
      for (int m = 0; m < n_k_; ++m)
        det_block_(nd + m, nd + m) = std::polar(1.0, -omega_of(k_modes_[m]) * dt_ / 2);
    } else {
      Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hb);
      if (es.info() != Eigen::Success) throw numeric_error("detector block: eigensolver failed");
      ComplexVector phases(nb);
      for (int n = 0; n < nb; ++n) phases[n] = std::polar(1.0, -es.eigenvalues()[n] * dt_ / 2);
      det_block_ = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
    }
  }

  void check_state(const FieldState& s) const {
    if (s.n_r_ != n_r_ || s.n_l_ != n_l_ || s.n_k_ != n_k_)
      throw contract_error("FieldState does not belong to this model");
  }

  void check_boundary(const FieldState& s) const {
    // The cells about to shift off the grid must be empty; sizing guarantees
    // they are, so anything above the threshold means the horizon was busted.
    const double lim = 1e-12;
    for (int j = 0; j < n_l_; ++j)
      if (std::abs(s.f_[static_cast<std::size_t>(n_r_ - 1) * n_l_ + j]) > lim)
        throw horizon_error("field model: amplitude reached the x_R grid boundary");
    for (int i = 0; i < n_r_; ++i)
      if (std::abs(s.f_[static_cast<std::size_t>(i) * n_l_ + n_l_ - 1]) > lim)
        throw horizon_error("field model: amplitude reached the x_L grid boundary");
    for (int m = 0; m < n_k_; ++m)
      if (std::abs(s.d_[static_cast<std::size_t>(m) * n_l_ + n_l_ - 1]) > lim)
        throw horizon_error("field model: detector amplitude reached the x_L grid boundary");
  }

  void core_halfstep(FieldState& s) const {
    if (gamma_norm_ == 0.0) {
      s.c_ *= std::polar(1.0, -cfg_.omega * dt_ / 2);
      return;
    }
    Complex a(0.0, 0.0);
    for (int i = 0; i < n_core_; ++i) {
      const std::size_t row = static_cast<std::size_t>(i) * n_l_;
      const std::size_t krow = static_cast<std::size_t>(i) * n_core_;
      for (int j = 0; j < n_core_; ++j) a += gamma_hat_[krow + j] * s.f_[row + j];
    }
    const Complex c_new = u00_ * s.c_ + u01_ * a;
    const Complex a_new = u10_ * s.c_ + u11_ * a;
    const Complex da = a_new - a;
    s.c_ = c_new;
    for (int i = 0; i < n_core_; ++i) {
      const std::size_t row = static_cast<std::size_t>(i) * n_l_;
      const std::size_t krow = static_cast<std::size_t>(i) * n_core_;
      for (int j = 0; j < n_core_; ++j) s.f_[row + j] += da * gamma_hat_[krow + j];
    }
  }

  void detector_halfstep(FieldState& s) const {
    const int nd = det_hi_ - det_lo_ + 1;
    const int nb = nd + n_k_;
    // All x_L columns share one block unitary; batch them into a single GEMM.
    ComplexMatrix x(nb, n_l_);
    for (int l = 0; l < nd; ++l)
      for (int j = 0; j < n_l_; ++j)
        x(l, j) = s.f_[static_cast<std::size_t>(det_lo_ + l) * n_l_ + j];
    for (int m = 0; m < n_k_; ++m)
      for (int j = 0; j < n_l_; ++j) x(nd + m, j) = s.d_[static_cast<std::size_t>(m) * n_l_ + j];
    const ComplexMatrix y = det_block_ * x;
    for (int l = 0; l < nd; ++l)
      for (int j = 0; j < n_l_; ++j)
        s.f_[static_cast<std::size_t>(det_lo_ + l) * n_l_ + j] = y(l, j);
    for (int m = 0; m < n_k_; ++m)
      for (int j = 0; j < n_l_; ++j) s.d_[static_cast<std::size_t>(m) * n_l_ + j] = y(nd + m, j);
  }

  void shift(FieldState& s) const {
    // (i,j) <- (i-1,j-1), zero-filling the birth edges i = 0 and j = 0.
    for (int i = n_r_ - 1; i >= 1; --i) {
      Complex* row = s.f_.data() + static_cast<std::size_t>(i) * n_l_;
      const Complex* prev = s.f_.data() + static_cast<std::size_t>(i - 1) * n_l_;
      for (int j = n_l_ - 1; j >= 1; --j) row[j] = prev[j - 1];
      row[0] = Complex(0.0, 0.0);
    }
    Complex* first = s.f_.data();
    for (int j = 0; j < n_l_; ++j) first[j] = Complex(0.0, 0.0);
    // Spectator left-mover in the detector sector keeps streaming left.
    for (int m = 0; m < n_k_; ++m) {
      Complex* row = s.d_.data() + static_cast<std::size_t>(m) * n_l_;
      for (int j = n_l_ - 1; j >= 1; --j) row[j] = row[j - 1];
      row[0] = Complex(0.0, 0.0);
    }
  }

  FieldModelConfig cfg_;
  DetectorConfig det_cfg_{};
  bool has_detector_ = false;
  int n_core_ = 0, n_r_ = 0, n_l_ = 0, n_k_ = 0, n_steps_ = 0;
  int det_lo_ = 0, det_hi_ = -1;
  double dt_ = 0.0, dk_ = 0.0;
  std::vector<double> kernel_;     // physical g at core cell centers
  std::vector<double> gamma_hat_;  // normalized coupling mode over core cells
  double gamma_norm_ = 0.0;
  Complex u00_, u01_, u10_, u11_;  // core half-step rotation on (C, <G|F>)
  ComplexMatrix det_block_;        // half-step unitary of one x_L column
  std::vector<double> k_modes_;
  std::vector<std::string> warnings_;
  std::string id_;
};

inline FieldModel build_field_model(const FieldModelConfig& cfg,
                                    const std::optional<DetectorConfig>& det = std::nullopt) {
  return FieldModel(cfg, det);
}

inline FieldState init_excited(const FieldModel& model) { return model.initial_excited(); }

// Evolve |e> for n = T/dt steps, sampling |C|^2 every sample_every steps
// (the final step is always sampled).
inline RunResult run_experiment(const FieldModel& model, double total_time, int sample_every = 1) {
  if (sample_every < 1) throw contract_error("run_experiment: sample_every must be >= 1");
  const double steps = total_time / model.dt();
  const int n = static_cast<int>(std::lround(steps));
  if (std::abs(steps - n) > 1e-9 || n < 1)
    throw config_error("run_experiment: total_time must be a positive integer multiple of h/c");
  if (n > model.max_steps())
    throw config_error("run_experiment: horizon too small for requested T (model built for T = " +
                       std::to_string(model.max_steps() * model.dt()) + ")");
  FieldState s = init_excited(model);
  std::vector<double> times{0.0};
  std::vector<double> values{1.0};
  double drift = 0.0;
  for (int k = 1; k <= n; ++k) {
    model.step(s);
    drift = std::max(drift, std::abs(s.norm_sq() - 1.0));
    if (k % sample_every == 0 || k == n) {
      times.push_back(k * model.dt());
      values.push_back(s.survival());
    }
  }
  SeriesMeta meta{model.id(),
                  model.has_detector() ? 1.0 : 0.0,
                  {{"h", model.grid_h()}, {"dt", model.dt()}, {"n_steps", static_cast<double>(n)}}};
  SurvivalSeries series(std::move(times), std::move(values), std::move(meta));
  return RunResult{std::move(series), std::move(s), drift};
}

// Max over probes and steps of ||P_C step^k probe|| for wave-zone-supported
// probes. With exact-shift transport the expected value is exactly zero.
inline double wavezone_leakage(const FieldModel& model, int n_steps,
                               const std::vector<FieldState>& probes) {
  if (n_steps < 1) throw contract_error("wavezone_leakage: n_steps must be >= 1");
  if (probes.empty()) throw contract_error("wavezone_leakage: need at least one probe");
  const SubspacePartition part = model.partition();
  const Projector p_core = part.core_projector();
  double leak = 0.0;
  for (const FieldState& probe : probes) {
    {
      const double core_norm = p_core.projected_norm(model.to_vector(probe));
      if (core_norm > 1e-14)
        throw contract_error("wavezone_leakage: probe has core-zone support (norm " +
                             std::to_string(core_norm) + ")");
    }
    FieldState s = probe;
    for (int k = 0; k < n_steps; ++k) {
      model.step(s);
      double core2 = std::norm(s.excited());
      for (int i = 0; i < model.n_core(); ++i)
        for (int j = 0; j < model.n_core(); ++j) core2 += std::norm(s.f_cell(i, j));
      leak = std::max(leak, std::sqrt(core2));
    }
  }
  return leak;
}

struct NogoEntry {
  double scale = 0.0;
  double max_abs_dev = 0.0;  // max_t |s_scale(t) - s_0(t)|
  double at_time = 0.0;
  double detector_pop_max = 0.0;
  double detector_pop_final = 0.0;
  double norm_drift = 0.0;
};

struct NogoReport {
  std::vector<NogoEntry> entries;
  std::vector<SurvivalSeries> series;  // same order as entries
  double tol = 1e-9;
  bool pass = false;  // all deviations <= tol
};

namespace detail {

// Work-stealing index loop; item order in the output is the caller's, so
// parallel sweeps stay deterministic.
template <typename Fn>
void parallel_indexed(int n, int jobs, Fn&& fn) {
  jobs = std::clamp(jobs, 1, n);
  if (jobs <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (int w = 0; w < jobs; ++w)
    pool.emplace_back([&] {
      for (int i; (i = next.fetch_add(1)) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

struct ScaleRun {
  SurvivalSeries series;
  double pop_max, pop_final, norm_drift;
};

inline ScaleRun run_for_scale(const FieldModelConfig& cfg, DetectorConfig det, double scale,
                              double total_time, int sample_every) {
  det.scale = scale;
  const FieldModel model(cfg, det);
  // Sample detector population alongside the survival samples.
  const double steps = total_time / model.dt();
  const int n = static_cast<int>(std::lround(steps));
  if (std::abs(steps - n) > 1e-9 || n < 1)
    throw config_error("nogo sweep: total_time must be a positive integer multiple of h/c");
  FieldState s = init_excited(model);
  std::vector<double> times{0.0};
  std::vector<double> values{1.0};
  double pop_max = 0.0, drift = 0.0;
  for (int k = 1; k <= n; ++k) {
    model.step(s);
    drift = std::max(drift, std::abs(s.norm_sq() - 1.0));
    pop_max = std::max(pop_max, s.detector_population());
    if (k % sample_every == 0 || k == n) {
      times.push_back(k * model.dt());
      values.push_back(s.survival());
    }
  }
  SeriesMeta meta{model.id(), scale, {{"h", model.grid_h()}, {"dt", model.dt()}}};
  return ScaleRun{SurvivalSeries(std::move(times), std::move(values), std::move(meta)), pop_max,
                  s.detector_population(), drift};
}

}  // namespace detail

namespace detail {

inline NogoReport scale_comparison(const FieldModelConfig& cfg, const DetectorConfig& det,
                                   const std::vector<double>& scales, double total_time,
                                   int sample_every, int jobs) {
  if (scales.empty()) throw contract_error("scale sweep: need at least one scale");
  const ScaleRun baseline = run_for_scale(cfg, det, 0.0, total_time, sample_every);
  std::vector<std::optional<ScaleRun>> runs(scales.size());
  parallel_indexed(static_cast<int>(scales.size()), jobs, [&](int i) {
    if (scales[i] == 0.0)
      runs[i] = baseline;
    else
      runs[i] = run_for_scale(cfg, det, scales[i], total_time, sample_every);
  });
  NogoReport rep;
  for (std::size_t i = 0; i < scales.size(); ++i) {
    const ScaleRun& run = *runs[i];
    const ComparisonReport cmp = compare_survival(run.series, baseline.series);
    rep.entries.push_back(NogoEntry{scales[i], cmp.max_abs, cmp.at_time, run.pop_max,
                                    run.pop_final, run.norm_drift});
    rep.series.push_back(run.series);
  }
  rep.pass = std::all_of(rep.entries.begin(), rep.entries.end(),
                         [&](const NogoEntry& e) { return e.max_abs_dev <= rep.tol; });
  return rep;
}

}  // namespace detail

// Runs the survival experiment at each coupling scale and compares against
// the scale-0 baseline on the identical grid. With a wave-zone detector the
// theorem applies: every deviation must vanish (tol 1e-9).
inline NogoReport nogo_sweep(const FieldModelConfig& cfg, const DetectorConfig& det,
                             const std::vector<double>& scales, double total_time,
                             int sample_every = 1, int jobs = 1) {
  if (det.semidirect || !(det.x_minus > cfg.d / 2))
    throw config_error(
        "nogo_sweep: detector must sit strictly in the wave zone (x_minus > d/2); overlapping "
        "detectors are the semidirect_control experiment");
  return detail::scale_comparison(cfg, det, scales, total_time, sample_every, jobs);
}

// Same sweep with a detector overlapping the atom region (semidirect flag
// required): the theorem hypothesis fails and deviations are expected.
inline NogoReport semidirect_control(const FieldModelConfig& cfg, const DetectorConfig& det,
                                     const std::vector<double>& scales, double total_time,
                                     int sample_every = 1, int jobs = 1) {
  if (!det.semidirect)
    throw config_error("semidirect_control: the detector config must set the semidirect flag");
  if (!(det.x_minus < cfg.d / 2))
    throw config_error("semidirect_control: detector support must overlap the atom region "
                       "(x_minus < d/2)");
  return detail::scale_comparison(cfg, det, scales, total_time, sample_every, jobs);
}

// --- deterministic probe generation -----------------------------------------

namespace detail {

// splitmix64 uniforms and Box-Muller gaussians, no std:: distributions, so
// probe sets are identical across standard libraries.
class ProbeRng {
 public:
  explicit ProbeRng(std::uint64_t seed) : state_(seed) {}
  double uniform() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z = z ^ (z >> 31);
    return static_cast<double>(z >> 11) * 0x1.0p-53;
  }
  Complex gaussian_pair() {
    double u1 = uniform();
    while (u1 == 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return Complex(r * std::cos(2 * std::numbers::pi * u2), r * std::sin(2 * std::numbers::pi * u2));
  }

 private:
  std::uint64_t state_;
};

}  // namespace detail

namespace detail {

// Indices whose evolution stays on the grid for k_steps more steps: F cells
// shift diagonally, D cells shift in x_L and can re-emit at x_plus.
inline std::vector<int> probe_support(const FieldModel& m, int k_steps, bool wave_only) {
  const int i_max = m.n_r() - 3 - k_steps;
  const int j_max = m.n_l() - 3 - k_steps;
  if (i_max < m.n_core() || j_max < 1)
    throw config_error("probe_support: model horizon too small for k_steps");
  const bool d_safe = m.has_detector() && (m.detector_hi() + k_steps <= m.n_r() - 3);
  std::vector<int> idx;
  if (!wave_only) idx.push_back(0);
  for (int i = 0; i <= i_max; ++i)
    for (int j = 0; j <= j_max; ++j) {
      if (wave_only && i < m.n_core() && j < m.n_core()) continue;
      idx.push_back(m.idx_f(i, j));
    }
  if (d_safe)
    for (int mm = 0; mm < m.n_k(); ++mm)
      for (int j = 0; j <= j_max; ++j) idx.push_back(m.idx_d(mm, j));
  return idx;
}

inline ComplexVector random_unit_on(const std::vector<int>& support, int dim, ProbeRng& rng) {
  ComplexVector v = ComplexVector::Zero(dim);
  for (int idx : support) v[idx] = rng.gaussian_pair();
  const double n = v.norm();
  if (n == 0.0) throw numeric_error("probe generation produced a zero vector");
  return v / n;
}

}  // namespace detail

// Random wave-zone-supported states whose evolution stays on the grid for
// k_steps more steps. Support: F cells outside the core square within the
// safe box, plus detector cells when re-emission at x_plus cannot overrun.
inline std::vector<FieldState> wavezone_probes(const FieldModel& m, int n_probes, int k_steps,
                                               std::uint64_t seed) {
  const std::vector<int> support = detail::probe_support(m, k_steps, true);
  detail::ProbeRng rng(seed);
  std::vector<FieldState> probes;
  probes.reserve(n_probes);
  for (int p = 0; p < n_probes; ++p)
    probes.push_back(m.from_vector(detail::random_unit_on(support, m.state_dim(), rng)));
  return probes;
}

// Random normalized states with unrestricted (safe-box) support, for the
// intertwining checker.
inline std::vector<ComplexVector> state_probes(const FieldModel& m, int n_probes, int k_steps,
                                               std::uint64_t seed) {
  const std::vector<int> support = detail::probe_support(m, k_steps, false);
  detail::ProbeRng rng(seed);
  std::vector<ComplexVector> probes;
  probes.reserve(n_probes);
  for (int p = 0; p < n_probes; ++p)
    probes.push_back(detail::random_unit_on(support, m.state_dim(), rng));
  return probes;
}

}  // namespace zenolab
