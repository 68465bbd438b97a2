// linops.hpp - dense complex linear-operator kernel: Hermitian operators,
// unitary propagation via spectral decomposition, basis-aligned projectors.
//
// Units: hbar = 1 throughout. All dimensions are desk scale (<= 512), so the
// matrix exponential is always the exact spectral one, exp(-iHt) = V e^{-iwt} V^+.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "zenolab/errors.hpp"

namespace zenolab {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;

inline constexpr double kHermiticityTol = 1e-12;

namespace detail {
inline bool all_finite(const ComplexMatrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) return false;
  return true;
}
}  // namespace detail

// Dense Hermitian operator. Construction validates hermiticity to 1e-12
// (relative to the largest entry) and stores the symmetrized (H + H^+)/2,
// absorbing rounding from config arithmetic.
class HermitianOperator {
 public:
  explicit HermitianOperator(ComplexMatrix entries) {
    if (entries.rows() != entries.cols() || entries.rows() < 1)
      throw contract_error("HermitianOperator: matrix must be square with dim >= 1");
    if (!detail::all_finite(entries))
      throw numeric_error("HermitianOperator: non-finite entries");
    const double scale = std::max(1.0, entries.cwiseAbs().maxCoeff());
    const double defect = (entries - entries.adjoint()).cwiseAbs().maxCoeff();
    if (defect > kHermiticityTol * scale)
      throw contract_error("HermitianOperator: hermiticity defect " + std::to_string(defect) +
                           " exceeds tolerance");
    m_ = ((entries + entries.adjoint()) / 2.0).eval();
  }

  int dim() const { return static_cast<int>(m_.rows()); }
  const ComplexMatrix& entries() const { return m_; }

  Complex operator()(int i, int j) const { return m_(i, j); }

 private:
  ComplexMatrix m_;
};

// Cached eigendecomposition of a Hermitian operator, for evaluating
// exp(-iHt) at many times without re-diagonalizing.
class SpectralPropagator {
 public:
  explicit SpectralPropagator(const HermitianOperator& h) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h.entries());
    if (es.info() != Eigen::Success)
      throw numeric_error("SpectralPropagator: eigendecomposition failed");
    vecs_ = es.eigenvectors();
    vals_ = es.eigenvalues();
  }

  int dim() const { return static_cast<int>(vals_.size()); }

  // exp(-iHt) v
  ComplexVector apply(double t, const ComplexVector& v) const {
    if (!std::isfinite(t)) throw numeric_error("SpectralPropagator: non-finite time");
    if (v.size() != vals_.size())
      throw contract_error("SpectralPropagator: dimension mismatch");
    ComplexVector coeffs = vecs_.adjoint() * v;
    for (Eigen::Index i = 0; i < coeffs.size(); ++i)
      coeffs[i] *= std::polar(1.0, -vals_[i] * t);
    return vecs_ * coeffs;
  }

  // Materialized exp(-iHt)
  ComplexMatrix matrix(double t) const {
    if (!std::isfinite(t)) throw numeric_error("SpectralPropagator: non-finite time");
    ComplexVector phases(vals_.size());
    for (Eigen::Index i = 0; i < vals_.size(); ++i)
      phases[i] = std::polar(1.0, -vals_[i] * t);
    return vecs_ * phases.asDiagonal() * vecs_.adjoint();
  }

  const Eigen::VectorXd& eigenvalues() const { return vals_; }

 private:
  ComplexMatrix vecs_;
  Eigen::VectorXd vals_;
};

// A unitary step map. `apply` may wrap a materialized matrix or any
// norm-preserving procedure (e.g. the field model's split step), so checkers
// built on UnitaryMap work for both.
struct UnitaryMap {
  int dim = 0;
  std::string label;
  std::function<ComplexVector(const ComplexVector&)> apply;

  ComplexVector operator()(const ComplexVector& v) const {
    if (v.size() != dim) throw contract_error("UnitaryMap '" + label + "': dimension mismatch");
    return apply(v);
  }
};

// exp(-iHt) v by spectral decomposition.
inline ComplexVector expm_apply(const HermitianOperator& h, double t, const ComplexVector& v) {
  if (v.size() != h.dim()) throw contract_error("expm_apply: dimension mismatch");
  return SpectralPropagator(h).apply(t, v);
}

// Materialize exp(-iHt) as a UnitaryMap backed by a dense matrix.
inline UnitaryMap unitary_matrix(const HermitianOperator& h, double t) {
  ComplexMatrix u = SpectralPropagator(h).matrix(t);
  return UnitaryMap{h.dim(), "expm(dim=" + std::to_string(h.dim()) + ")",
                    [u = std::move(u)](const ComplexVector& v) -> ComplexVector { return u * v; }};
}

/// Basis-aligned projector: keeps the amplitudes on `indices`, zeroes the rest.
// Index-set projectors are exactly idempotent.
class Projector {
 public:
  Projector(std::vector<int> indices, int dim) : indices_(std::move(indices)), dim_(dim) {
    if (dim_ < 1) throw contract_error("Projector: dim must be >= 1");
    std::sort(indices_.begin(), indices_.end());
    indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
    for (int i : indices_)
      if (i < 0 || i >= dim_)
        throw contract_error("Projector: index " + std::to_string(i) + " out of range [0," +
                             std::to_string(dim_) + ")");
  }

  int dim() const { return dim_; }
  const std::vector<int>& indices() const { return indices_; }

  ComplexVector apply(const ComplexVector& v) const {
    if (v.size() != dim_) throw contract_error("Projector: dimension mismatch");
    ComplexVector out = ComplexVector::Zero(dim_);
    for (int i : indices_) out[i] = v[i];
    return out;
  }

  // ||P v|| without materializing P v.
  double projected_norm(const ComplexVector& v) const {
    if (v.size() != dim_) throw contract_error("Projector: dimension mismatch");
    double s = 0.0;
    for (int i : indices_) s += std::norm(v[i]);
    return std::sqrt(s);
  }

  Projector complement() const {
    std::vector<int> rest;
    rest.reserve(dim_ - indices_.size());
    std::size_t k = 0;
    for (int i = 0; i < dim_; ++i) {
      if (k < indices_.size() && indices_[k] == i) {
        ++k;
      } else {
        rest.push_back(i);
      }
    }
    return Projector(std::move(rest), dim_);
  }

 private:
  std::vector<int> indices_;
  int dim_;
};

inline Projector projector_from_indices(std::vector<int> indices, int dim) {
  return Projector(std::move(indices), dim);
}

}  // namespace zenolab
