#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "qpufsim/errors.hpp"

namespace qpufsim {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

// Tolerance hierarchy: construction invariants 1e-10, unitarity 1e-8,
// projector algebra 1e-9, eigensolver comparisons 1e-7.
inline constexpr double kStateTol = 1e-10;
inline constexpr double kUnitaryTol = 1e-8;
inline constexpr double kProjectorTol = 1e-9;
inline constexpr double kEigTol = 1e-7;

Matrix kron(const Matrix& a, const Matrix& b);
Vector kron(const Vector& a, const Vector& b);

/// Unit-norm amplitude vector over a d-dimensional Hilbert space (d >= 2).
/// Global phase is never canonicalized; comparisons go through overlaps.
class PureState {
 public:
  explicit PureState(Vector amplitudes);

  static PureState basis(int dim, int index);
  // Rescales to unit norm; the vector must not be (near) zero.
  static PureState normalized(Vector amplitudes);

  int dim() const { return static_cast<int>(amp_.size()); }
  const Vector& amplitudes() const { return amp_; }

  // <this|other>
  Complex overlap(const PureState& other) const;
  double overlap_sq(const PureState& other) const;

 private:
  Vector amp_;
};

/// Hermitian, trace-1 operator. Positivity is O(d^3) and is only checked on
/// demand via is_positive_semidefinite(), not in the constructor.
class DensityMatrix {
 public:
  explicit DensityMatrix(Matrix entries);

  static DensityMatrix from_pure(const PureState& psi);
  static DensityMatrix maximally_mixed(int dim);

  int dim() const { return static_cast<int>(mat_.rows()); }
  const Matrix& entries() const { return mat_; }

  bool is_positive_semidefinite(double tol = kStateTol) const;

  // real part of <psi|rho|psi>, clamped to [0, 1]
  double expectation(const PureState& psi) const;

 private:
  struct Unchecked {};
  DensityMatrix(Matrix m, Unchecked) : mat_(std::move(m)) {}
  Matrix mat_;
};

/// d x d matrix with U†U = I within 1e-8 max entrywise deviation.
class UnitaryOp {
 public:
  explicit UnitaryOp(Matrix entries);

  static UnitaryOp identity(int dim);

  int dim() const { return static_cast<int>(mat_.rows()); }
  const Matrix& entries() const { return mat_; }

  UnitaryOp adjoint() const;

 private:
  Matrix mat_;
};

/// Arguments of a unitary's eigenvalues, each mapped into [0, 2*pi).
class EigenphaseSet {
 public:
  explicit EigenphaseSet(std::vector<double> phases);

  int size() const { return static_cast<int>(phases_.size()); }
  const std::vector<double>& phases() const { return phases_; }

 private:
  std::vector<double> phases_;
};

// F(rho, |psi><psi|) = sqrt(<psi|rho|psi>)
double fidelity(const DensityMatrix& rho, const PureState& psi);

PureState apply_unitary(const UnitaryOp& u, const PureState& s);

PureState tensor(const PureState& a, const PureState& b);
DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b);
UnitaryOp tensor(const UnitaryOp& a, const UnitaryOp& b);

EigenphaseSet eigenphases(const UnitaryOp& u);

// Eigenvalues of u (no particular order), via the Schur form.
Vector unitary_eigenvalues(const UnitaryOp& u);

// Orthogonal projector onto the symmetric subspace of (C^d)^{tensor m},
// built as the average of all m! permutation operators. Brute-force oracle
// scale only: m <= 4 and d^m <= 4096.
Matrix symmetric_projector(int dim, int m);

}  // namespace qpufsim
