#include "qpufsim/qmath.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace qpufsim {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw NumericError(what);
}

void require_same_dim(int a, int b, const char* op) {
  if (a != b) throw DimensionMismatch(std::string(op) + ": operand dimensions differ");
}

}  // namespace

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Vector kron(const Vector& a, const Vector& b) {
  Vector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

PureState::PureState(Vector amplitudes) : amp_(std::move(amplitudes)) {
  if (amp_.size() < 2) throw NumericError("PureState: dimension must be >= 2");
  const double norm = amp_.norm();
  if (std::abs(norm - 1.0) > kStateTol)
    throw NumericError("PureState: amplitudes not unit norm (|norm-1| = " +
                       std::to_string(std::abs(norm - 1.0)) + ")");
}

PureState PureState::basis(int dim, int index) {
  if (dim < 2 || index < 0 || index >= dim) throw NumericError("PureState::basis: bad index/dim");
  Vector v = Vector::Zero(dim);
  v(index) = 1.0;
  return PureState(std::move(v));
}

PureState PureState::normalized(Vector amplitudes) {
  const double norm = amplitudes.norm();
  if (norm < 1e-12) throw NumericError("PureState::normalized: vector is (near) zero");
  amplitudes /= norm;
  return PureState(std::move(amplitudes));
}

Complex PureState::overlap(const PureState& other) const {
  require_same_dim(dim(), other.dim(), "overlap");
  return amp_.dot(other.amp_);  // Eigen conjugates the left argument
}

double PureState::overlap_sq(const PureState& other) const {
  return std::norm(overlap(other));
}

DensityMatrix::DensityMatrix(Matrix entries) : mat_(std::move(entries)) {
  if (mat_.rows() != mat_.cols() || mat_.rows() < 2)
    throw NumericError("DensityMatrix: must be square with dim >= 2");
  const double herm_dev = (mat_ - mat_.adjoint().eval()).cwiseAbs().maxCoeff();
  if (herm_dev > kStateTol) throw NumericError("DensityMatrix: not Hermitian within 1e-10");
  const double trace_dev = std::abs(mat_.trace() - Complex(1.0, 0.0));
  if (trace_dev > kStateTol) throw NumericError("DensityMatrix: trace not 1 within 1e-10");
}

DensityMatrix DensityMatrix::from_pure(const PureState& psi) {
  const Vector& a = psi.amplitudes();
  return DensityMatrix(a * a.adjoint(), Unchecked{});
}

DensityMatrix DensityMatrix::maximally_mixed(int dim) {
  if (dim < 2) throw NumericError("maximally_mixed: dim must be >= 2");
  return DensityMatrix(Matrix::Identity(dim, dim) / static_cast<double>(dim), Unchecked{});
}

bool DensityMatrix::is_positive_semidefinite(double tol) const {
  Eigen::SelfAdjointEigenSolver<Matrix> es(mat_, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw NumericError("DensityMatrix: eigensolver failed to converge");
  return es.eigenvalues().minCoeff() >= -tol;
}

double DensityMatrix::expectation(const PureState& psi) const {
  require_same_dim(dim(), psi.dim(), "expectation");
  const Complex v = psi.amplitudes().dot(mat_ * psi.amplitudes());
  return std::clamp(v.real(), 0.0, 1.0);
}

UnitaryOp::UnitaryOp(Matrix entries) : mat_(std::move(entries)) {
  if (mat_.rows() != mat_.cols() || mat_.rows() < 2)
    throw NumericError("UnitaryOp: must be square with dim >= 2");
  const Matrix gram = mat_.adjoint() * mat_;
  const double dev = (gram - Matrix::Identity(mat_.rows(), mat_.cols())).cwiseAbs().maxCoeff();
  if (dev > kUnitaryTol)
    throw NumericError("UnitaryOp: U†U deviates from identity by " + std::to_string(dev));
}

UnitaryOp UnitaryOp::identity(int dim) { return UnitaryOp(Matrix::Identity(dim, dim)); }

UnitaryOp UnitaryOp::adjoint() const { return UnitaryOp(mat_.adjoint()); }

EigenphaseSet::EigenphaseSet(std::vector<double> phases) : phases_(std::move(phases)) {
  for (double p : phases_)
    if (!(p >= 0.0 && p < 2.0 * M_PI))
      throw NumericError("EigenphaseSet: phase outside [0, 2*pi)");
}

double fidelity(const DensityMatrix& rho, const PureState& psi) {
  return std::sqrt(rho.expectation(psi));
}

PureState apply_unitary(const UnitaryOp& u, const PureState& s) {
  require_same_dim(u.dim(), s.dim(), "apply_unitary");
  return PureState(u.entries() * s.amplitudes());
}

PureState tensor(const PureState& a, const PureState& b) {
  return PureState(kron(a.amplitudes(), b.amplitudes()));
}

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  return DensityMatrix(kron(a.entries(), b.entries()));
}

UnitaryOp tensor(const UnitaryOp& a, const UnitaryOp& b) {
  return UnitaryOp(kron(a.entries(), b.entries()));
}

Vector unitary_eigenvalues(const UnitaryOp& u) {
  Eigen::ComplexSchur<Matrix> schur(u.entries(), /*computeU=*/false);
  require(schur.info() == Eigen::Success, "unitary_eigenvalues: Schur iteration did not converge");
  return schur.matrixT().diagonal();
}

EigenphaseSet eigenphases(const UnitaryOp& u) {
  const Vector evs = unitary_eigenvalues(u);
  std::vector<double> phases(evs.size());
  for (Eigen::Index i = 0; i < evs.size(); ++i) {
    double theta = std::arg(evs(i));
    if (theta < 0.0) theta += 2.0 * M_PI;
    if (theta >= 2.0 * M_PI) theta = 0.0;
    phases[static_cast<std::size_t>(i)] = theta;
  }
  return EigenphaseSet(std::move(phases));
}

Matrix symmetric_projector(int dim, int m) {
  if (dim < 2) throw RefusalError("symmetric_projector: dim must be >= 2");
  if (m < 1 || m > 4) throw RefusalError("symmetric_projector: m outside oracle scale [1,4]");
  double total = 1.0;
  for (int i = 0; i < m; ++i) total *= dim;
  if (total > 4096.0) throw RefusalError("symmetric_projector: d^m exceeds oracle scale 4096");

  const int big = static_cast<int>(total);
  std::vector<int> perm(m);
  std::iota(perm.begin(), perm.end(), 0);

  Matrix proj = Matrix::Zero(big, big);
  int n_perms = 0;
  do {
    // permutation operator: register r of the target takes register perm[r]
    // of the source (register 0 = most significant digit base dim)
    for (int from = 0; from < big; ++from) {
      int digits[4] = {0, 0, 0, 0};
      int rem = from;
      for (int r = m - 1; r >= 0; --r) {
        digits[r] = rem % dim;
        rem /= dim;
      }
      int to = 0;
      for (int r = 0; r < m; ++r) to = to * dim + digits[perm[r]];
      proj(to, from) += 1.0;
    }
    ++n_perms;
  } while (std::next_permutation(perm.begin(), perm.end()));

  proj /= static_cast<double>(n_perms);
  return proj;
}

}  // namespace qpufsim
