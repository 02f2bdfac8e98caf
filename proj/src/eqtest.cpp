#include "qpufsim/eqtest.hpp"

#include <cmath>

#include "qpufsim/errors.hpp"

namespace qpufsim {

namespace {

void require_same_dim(int a, int b, const char* op) {
  if (a != b) throw DimensionMismatch(std::string(op) + ": operand dimensions differ");
}

TestOutcome sample_outcome(const TestPolicy& policy, double p_single, Rng& rng) {
  if (policy.kind == TestKind::Swap) {
    bool all = true;
    for (int i = 0; i < policy.copies_m; ++i)
      if (!rng.bernoulli(p_single)) {
        all = false;
        break;
      }
    return TestOutcome{all, std::pow(p_single, policy.copies_m)};
  }
  const bool ok = rng.bernoulli(p_single);
  return TestOutcome{ok, p_single};
}

}  // namespace

void TestPolicy::validate() const {
  if (copies_m < 1) throw ConfigError("TestPolicy: copies_m must be >= 1");
}

double swap_accept_prob(const DensityMatrix& rho, const DensityMatrix& sigma) {
  require_same_dim(rho.dim(), sigma.dim(), "swap_accept_prob");
  const double tr = (rho.entries() * sigma.entries()).trace().real();
  if (tr < -kStateTol)
    throw NumericError("swap_accept_prob: Tr(rho sigma) negative beyond tolerance");
  return 0.5 + 0.5 * tr;
}

double swap_accept_prob(const DensityMatrix& rho, const PureState& psi) {
  require_same_dim(rho.dim(), psi.dim(), "swap_accept_prob");
  return 0.5 + 0.5 * rho.expectation(psi);
}

double swap_circuit_oracle(const DensityMatrix& rho, const PureState& psi) {
  require_same_dim(rho.dim(), psi.dim(), "swap_circuit_oracle");
  const int d = rho.dim();
  if (d > 16) throw RefusalError("swap_circuit_oracle: d above oracle scale 16");
  const int dd = d * d;
  const int total = 2 * dd;

  // ancilla |0><0| ⊗ rho ⊗ |psi><psi|
  Matrix anc0 = Matrix::Zero(2, 2);
  anc0(0, 0) = 1.0;
  const Vector& a = psi.amplitudes();
  Matrix rho_tot = kron(anc0, kron(rho.entries(), Matrix(a * a.adjoint())));

  Matrix h2(2, 2);
  const double s = 1.0 / std::sqrt(2.0);
  h2 << s, s, s, -s;
  const Matrix h_anc = kron(h2, Matrix::Identity(dd, dd));

  // SWAP of the two d-dimensional registers, controlled on the ancilla
  Matrix swap_regs = Matrix::Zero(dd, dd);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) swap_regs(j * d + i, i * d + j) = 1.0;
  Matrix cswap = Matrix::Zero(total, total);
  cswap.topLeftCorner(dd, dd) = Matrix::Identity(dd, dd);
  cswap.bottomRightCorner(dd, dd) = swap_regs;

  const Matrix circuit = h_anc * cswap * h_anc;
  const Matrix out = circuit * rho_tot * circuit.adjoint();

  // probability of ancilla outcome 0 = trace of the top-left block
  return out.topLeftCorner(dd, dd).trace().real();
}

double gswap_accept_prob(const DensityMatrix& rho, const PureState& psi, int m) {
  require_same_dim(rho.dim(), psi.dim(), "gswap_accept_prob");
  if (m < 1) throw ConfigError("gswap_accept_prob: m must be >= 1");
  const double f_sq = rho.expectation(psi);
  return 1.0 / (m + 1.0) + (m / (m + 1.0)) * f_sq;
}

double gswap_accept_prob(const PureState& omega, const PureState& psi, int m) {
  require_same_dim(omega.dim(), psi.dim(), "gswap_accept_prob");
  if (m < 1) throw ConfigError("gswap_accept_prob: m must be >= 1");
  return 1.0 / (m + 1.0) + (m / (m + 1.0)) * psi.overlap_sq(omega);
}

double gswap_projector_oracle(const DensityMatrix& rho, const PureState& psi, int m) {
  require_same_dim(rho.dim(), psi.dim(), "gswap_projector_oracle");
  if (m < 1 || m > 3) throw RefusalError("gswap_projector_oracle: m above oracle scale 3");
  const int d = rho.dim();
  if (d > 4) throw RefusalError("gswap_projector_oracle: d above oracle scale 4");

  const Vector& a = psi.amplitudes();
  Matrix psi_m = a * a.adjoint();
  for (int i = 1; i < m; ++i) psi_m = kron(psi_m, Matrix(a * a.adjoint()));

  const Matrix joint = kron(rho.entries(), psi_m);
  const Matrix proj = symmetric_projector(d, m + 1);
  return (proj * joint).trace().real();
}

TestOutcome run_test(const TestPolicy& policy, const DensityMatrix& rho, const PureState& psi,
                     Rng& rng) {
  policy.validate();
  const double p = policy.kind == TestKind::Swap
                       ? swap_accept_prob(rho, psi)
                       : gswap_accept_prob(rho, psi, policy.copies_m);
  return sample_outcome(policy, p, rng);
}

TestOutcome run_test(const TestPolicy& policy, const PureState& omega, const PureState& psi,
                     Rng& rng) {
  policy.validate();
  const double overlap_sq = psi.overlap_sq(omega);
  const double p = policy.kind == TestKind::Swap
                       ? 0.5 + 0.5 * overlap_sq
                       : 1.0 / (policy.copies_m + 1.0) +
                             (policy.copies_m / (policy.copies_m + 1.0)) * overlap_sq;
  return sample_outcome(policy, p, rng);
}

}  // namespace qpufsim
