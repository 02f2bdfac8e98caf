#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "qpufsim/errors.hpp"
#include "qpufsim/qmath.hpp"
#include "qpufsim/sampling.hpp"
#include "test_util.hpp"

using namespace qpufsim;
using doctest::Approx;

namespace {

Matrix hadamard() {
  Matrix h(2, 2);
  const double s = 1.0 / std::sqrt(2.0);
  h << s, s, s, -s;
  return h;
}

}  // namespace

TEST_CASE("pure state invariants") {
  Vector bad(2);
  bad << 0.5, 0.5;
  CHECK_THROWS_AS(PureState{bad}, NumericError);

  Vector tiny(1);
  tiny << 1.0;
  CHECK_THROWS_AS(PureState{tiny}, NumericError);

  const PureState s = PureState::basis(4, 2);
  CHECK(s.dim() == 4);
  CHECK(s.amplitudes()(2) == Complex(1.0, 0.0));
}

TEST_CASE("density matrix invariants") {
  Matrix not_herm(2, 2);
  not_herm << Complex(0.5, 0.0), Complex(0.1, 0.2), Complex(0.1, 0.1), Complex(0.5, 0.0);
  CHECK_THROWS_AS(DensityMatrix{not_herm}, NumericError);

  Matrix bad_trace = Matrix::Identity(2, 2);
  CHECK_THROWS_AS(DensityMatrix{bad_trace}, NumericError);

  const DensityMatrix mixed = DensityMatrix::maximally_mixed(2);
  CHECK(mixed.is_positive_semidefinite());

  // hermitian trace-1 but indefinite: caught only by the lazy check
  Matrix indefinite(2, 2);
  indefinite << 1.5, 0.0, 0.0, -0.5;
  CHECK_FALSE(DensityMatrix(indefinite).is_positive_semidefinite());
}

TEST_CASE("unitary invariant") {
  Matrix not_unitary(2, 2);
  not_unitary << 1.0, 0.0, 0.0, 0.5;
  CHECK_THROWS_AS(UnitaryOp{not_unitary}, NumericError);
  CHECK(UnitaryOp::identity(3).dim() == 3);
}

TEST_CASE("fidelity against hand-evaluated overlaps") {
  Rng rng(RngStream{11, 0});
  const PureState psi = haar_state(4, rng);
  CHECK(fidelity(DensityMatrix::from_pure(psi), psi) == Approx(1.0).epsilon(1e-12));

  CHECK(fidelity(DensityMatrix::from_pure(PureState::basis(2, 0)), PureState::basis(2, 1)) ==
        Approx(0.0).epsilon(1e-12));

  // <0|(I/2)|0> = 1/2 by direct matrix-vector arithmetic
  CHECK(fidelity(DensityMatrix::maximally_mixed(2), PureState::basis(2, 0)) ==
        Approx(std::sqrt(0.5)).epsilon(1e-12));

  CHECK_THROWS_AS(fidelity(DensityMatrix::maximally_mixed(2), PureState::basis(4, 0)),
                  DimensionMismatch);
}

TEST_CASE("apply_unitary matches direct multiplication") {
  const PureState zero = PureState::basis(2, 0);
  CHECK(apply_unitary(UnitaryOp::identity(2), zero).amplitudes() == zero.amplitudes());

  Matrix x(2, 2);
  x << 0, 1, 1, 0;
  const PureState flipped = apply_unitary(UnitaryOp(x), zero);
  CHECK(std::abs(flipped.amplitudes()(1) - Complex(1.0, 0.0)) < 1e-14);

  const UnitaryOp h(hadamard());
  const Vector oracle = hadamard() * zero.amplitudes();  // independent multiply
  CHECK((apply_unitary(h, zero).amplitudes() - oracle).norm() < 1e-14);
  CHECK(apply_unitary(h, zero).amplitudes()(0).real() == Approx(1.0 / std::sqrt(2.0)));
}

TEST_CASE("apply_unitary preserves norm across random pairs") {
  Rng rng(RngStream{21, 0});
  for (int d : {2, 4, 8, 16}) {
    for (int i = 0; i < 250; ++i) {
      const UnitaryOp u = haar_unitary(d, rng);
      const PureState s = haar_state(d, rng);
      CHECK(std::abs(apply_unitary(u, s).amplitudes().norm() - 1.0) < 1e-10);
    }
  }
}

TEST_CASE("tensor products by index arithmetic") {
  const PureState b01 = tensor(PureState::basis(2, 0), PureState::basis(2, 1));
  CHECK(b01.dim() == 4);
  CHECK(std::abs(b01.amplitudes()(1) - Complex(1.0, 0.0)) < 1e-14);

  const UnitaryOp i4 = tensor(UnitaryOp::identity(2), UnitaryOp::identity(2));
  CHECK((i4.entries() - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-14);

  const PureState plus = apply_unitary(UnitaryOp(hadamard()), PureState::basis(2, 0));
  const PureState prod = tensor(plus, PureState::basis(2, 0));
  // amplitudes land at indices 0*2+0 and 1*2+0
  CHECK(prod.amplitudes()(0).real() == Approx(1.0 / std::sqrt(2.0)));
  CHECK(prod.amplitudes()(2).real() == Approx(1.0 / std::sqrt(2.0)));
  CHECK(std::abs(prod.amplitudes()(1)) < 1e-14);
  CHECK(std::abs(prod.amplitudes()(3)) < 1e-14);

  Rng rng(RngStream{22, 0});
  const DensityMatrix a = test_util::random_density(2, 2, rng);
  const DensityMatrix b = test_util::random_density(3, 2, rng);
  const DensityMatrix ab = tensor(a, b);
  CHECK(ab.dim() == 6);
  CHECK(ab.entries()(5, 5).real() ==
        Approx((a.entries()(1, 1) * b.entries()(2, 2)).real()).epsilon(1e-12));
}

TEST_CASE("eigenphases of simple operators") {
  const EigenphaseSet id_phases = eigenphases(UnitaryOp::identity(3));
  for (double p : id_phases.phases()) CHECK(p == Approx(0.0).epsilon(1e-12));

  Matrix z(2, 2);
  z << 1, 0, 0, -1;
  std::vector<double> zp = eigenphases(UnitaryOp(z)).phases();
  std::sort(zp.begin(), zp.end());
  CHECK(zp[0] == Approx(0.0).epsilon(1e-10));
  CHECK(zp[1] == Approx(M_PI).epsilon(1e-10));

  // H has trace 0 and determinant -1, so the characteristic polynomial is
  // lambda^2 - 1 and the eigenvalues are +1 and -1
  std::vector<double> hp = eigenphases(UnitaryOp(hadamard())).phases();
  std::sort(hp.begin(), hp.end());
  CHECK(hp[0] == Approx(0.0).epsilon(1e-10));
  CHECK(hp[1] == Approx(M_PI).epsilon(1e-10));
}

TEST_CASE("eigenphases reconstruct the characteristic polynomial") {
  Rng rng(RngStream{23, 0});
  for (int d : {2, 4, 8}) {
    const UnitaryOp u = haar_unitary(d, rng);
    const EigenphaseSet phases = eigenphases(u);
    for (int k = 0; k < 5; ++k) {
      const Complex lambda(1.5 * std::cos(k + 0.3), 1.5 * std::sin(k + 0.3));
      Complex prod(1.0, 0.0);
      for (double theta : phases.phases())
        prod *= lambda - Complex(std::cos(theta), std::sin(theta));
      const Complex det = (lambda * Matrix::Identity(d, d) - u.entries()).determinant();
      CHECK(std::abs(prod - det) / std::abs(det) < 1e-6);
    }
  }
}

TEST_CASE("eigenphase multiset reproduces the spectrum") {
  Rng rng(RngStream{24, 0});
  const UnitaryOp u = haar_unitary(8, rng);
  const Vector evs = unitary_eigenvalues(u);
  const EigenphaseSet phases = eigenphases(u);
  for (double theta : phases.phases()) {
    const Complex z(std::cos(theta), std::sin(theta));
    double best = 1e9;
    for (Eigen::Index i = 0; i < evs.size(); ++i) best = std::min(best, std::abs(z - evs(i)));
    CHECK(best < 1e-7);
  }
}

TEST_CASE("symmetric projector rank and idempotence") {
  const Matrix p22 = symmetric_projector(2, 2);
  CHECK(p22.trace().real() == Approx(3.0).epsilon(1e-12));  // C(3,2)
  CHECK((p22 * p22 - p22).cwiseAbs().maxCoeff() < 1e-9);

  const Matrix p51 = symmetric_projector(5, 1);
  CHECK((p51 - Matrix::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-12);

  const Matrix p23 = symmetric_projector(2, 3);
  CHECK(p23.trace().real() == Approx(4.0).epsilon(1e-12));  // C(4,3)
  CHECK((p23 * p23 - p23).cwiseAbs().maxCoeff() < 1e-9);

  const Matrix p33 = symmetric_projector(3, 3);
  CHECK(p33.trace().real() == Approx(10.0).epsilon(1e-12));  // C(5,3)
  CHECK((p33 * p33 - p33).cwiseAbs().maxCoeff() < 1e-9);

  CHECK_THROWS_AS(symmetric_projector(2, 5), RefusalError);
  CHECK_THROWS_AS(symmetric_projector(512, 2), RefusalError);
  CHECK_THROWS_AS(symmetric_projector(1, 2), RefusalError);
}

TEST_CASE("haar overlap moment is 1/d") {
  Rng rng(RngStream{25, 0});
  const int d = 8;
  std::vector<double> overlaps;
  overlaps.reserve(10000);
  for (int i = 0; i < 10000; ++i) {
    const PureState a = haar_state(d, rng);
    const PureState b = haar_state(d, rng);
    overlaps.push_back(a.overlap_sq(b));
  }
  const auto [mean, se] = test_util::mean_std_err(overlaps);
  CHECK(std::abs(mean - 1.0 / d) <= 5.0 * se);
}
