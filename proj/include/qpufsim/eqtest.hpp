#pragma once

#include "qpufsim/qmath.hpp"
#include "qpufsim/rng.hpp"

namespace qpufsim {

enum class TestKind { Swap, Gswap };

/// SWAP: copies_m independent circuit repetitions, accept iff all accept.
/// GSWAP: one test with copies_m reference copies.
struct TestPolicy {
  TestKind kind = TestKind::Swap;
  int copies_m = 1;

  void validate() const;
};

struct TestOutcome {
  bool accepted = false;
  double p_accept = 0.0;  // the compound analytic probability that was sampled
};

// Pr[accept] = 1/2 + Tr(rho sigma)/2
double swap_accept_prob(const DensityMatrix& rho, const DensityMatrix& sigma);
double swap_accept_prob(const DensityMatrix& rho, const PureState& psi);

// Explicit ancilla + H + controlled-SWAP + H circuit on ancilla ⊗ rho ⊗ psi;
// returns the probability of ancilla outcome 0. Oracle scale d <= 16.
double swap_circuit_oracle(const DensityMatrix& rho, const PureState& psi);

// Pr[accept] = 1/(m+1) + m/(m+1) * <psi|rho|psi>
double gswap_accept_prob(const DensityMatrix& rho, const PureState& psi, int m);
double gswap_accept_prob(const PureState& omega, const PureState& psi, int m);

// Tr(Pi_sym (rho ⊗ psi^{⊗m})) over m+1 registers. Oracle scale d <= 4, m <= 3.
double gswap_projector_oracle(const DensityMatrix& rho, const PureState& psi, int m);

// Samples the test outcome from the exact analytic distribution.
TestOutcome run_test(const TestPolicy& policy, const DensityMatrix& rho, const PureState& psi,
                     Rng& rng);
TestOutcome run_test(const TestPolicy& policy, const PureState& omega, const PureState& psi,
                     Rng& rng);

}  // namespace qpufsim
