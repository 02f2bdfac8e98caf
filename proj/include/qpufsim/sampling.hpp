#pragma once

#include <cstdint>
#include <vector>

#include "qpufsim/qmath.hpp"
#include "qpufsim/rng.hpp"

namespace qpufsim {

/// Key for the keyed family of phase states. dim must be a power of two.
struct PrsKey {
  std::vector<std::uint8_t> key_bytes;
  int dim = 0;

  void validate() const;
};

/// Key for the seeded brickwork-circuit unitary family.
struct PruKey {
  std::vector<std::uint8_t> key_bytes;
  int n_qubits = 0;
  int depth = 0;

  void validate() const;
};

inline int default_pru_depth(int n_qubits) { return 4 * n_qubits; }

// Haar-random state: d i.i.d. standard complex Gaussians, normalized.
PureState haar_state(int dim, Rng& rng);

// Haar-random unitary: Ginibre matrix, QR factorization, then the diagonal of
// R is phase-corrected so the distribution is exactly Haar.
UnitaryOp haar_unitary(int dim, Rng& rng);

// d^{-1/2} * sum_x omega_d^{f_key(x)} |x>, where f_key is HMAC-SHA256 keyed by
// key_bytes, reduced mod d from its leading 128 bits. Flat amplitudes, unit
// norm by construction.
PureState prs_phase_state(const PrsKey& key);

// Deterministic function of the key: a brickwork circuit of `depth` layers of
// independent Haar two-qubit blocks (single-qubit blocks at n_qubits = 1).
// n_qubits is capped at 8.
UnitaryOp pru_unitary(const PruKey& key);

// Haar-random state in the (d-1)-dimensional orthogonal complement of the
// challenge; the output overlap with the challenge is 0 within 1e-10.
PureState trap_state(const PureState& challenge, Rng& rng);

PrsKey random_prs_key(int dim, int n_bytes, Rng& rng);
PruKey random_pru_key(int n_qubits, int depth, Rng& rng);

}  // namespace qpufsim
