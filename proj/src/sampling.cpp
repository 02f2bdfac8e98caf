#include "qpufsim/sampling.hpp"

#include <openssl/core_names.h>
#include <openssl/evp.h>

#include <Eigen/QR>
#include <array>
#include <cmath>
#include <cstring>
#include <memory>

#include "qpufsim/errors.hpp"

namespace qpufsim {

namespace {

bool is_power_of_two(int x) { return x > 0 && (x & (x - 1)) == 0; }

// HMAC-SHA256 with a fixed key, reusable across messages.
class HmacSha256 {
 public:
  explicit HmacSha256(const std::vector<std::uint8_t>& key) {
    mac_ = EVP_MAC_fetch(nullptr, "HMAC", nullptr);
    if (mac_ == nullptr) throw NumericError("HMAC: EVP_MAC_fetch failed");
    ctx_ = EVP_MAC_CTX_new(mac_);
    if (ctx_ == nullptr) throw NumericError("HMAC: EVP_MAC_CTX_new failed");
    char digest_name[] = "SHA256";
    OSSL_PARAM params[] = {
        OSSL_PARAM_construct_utf8_string(OSSL_MAC_PARAM_DIGEST, digest_name, 0),
        OSSL_PARAM_construct_end()};
    if (EVP_MAC_init(ctx_, key.data(), key.size(), params) != 1)
      throw NumericError("HMAC: EVP_MAC_init failed");
  }

  ~HmacSha256() {
    if (ctx_ != nullptr) EVP_MAC_CTX_free(ctx_);
    if (mac_ != nullptr) EVP_MAC_free(mac_);
  }

  HmacSha256(const HmacSha256&) = delete;
  HmacSha256& operator=(const HmacSha256&) = delete;

  std::array<std::uint8_t, 32> digest(const std::uint8_t* msg, std::size_t len) {
    // re-init with the retained key, then one update/final round
    if (EVP_MAC_init(ctx_, nullptr, 0, nullptr) != 1)
      throw NumericError("HMAC: re-init failed");
    if (EVP_MAC_update(ctx_, msg, len) != 1) throw NumericError("HMAC: update failed");
    std::array<std::uint8_t, 32> out{};
    std::size_t outlen = 0;
    if (EVP_MAC_final(ctx_, out.data(), &outlen, out.size()) != 1 || outlen != 32)
      throw NumericError("HMAC: final failed");
    return out;
  }

 private:
  EVP_MAC* mac_ = nullptr;
  EVP_MAC_CTX* ctx_ = nullptr;
};

std::array<std::uint8_t, 32> sha256(const std::uint8_t* msg, std::size_t len) {
  std::array<std::uint8_t, 32> out{};
  unsigned int outlen = 0;
  if (EVP_Digest(msg, len, out.data(), &outlen, EVP_sha256(), nullptr) != 1 || outlen != 32)
    throw NumericError("SHA256: EVP_Digest failed");
  return out;
}

std::uint64_t load_u64_be(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | p[i];
  return v;
}

// Ginibre + QR with R-diagonal phase correction (exact Haar measure).
Matrix haar_unitary_matrix(int dim, Rng& rng) {
  Matrix g(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) g(i, j) = rng.complex_gaussian();
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix& r = qr.matrixQR();
  for (int j = 0; j < dim; ++j) {
    const Complex rjj = r(j, j);
    const double mag = std::abs(rjj);
    if (mag == 0.0) throw NumericError("haar_unitary: QR produced a zero diagonal entry");
    q.col(j) *= rjj / mag;
  }
  return q;
}

// two-qubit (or one-qubit) Haar block embedded at wire `pos` of n wires;
// wire 0 is the most significant factor
Matrix embed_block(const Matrix& block, int pos, int block_qubits, int n_qubits) {
  const int left = 1 << pos;
  const int right = 1 << (n_qubits - pos - block_qubits);
  Matrix out = block;
  if (left > 1) out = kron(Matrix::Identity(left, left), out);
  if (right > 1) out = kron(out, Matrix::Identity(right, right));
  return out;
}

}  // namespace

void PrsKey::validate() const {
  if (!is_power_of_two(dim) || dim < 2) throw ConfigError("PrsKey: dim must be a power of 2, >= 2");
  if (key_bytes.empty()) throw ConfigError("PrsKey: empty key");
}

void PruKey::validate() const {
  if (n_qubits < 1) throw ConfigError("PruKey: n_qubits must be >= 1");
  if (n_qubits > 8) throw RefusalError("PruKey: n_qubits above desk-scale budget of 8");
  if (depth < 1) throw ConfigError("PruKey: depth must be >= 1");
  if (key_bytes.empty()) throw ConfigError("PruKey: empty key");
}

PureState haar_state(int dim, Rng& rng) {
  if (dim < 2) throw ConfigError("haar_state: dim must be >= 2");
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v(i) = rng.complex_gaussian();
  return PureState::normalized(std::move(v));
}

UnitaryOp haar_unitary(int dim, Rng& rng) {
  if (dim < 2) throw ConfigError("haar_unitary: dim must be >= 2");
  return UnitaryOp(haar_unitary_matrix(dim, rng));
}

PureState prs_phase_state(const PrsKey& key) {
  key.validate();
  const int d = key.dim;
  HmacSha256 mac(key.key_bytes);
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
  const double omega_step = 2.0 * M_PI / static_cast<double>(d);

  Vector amp(d);
  for (int x = 0; x < d; ++x) {
    std::uint8_t msg[8];
    for (int i = 0; i < 8; ++i) msg[i] = static_cast<std::uint8_t>((std::uint64_t(x) >> (8 * i)) & 0xff);
    const auto h = mac.digest(msg, sizeof msg);
    // leading 128 hash bits reduced mod d (exact for power-of-two d)
    const unsigned __int128 wide =
        (static_cast<unsigned __int128>(load_u64_be(h.data())) << 64) | load_u64_be(h.data() + 8);
    const int f = static_cast<int>(wide % static_cast<unsigned>(d));
    const double phase = omega_step * f;
    amp(x) = Complex(std::cos(phase), std::sin(phase)) * inv_sqrt_d;
  }
  return PureState(std::move(amp));
}

UnitaryOp pru_unitary(const PruKey& key) {
  key.validate();
  const int n = key.n_qubits;
  const int d = 1 << n;

  // derive the gate stream from the key bytes
  const auto h = sha256(key.key_bytes.data(), key.key_bytes.size());
  Rng rng(RngStream{load_u64_be(h.data()), load_u64_be(h.data() + 8)});

  Matrix u = Matrix::Identity(d, d);
  for (int layer = 0; layer < key.depth; ++layer) {
    Matrix layer_mat = Matrix::Identity(d, d);
    if (n == 1) {
      layer_mat = haar_unitary_matrix(2, rng);
    } else {
      const int offset = layer % 2;
      for (int q = offset; q + 1 < n; q += 2) {
        const Matrix block = haar_unitary_matrix(4, rng);
        layer_mat = embed_block(block, q, 2, n) * layer_mat;
      }
    }
    u = layer_mat * u;
  }
  return UnitaryOp(std::move(u));
}

PureState trap_state(const PureState& challenge, Rng& rng) {
  const int d = challenge.dim();
  const Vector& c = challenge.amplitudes();
  for (int attempt = 0; attempt < 64; ++attempt) {
    Vector g(d);
    for (int i = 0; i < d; ++i) g(i) = rng.complex_gaussian();
    Vector v = g - c.dot(g) * c;
    v -= c.dot(v) * c;  // second pass pins the residual overlap at machine scale
    if (v.norm() > 1e-6) return PureState::normalized(std::move(v));
  }
  throw NumericError("trap_state: could not find a complement direction");
}

PrsKey random_prs_key(int dim, int n_bytes, Rng& rng) {
  PrsKey key;
  key.dim = dim;
  key.key_bytes.resize(static_cast<std::size_t>(n_bytes));
  rng.fill_bytes(key.key_bytes.data(), key.key_bytes.size());
  key.validate();
  return key;
}

PruKey random_pru_key(int n_qubits, int depth, Rng& rng) {
  PruKey key;
  key.n_qubits = n_qubits;
  key.depth = depth > 0 ? depth : default_pru_depth(n_qubits);
  key.key_bytes.resize(16);
  rng.fill_bytes(key.key_bytes.data(), key.key_bytes.size());
  key.validate();
  return key;
}

}  // namespace qpufsim
