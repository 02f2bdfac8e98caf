#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qpufsim/qmath.hpp"
#include "qpufsim/rng.hpp"
#include "qpufsim/sampling.hpp"

namespace qpufsim {

enum class DeviceFamily { Haar, Pru, Fixed };

struct QpufParams {
  int lambda_sec = 128;  // bits; key material for the PRU/PRS families
  int dim = 2;
  DeviceFamily family = DeviceFamily::Haar;
  double epsilon_noise = 0.0;  // weight of the contractive branch
  double delta_r = 0.1;        // robustness threshold
  double delta_c = 0.1;        // collision threshold
  double delta_u = 1.9;        // uniqueness threshold, diamond-norm units
  int pru_depth = 0;           // 0 -> default 4 * n_qubits
  std::optional<UnitaryOp> fixed_unitary;  // Fixed family; identity when absent

  void validate() const;
};

/// The hardware token: a unitary plus an epsilon-weighted replace-with-fixed-
/// state contractive branch, with query accounting. A device instance belongs
/// to one logical owner at a time; metric computations on it are pure.
class QpufDevice {
 public:
  QpufDevice(std::string id, UnitaryOp unitary, double epsilon_noise,
             PureState contractive_target);

  const std::string& id() const { return id_; }
  const UnitaryOp& unitary() const { return unitary_; }
  double epsilon_noise() const { return epsilon_noise_; }
  const PureState& contractive_target() const { return target_; }
  int dim() const { return unitary_.dim(); }

  std::uint64_t query_count() const { return query_count_; }
  std::optional<std::uint64_t> query_budget() const { return query_budget_; }
  void set_query_budget(std::optional<std::uint64_t> budget) { query_budget_ = budget; }

  void consume_query();

 private:
  std::string id_;
  UnitaryOp unitary_;
  double epsilon_noise_;
  PureState target_;
  std::uint64_t query_count_ = 0;
  std::optional<std::uint64_t> query_budget_;
};

struct CrpRecord {
  PureState challenge;
  PureState response;
  int copies = 1;
};

struct CrpDatabase {
  std::vector<CrpRecord> records;
};

QpufDevice qgen(const QpufParams& params, Rng& rng);

// E(rho) = (1-eps) U rho U† + eps |t><t|. Counts one query.
DensityMatrix qeval(QpufDevice& device, const DensityMatrix& rho);

// Pure fast path, only valid at epsilon = 0. Counts one query.
PureState qeval_pure(QpufDevice& device, const PureState& psi);

// ||U - V||_diamond = 2 sqrt(1 - delta(U†V)^2) with delta the Euclidean
// distance from the origin to the convex hull of the eigenvalues of U†V.
double diamond_distance_unitaries(const UnitaryOp& u, const UnitaryOp& v);

struct UniquenessReport {
  int n_devices = 0;
  double delta_u = 0.0;
  double fraction_ge_delta_u = 0.0;
  double min_distance = 0.0;
  double mean_distance = 0.0;
  std::vector<double> pairwise_distances;
};

UniquenessReport uniqueness_test(const QpufParams& params, int n_devices, Rng& rng);

// response_i = U * challenge_i, stored with the copy count; consumes one
// device query per (challenge, copy). Pure path: epsilon must be 0.
CrpDatabase build_crp_database(QpufDevice& device, const std::vector<PureState>& challenges,
                               int copies_m);

}  // namespace qpufsim
