#pragma once

#include <vector>

#include "qpufsim/eqtest.hpp"
#include "qpufsim/games.hpp"
#include "qpufsim/qpuf.hpp"
#include "qpufsim/rng.hpp"

namespace qpufsim {

// ---- High-resource verifier: quantum equality tests on the verifier side ----

struct HrProtocolConfig {
  int dim = 16;
  int n_challenges = 8;  // database size K
  int copies_m = 3;      // stored copies per response (SWAP repetitions / GSWAP copies)
  int rounds = 3;        // R <= K
  TestKind test_kind = TestKind::Gswap;
  ChallengeSource challenge_source = ChallengeSource::Haar;
  DeviceFamily device_family = DeviceFamily::Haar;
  int pru_depth = 0;
  int adv_learning_q = 8;  // transition-phase queries available to ReplayAdv

  void validate() const;
};

enum class HrProver { Honest, RandomAdv, ReplayAdv };

struct RoundRecord {
  int challenge_index = -1;
  int b = -1;  // lr only: 1 = valid response sent, 0 = trap
  int s = -1;  // lr only: prover-reported SWAP outcome, 0 = accept
  bool test_accept = false;  // hr only
  double p_accept = 0.0;     // analytic probability behind the sampled outcome
};

struct ProtocolOutcome {
  bool accepted = false;
  std::vector<RoundRecord> per_round;
  double delta_er_used = 0.0;  // lr only
  bool test1_passed = false;   // lr only
};

ProtocolOutcome run_hr_protocol(const HrProtocolConfig& config, HrProver prover, Rng& rng);

// ---- Low-resource verifier: prover-side SWAPs plus classical verification ----

struct LrProtocolConfig {
  int dim = 16;
  int rounds_n = 32;  // N, even
  double delta = 0.5;      // expected trap flip rate
  double delta_er = -1.0;  // tolerance radius; negative -> Hoeffding default
  ChallengeSource challenge_source = ChallengeSource::Haar;
  DeviceFamily device_family = DeviceFamily::Haar;
  int pru_depth = 0;

  void validate() const;
  double resolved_delta_er() const;
};

// Two-sided Hoeffding radius with honest-completeness failure <= 1e-3:
// ceil(sqrt((N/4) * ln(2e3) / 2)).
double lr_default_delta_er(int rounds_n);

enum class LrProver { Honest, ClassicalRandomAdv, AllZeroAdv, NoDeviceAdv };

struct LrSetup {
  QpufDevice device;
  std::vector<PureState> challenges;
  std::vector<PureState> responses;
  std::vector<PureState> traps;           // orthogonal to the matching challenge
  std::vector<PureState> trap_responses;  // device image; orthogonal to the response
};

LrSetup build_lr_setup(const LrProtocolConfig& config, Rng& rng);

// Algorithm: test1 demands s_i = 0 for every i in p_set; test2 (only then)
// counts ones outside p_set and accepts iff |count - delta*N/2| <= delta_er.
bool cver(const std::vector<int>& s, const std::vector<int>& p_set, double delta,
          double delta_er);

struct CverDetail {
  bool test1 = false;
  bool accept = false;
};
CverDetail cver_detail(const std::vector<int>& s, const std::vector<int>& p_set, double delta,
                       double delta_er);

ProtocolOutcome run_lr_protocol(const LrProtocolConfig& config, LrProver prover, Rng& rng);

// ---- Monte Carlo rate estimators (fresh protocol instance per trial) ----

struct HrRateReport {
  int trials = 0;
  double accept_rate = 0.0;
  double std_err = 0.0;
};

struct LrRateReport {
  int trials = 0;
  double accept_rate = 0.0;
  double std_err = 0.0;
  double test1_pass_rate = 0.0;
  double test1_std_err = 0.0;
  double delta_er_used = 0.0;
};

HrRateReport estimate_hr_rates(const HrProtocolConfig& config, HrProver prover, int trials,
                               RngStream stream, int n_threads = 1);
LrRateReport estimate_lr_rates(const LrProtocolConfig& config, LrProver prover, int trials,
                               RngStream stream, int n_threads = 1);

}  // namespace qpufsim
