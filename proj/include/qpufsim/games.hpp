#pragma once

#include <vector>

#include "qpufsim/eqtest.hpp"
#include "qpufsim/qpuf.hpp"
#include "qpufsim/rng.hpp"

namespace qpufsim {

enum class ChallengeSource { Haar, Prs };

enum class AdversaryKind {
  RandomState,        // ignores learning, forges a fresh Haar state
  ReplayNearest,      // replays the stored response of the closest learned challenge
  SubspaceEmulation,  // forges U * (Pi_S |psi*>) / ||..|| from basis-state queries
};

struct GameConfig {
  int dim = 16;
  ChallengeSource challenge_source = ChallengeSource::Haar;
  int learning_budget_q = 0;
  int test_copies_kappa = 3;  // reference copies handed to the test algorithm
  TestKind test_kind = TestKind::Gswap;
  int prs_key_bytes = 16;

  void validate() const;
};

struct AdversaryStrategy {
  AdversaryKind kind = AdversaryKind::RandomState;
  CrpDatabase learned;  // filled during the learning phase
};

struct GameTranscript {
  PureState challenge;
  DensityMatrix forgery;
  bool test_accept = false;
  double p_accept = 0.0;
  int queries_used = 0;
  double forgery_fidelity_sq = 0.0;  // overlap^2 of forgery with the true response
};

// One round of the universal unforgeability game: learning phase (budget-
// enforced on the device), random challenge, forgery, then the sampled
// equality test against kappa copies of the true response.
GameTranscript run_unforgeability_game(const GameConfig& config, QpufDevice& device,
                                       AdversaryStrategy& adv, Rng& rng);

struct WinRateReport {
  int trials = 0;
  double win_rate = 0.0;  // raw test-accept rate (includes the test's accept floor)
  double win_rate_std_err = 0.0;
  double fid_sq_mean = 0.0;
  double fid_sq_mean_std_err = 0.0;
  double fid_threshold = 0.5;
  double fid_win_rate = 0.0;  // fraction of trials with fidelity^2 > threshold
  double fid_win_rate_std_err = 0.0;
};

// Fresh device and adversary per trial.
WinRateReport estimate_win_rate(const GameConfig& config, const QpufParams& device_family,
                                AdversaryKind adv_kind, int trials, RngStream stream,
                                double fid_threshold = 0.5, int n_threads = 1);

// ---- PRS distinguishability (copies of one PRS state vs one Haar state) ----

struct DistinguishOutcome {
  bool guess_correct = false;
  bool b_haar_world = false;
  int accept_count = 0;
};

// OVERLAP_COLLISION distinguisher: SWAP tests on disjoint pairs of the m
// copies; guesses the PRS world iff the accept count reaches the threshold.
DistinguishOutcome run_prs_distinguish_game(int dim, int m_copies, int accept_threshold,
                                            Rng& rng);

// Threshold with the best empirical accuracy on a held-out calibration run
// (ties break toward the smallest threshold).
int calibrate_collision_threshold(int dim, int m_copies, int calib_trials, RngStream stream);

struct DistinguishReport {
  int trials = 0;
  int threshold = 0;
  double success_rate = 0.0;
  double std_err = 0.0;
};

DistinguishReport estimate_prs_distinguish(int dim, int m_copies, int trials, RngStream stream,
                                           int accept_threshold, int n_threads = 1);

// ---- Reduction ladder ----

enum class ReductionStage { Game3, Game4, Game5 };

struct ReductionOutcome {
  bool guess_correct = false;
  bool b_haar_world = false;
  bool guessed_prs = false;
  bool test_accept = false;  // Game5 only: the GSWAP forgery check
  double fid_sq = 0.0;       // Game5 only
};

// Game3: all m copies carry the public unitary; the distinguisher undoes it
// and falls back to the collision test. Game4: split l / l' with the public
// unitary on the second block; the distinguisher completes it to Game3.
// Game5: the unitary is hidden; after learning_q basis-state oracle queries
// the distinguisher forges the response and GSWAP-checks it against the l'
// reference copies, guessing the PRS world on accept (l >= 1, l' >= 1).
ReductionOutcome run_reduction_game(ReductionStage stage, int dim, int m, int l, int l_prime,
                                    int learning_q, int collision_threshold, Rng& rng);

struct ReductionReport {
  int trials = 0;
  double success_rate = 0.0;
  double std_err = 0.0;
  int trials_prs = 0;
  int trials_haar = 0;
  double prs_world_accept_rate = 0.0;   // Game5: test-accept; Game3/4: guessed-PRS
  double haar_world_accept_rate = 0.0;
  double prs_world_fid_sq_mean = 0.0;   // Game5 only
  double haar_world_fid_sq_mean = 0.0;  // Game5 only
};

ReductionReport estimate_reduction(ReductionStage stage, int dim, int m, int l, int l_prime,
                                   int learning_q, int trials, RngStream stream,
                                   int collision_threshold, int n_threads = 1);

}  // namespace qpufsim
