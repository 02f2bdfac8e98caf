#include "qpufsim/games.hpp"

#include <algorithm>
#include <cmath>

#include "qpufsim/errors.hpp"
#include "qpufsim/parallel.hpp"

namespace qpufsim {

namespace {

PureState draw_challenge(int dim, ChallengeSource source, int key_bytes, Rng& rng) {
  if (source == ChallengeSource::Haar) return haar_state(dim, rng);
  return prs_phase_state(random_prs_key(dim, key_bytes, rng));
}

PureState subspace_forgery(const CrpDatabase& learned, const PureState& challenge, Rng& rng) {
  const int d = challenge.dim();
  Vector acc = Vector::Zero(d);
  for (const CrpRecord& rec : learned.records)
    acc += rec.challenge.overlap(challenge) * rec.response.amplitudes();
  if (acc.norm() > 1e-12) return PureState::normalized(std::move(acc));
  return haar_state(d, rng);
}

PureState replay_forgery(const CrpDatabase& learned, const PureState& challenge, Rng& rng) {
  const CrpRecord* best = nullptr;
  double best_overlap = -1.0;
  for (const CrpRecord& rec : learned.records) {
    const double ov = rec.challenge.overlap_sq(challenge);
    if (ov > best_overlap) {
      best_overlap = ov;
      best = &rec;
    }
  }
  if (best == nullptr) return haar_state(challenge.dim(), rng);
  return best->response;
}

}  // namespace

void GameConfig::validate() const {
  if (dim < 2) throw ConfigError("GameConfig: dim must be >= 2");
  if (learning_budget_q < 0) throw ConfigError("GameConfig: learning_budget_q must be >= 0");
  if (test_copies_kappa < 1) throw ConfigError("GameConfig: test_copies_kappa must be >= 1");
  if (prs_key_bytes < 1) throw ConfigError("GameConfig: prs_key_bytes must be >= 1");
  if (challenge_source == ChallengeSource::Prs && (dim & (dim - 1)) != 0)
    throw ConfigError("GameConfig: PRS challenges need a power-of-two dim");
}

GameTranscript run_unforgeability_game(const GameConfig& config, QpufDevice& device,
                                       AdversaryStrategy& adv, Rng& rng) {
  config.validate();
  if (device.dim() != config.dim)
    throw DimensionMismatch("run_unforgeability_game: device dimension mismatch");

  const std::uint64_t count_before = device.query_count();
  device.set_query_budget(count_before + static_cast<std::uint64_t>(config.learning_budget_q));

  // learning phase
  adv.learned.records.clear();
  switch (adv.kind) {
    case AdversaryKind::RandomState:
      break;  // ignores the oracle entirely
    case AdversaryKind::ReplayNearest:
      for (int i = 0; i < config.learning_budget_q; ++i) {
        PureState c = haar_state(config.dim, rng);
        PureState r = qeval_pure(device, c);
        adv.learned.records.push_back(CrpRecord{std::move(c), std::move(r), 1});
      }
      break;
    case AdversaryKind::SubspaceEmulation: {
      const int d_tilde = std::min(config.learning_budget_q, config.dim);
      for (int i = 0; i < d_tilde; ++i) {
        PureState c = PureState::basis(config.dim, i);
        PureState r = qeval_pure(device, c);
        adv.learned.records.push_back(CrpRecord{std::move(c), std::move(r), 1});
      }
      break;
    }
  }
  const int queries_used = static_cast<int>(device.query_count() - count_before);
  device.set_query_budget(std::nullopt);  // challenger access is uncapped

  // challenge phase
  PureState challenge = draw_challenge(config.dim, config.challenge_source,
                                       config.prs_key_bytes, rng);

  // guess phase
  PureState forgery = [&] {
    switch (adv.kind) {
      case AdversaryKind::RandomState:
        return haar_state(config.dim, rng);
      case AdversaryKind::ReplayNearest:
        return replay_forgery(adv.learned, challenge, rng);
      case AdversaryKind::SubspaceEmulation:
        return subspace_forgery(adv.learned, challenge, rng);
    }
    throw ConfigError("run_unforgeability_game: unknown adversary kind");
  }();

  // the challenger holds the device and evaluates the true response directly
  const PureState true_response = apply_unitary(device.unitary(), challenge);

  const TestPolicy policy{config.test_kind, config.test_copies_kappa};
  const TestOutcome outcome = run_test(policy, forgery, true_response, rng);
  const double fid_sq = true_response.overlap_sq(forgery);

  return GameTranscript{std::move(challenge), DensityMatrix::from_pure(forgery),
                        outcome.accepted, outcome.p_accept, queries_used, fid_sq};
}

WinRateReport estimate_win_rate(const GameConfig& config, const QpufParams& device_family,
                                AdversaryKind adv_kind, int trials, RngStream stream,
                                double fid_threshold, int n_threads) {
  config.validate();
  if (trials < 100) throw ConfigError("estimate_win_rate: trials must be >= 100");

  QpufParams params = device_family;
  params.dim = config.dim;
  params.validate();

  std::vector<std::uint8_t> wins(static_cast<std::size_t>(trials));
  std::vector<std::uint8_t> fid_wins(static_cast<std::size_t>(trials));
  std::vector<double> fids(static_cast<std::size_t>(trials));

  parallel_trials(trials, n_threads, [&](int i) {
    Rng rng(stream.child(static_cast<std::uint64_t>(i)));
    QpufDevice device = qgen(params, rng);
    AdversaryStrategy adv{adv_kind, {}};
    const GameTranscript t = run_unforgeability_game(config, device, adv, rng);
    wins[static_cast<std::size_t>(i)] = t.test_accept ? 1 : 0;
    fid_wins[static_cast<std::size_t>(i)] = t.forgery_fidelity_sq > fid_threshold ? 1 : 0;
    fids[static_cast<std::size_t>(i)] = t.forgery_fidelity_sq;
  });

  WinRateReport report;
  report.trials = trials;
  report.fid_threshold = fid_threshold;
  double win_sum = 0.0, fid_win_sum = 0.0, fid_sum = 0.0;
  for (int i = 0; i < trials; ++i) {
    win_sum += wins[static_cast<std::size_t>(i)];
    fid_win_sum += fid_wins[static_cast<std::size_t>(i)];
    fid_sum += fids[static_cast<std::size_t>(i)];
  }
  report.win_rate = win_sum / trials;
  report.win_rate_std_err = binomial_std_err(report.win_rate, trials);
  report.fid_win_rate = fid_win_sum / trials;
  report.fid_win_rate_std_err = binomial_std_err(report.fid_win_rate, trials);
  report.fid_sq_mean = fid_sum / trials;
  double var = 0.0;
  for (int i = 0; i < trials; ++i) {
    const double dev = fids[static_cast<std::size_t>(i)] - report.fid_sq_mean;
    var += dev * dev;
  }
  var /= std::max(1, trials - 1);
  report.fid_sq_mean_std_err = std::sqrt(var / trials);
  return report;
}

DistinguishOutcome run_prs_distinguish_game(int dim, int m_copies, int accept_threshold,
                                            Rng& rng) {
  if (m_copies < 1) throw ConfigError("run_prs_distinguish_game: m_copies must be >= 1");
  if ((dim & (dim - 1)) != 0 || dim < 2)
    throw ConfigError("run_prs_distinguish_game: dim must be a power of two");

  const bool b_haar = rng.bernoulli(0.5);
  const PureState state = b_haar ? haar_state(dim, rng)
                                 : prs_phase_state(random_prs_key(dim, 16, rng));

  // all m copies are the same pure state; SWAP tests on disjoint pairs
  const TestPolicy policy{TestKind::Swap, 1};
  int accepts = 0;
  const int n_tests = m_copies / 2;
  for (int t = 0; t < n_tests; ++t)
    if (run_test(policy, state, state, rng).accepted) ++accepts;

  const bool guessed_prs = accepts >= accept_threshold;
  return DistinguishOutcome{guessed_prs == !b_haar, b_haar, accepts};
}

int calibrate_collision_threshold(int dim, int m_copies, int calib_trials, RngStream stream) {
  if (calib_trials < 2) throw ConfigError("calibrate_collision_threshold: too few trials");
  const int n_tests = m_copies / 2;

  // accept-count histograms per world on the held-out run
  std::vector<double> prs_hist(static_cast<std::size_t>(n_tests) + 1, 0.0);
  std::vector<double> haar_hist(static_cast<std::size_t>(n_tests) + 1, 0.0);
  int n_prs = 0, n_haar = 0;
  for (int i = 0; i < calib_trials; ++i) {
    Rng rng(stream.child(static_cast<std::uint64_t>(i)));
    const DistinguishOutcome out = run_prs_distinguish_game(dim, m_copies, 0, rng);
    if (out.b_haar_world) {
      ++haar_hist[static_cast<std::size_t>(out.accept_count)];
      ++n_haar;
    } else {
      ++prs_hist[static_cast<std::size_t>(out.accept_count)];
      ++n_prs;
    }
  }

  int best_threshold = 0;
  double best_acc = -1.0;
  for (int t = 0; t <= n_tests + 1; ++t) {
    double prs_ge = 0.0, haar_lt = 0.0;
    for (int c = 0; c <= n_tests; ++c) {
      if (c >= t)
        prs_ge += prs_hist[static_cast<std::size_t>(c)];
      else
        haar_lt += haar_hist[static_cast<std::size_t>(c)];
    }
    const double acc = 0.5 * (n_prs > 0 ? prs_ge / n_prs : 0.0) +
                       0.5 * (n_haar > 0 ? haar_lt / n_haar : 0.0);
    if (acc > best_acc + 1e-12) {
      best_acc = acc;
      best_threshold = t;
    }
  }
  return best_threshold;
}

DistinguishReport estimate_prs_distinguish(int dim, int m_copies, int trials, RngStream stream,
                                           int accept_threshold, int n_threads) {
  if (trials < 100) throw ConfigError("estimate_prs_distinguish: trials must be >= 100");
  std::vector<std::uint8_t> correct(static_cast<std::size_t>(trials));
  parallel_trials(trials, n_threads, [&](int i) {
    Rng rng(stream.child(static_cast<std::uint64_t>(i)));
    correct[static_cast<std::size_t>(i)] =
        run_prs_distinguish_game(dim, m_copies, accept_threshold, rng).guess_correct ? 1 : 0;
  });
  double sum = 0.0;
  for (int i = 0; i < trials; ++i) sum += correct[static_cast<std::size_t>(i)];
  DistinguishReport report;
  report.trials = trials;
  report.threshold = accept_threshold;
  report.success_rate = sum / trials;
  report.std_err = binomial_std_err(report.success_rate, trials);
  return report;
}

ReductionOutcome run_reduction_game(ReductionStage stage, int dim, int m, int l, int l_prime,
                                    int learning_q, int collision_threshold, Rng& rng) {
  if (m < 1) throw ConfigError("run_reduction_game: m must be >= 1");
  if (l < 0 || l_prime < 0 || l + l_prime != m)
    throw ConfigError("run_reduction_game: need l + l_prime = m with both non-negative");
  if ((dim & (dim - 1)) != 0 || dim < 2)
    throw ConfigError("run_reduction_game: dim must be a power of two");

  const bool b_haar = rng.bernoulli(0.5);
  const PureState phi = b_haar ? haar_state(dim, rng)
                               : prs_phase_state(random_prs_key(dim, 16, rng));

  ReductionOutcome out;
  out.b_haar_world = b_haar;

  if (stage == ReductionStage::Game3 || stage == ReductionStage::Game4) {
    const UnitaryOp u = haar_unitary(dim, rng);  // public: its matrix is known
    // Game3 hands over (U phi)^{tensor m}; Game4 hands over
    // phi^{tensor l} tensor (U phi)^{tensor l'}. The distinguisher completes
    // Game4 to Game3 by applying the public U to the first block, then undoes
    // U on every copy, landing on phi^{tensor m} either way; the collision
    // test then runs on the m identical copies.
    const PureState all_copies = apply_unitary(u, phi);
    const PureState undone = apply_unitary(u.adjoint(), all_copies);
    const TestPolicy policy{TestKind::Swap, 1};
    int accepts = 0;
    for (int t = 0; t < m / 2; ++t)
      if (run_test(policy, undone, undone, rng).accepted) ++accepts;
    out.guessed_prs = accepts >= collision_threshold;
    out.guess_correct = out.guessed_prs == !b_haar;
    return out;
  }

  // Game5: hidden unitary with a learning phase
  if (l < 1 || l_prime < 1)
    throw ConfigError("run_reduction_game: Game5 needs l >= 1 and l_prime >= 1");
  const UnitaryOp hidden = haar_unitary(dim, rng);
  QpufDevice device("reduction-oracle", hidden, 0.0, PureState::basis(dim, 0));

  CrpDatabase learned;
  const int d_tilde = std::min(learning_q, dim);
  for (int i = 0; i < d_tilde; ++i) {
    PureState c = PureState::basis(dim, i);
    PureState r = qeval_pure(device, c);
    learned.records.push_back(CrpRecord{std::move(c), std::move(r), 1});
  }

  const PureState reference = apply_unitary(hidden, phi);  // the l' copies
  const PureState forgery = subspace_forgery(learned, phi, rng);

  const TestPolicy policy{TestKind::Gswap, l_prime};
  const TestOutcome test = run_test(policy, forgery, reference, rng);
  out.test_accept = test.accepted;
  out.fid_sq = reference.overlap_sq(forgery);
  out.guessed_prs = test.accepted;
  out.guess_correct = out.guessed_prs == !b_haar;
  return out;
}

ReductionReport estimate_reduction(ReductionStage stage, int dim, int m, int l, int l_prime,
                                   int learning_q, int trials, RngStream stream,
                                   int collision_threshold, int n_threads) {
  if (trials < 100) throw ConfigError("estimate_reduction: trials must be >= 100");
  std::vector<ReductionOutcome> outcomes(static_cast<std::size_t>(trials));
  parallel_trials(trials, n_threads, [&](int i) {
    Rng rng(stream.child(static_cast<std::uint64_t>(i)));
    outcomes[static_cast<std::size_t>(i)] =
        run_reduction_game(stage, dim, m, l, l_prime, learning_q, collision_threshold, rng);
  });

  ReductionReport report;
  report.trials = trials;
  double correct = 0.0;
  double prs_accept = 0.0, haar_accept = 0.0, prs_fid = 0.0, haar_fid = 0.0;
  for (const ReductionOutcome& o : outcomes) {
    correct += o.guess_correct ? 1.0 : 0.0;
    const bool accept_signal = stage == ReductionStage::Game5 ? o.test_accept : o.guessed_prs;
    if (o.b_haar_world) {
      ++report.trials_haar;
      haar_accept += accept_signal ? 1.0 : 0.0;
      haar_fid += o.fid_sq;
    } else {
      ++report.trials_prs;
      prs_accept += accept_signal ? 1.0 : 0.0;
      prs_fid += o.fid_sq;
    }
  }
  report.success_rate = correct / trials;
  report.std_err = binomial_std_err(report.success_rate, trials);
  if (report.trials_prs > 0) {
    report.prs_world_accept_rate = prs_accept / report.trials_prs;
    report.prs_world_fid_sq_mean = prs_fid / report.trials_prs;
  }
  if (report.trials_haar > 0) {
    report.haar_world_accept_rate = haar_accept / report.trials_haar;
    report.haar_world_fid_sq_mean = haar_fid / report.trials_haar;
  }
  return report;
}

}  // namespace qpufsim
