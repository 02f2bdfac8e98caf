#include "qpufsim/protocols.hpp"

#include <algorithm>
#include <cmath>

#include "qpufsim/errors.hpp"
#include "qpufsim/parallel.hpp"

namespace qpufsim {

namespace {

QpufParams device_params(int dim, DeviceFamily family, int pru_depth) {
  QpufParams params;
  params.dim = dim;
  params.family = family;
  params.pru_depth = pru_depth;
  return params;
}

std::vector<PureState> draw_challenges(int n, int dim, ChallengeSource source, Rng& rng) {
  if (source == ChallengeSource::Prs && (dim & (dim - 1)) != 0)
    throw ConfigError("PRS challenges need a power-of-two dim");
  std::vector<PureState> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    out.push_back(source == ChallengeSource::Haar
                      ? haar_state(dim, rng)
                      : prs_phase_state(random_prs_key(dim, 16, rng)));
  return out;
}

// random subset of size n/2 marked b = 1 (valid response rounds)
std::vector<int> draw_p_set(int n, Rng& rng) {
  std::vector<int> idx(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  for (int i = 0; i < n / 2; ++i) {
    const int j = i + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n - i)));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  std::vector<int> p_set(idx.begin(), idx.begin() + n / 2);
  std::sort(p_set.begin(), p_set.end());
  return p_set;
}

}  // namespace

void HrProtocolConfig::validate() const {
  if (dim < 2) throw ConfigError("HrProtocolConfig: dim must be >= 2");
  if (n_challenges < 1) throw ConfigError("HrProtocolConfig: n_challenges must be >= 1");
  if (copies_m < 1) throw ConfigError("HrProtocolConfig: copies_m must be >= 1");
  if (rounds < 1 || rounds > n_challenges)
    throw ConfigError("HrProtocolConfig: rounds must satisfy 1 <= R <= K");
  if (adv_learning_q < 0) throw ConfigError("HrProtocolConfig: adv_learning_q must be >= 0");
}

ProtocolOutcome run_hr_protocol(const HrProtocolConfig& config, HrProver prover, Rng& rng) {
  config.validate();
  QpufDevice device = qgen(device_params(config.dim, config.device_family, config.pru_depth), rng);

  // setup: K challenges, M stored copies each
  const std::vector<PureState> challenges =
      draw_challenges(config.n_challenges, config.dim, config.challenge_source, rng);
  const CrpDatabase db = build_crp_database(device, challenges, config.copies_m);

  // a replay adversary learned from its own transition-phase queries
  CrpDatabase adv_db;
  if (prover == HrProver::ReplayAdv) {
    for (int i = 0; i < config.adv_learning_q; ++i) {
      PureState c = haar_state(config.dim, rng);
      PureState r = qeval_pure(device, c);
      adv_db.records.push_back(CrpRecord{std::move(c), std::move(r), 1});
    }
  }

  const TestPolicy policy{config.test_kind, config.copies_m};
  ProtocolOutcome outcome;
  outcome.accepted = true;
  outcome.per_round.reserve(static_cast<std::size_t>(config.rounds));

  for (int r = 0; r < config.rounds; ++r) {
    const int idx = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(config.n_challenges)));
    const CrpRecord& record = db.records[static_cast<std::size_t>(idx)];

    PureState response = [&] {
      switch (prover) {
        case HrProver::Honest:
          return qeval_pure(device, record.challenge);
        case HrProver::RandomAdv:
          return haar_state(config.dim, rng);
        case HrProver::ReplayAdv: {
          const CrpRecord* best = nullptr;
          double best_overlap = -1.0;
          for (const CrpRecord& rec : adv_db.records) {
            const double ov = rec.challenge.overlap_sq(record.challenge);
            if (ov > best_overlap) {
              best_overlap = ov;
              best = &rec;
            }
          }
          return best != nullptr ? best->response : haar_state(config.dim, rng);
        }
      }
      throw ConfigError("run_hr_protocol: unknown prover");
    }();

    const TestOutcome test = run_test(policy, response, record.response, rng);
    RoundRecord round;
    round.challenge_index = idx;
    round.test_accept = test.accepted;
    round.p_accept = test.p_accept;
    outcome.per_round.push_back(round);
    if (!test.accepted) outcome.accepted = false;  // accept only if all rounds accept
  }
  return outcome;
}

void LrProtocolConfig::validate() const {
  if (dim < 2) throw ConfigError("LrProtocolConfig: dim must be >= 2");
  if (rounds_n < 2 || rounds_n % 2 != 0)
    throw ConfigError("LrProtocolConfig: rounds must be even and >= 2");
  if (delta <= 0.0 || delta >= 1.0) throw ConfigError("LrProtocolConfig: delta must be in (0,1)");
}

double lr_default_delta_er(int rounds_n) {
  return std::ceil(std::sqrt((rounds_n / 4.0) * std::log(2.0e3) / 2.0));
}

double LrProtocolConfig::resolved_delta_er() const {
  return delta_er >= 0.0 ? delta_er : lr_default_delta_er(rounds_n);
}

LrSetup build_lr_setup(const LrProtocolConfig& config, Rng& rng) {
  config.validate();
  QpufDevice device = qgen(device_params(config.dim, config.device_family, config.pru_depth), rng);

  LrSetup setup{std::move(device), {}, {}, {}, {}};
  const int n = config.rounds_n;
  setup.challenges = draw_challenges(n, config.dim, config.challenge_source, rng);
  setup.responses.reserve(static_cast<std::size_t>(n));
  setup.traps.reserve(static_cast<std::size_t>(n));
  setup.trap_responses.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const PureState& c = setup.challenges[static_cast<std::size_t>(i)];
    setup.responses.push_back(qeval_pure(setup.device, c));
    PureState trap = trap_state(c, rng);
    setup.trap_responses.push_back(qeval_pure(setup.device, trap));
    setup.traps.push_back(std::move(trap));
  }
  return setup;
}

CverDetail cver_detail(const std::vector<int>& s, const std::vector<int>& p_set, double delta,
                       double delta_er) {
  const int n = static_cast<int>(s.size());
  if (n < 2 || n % 2 != 0) throw ConfigError("cver: bit string length must be even and >= 2");
  if (static_cast<int>(p_set.size()) != n / 2)
    throw ConfigError("cver: p_set must contain exactly N/2 indices");
  std::vector<char> in_p(static_cast<std::size_t>(n), 0);
  for (int idx : p_set) {
    if (idx < 0 || idx >= n) throw ConfigError("cver: p_set index out of range");
    if (in_p[static_cast<std::size_t>(idx)]) throw ConfigError("cver: duplicate p_set index");
    in_p[static_cast<std::size_t>(idx)] = 1;
  }
  for (int bit : s)
    if (bit != 0 && bit != 1) throw ConfigError("cver: s must be a 0/1 string");

  CverDetail detail;

  // test1: every b=1 round must report accept (s_i = 0)
  int zeros = 0;
  for (int i = 0; i < n; ++i)
    if (in_p[static_cast<std::size_t>(i)] && s[static_cast<std::size_t>(i)] == 0) ++zeros;
  detail.test1 = zeros == n / 2;
  if (!detail.test1) return detail;

  // test2: trap rounds must flip at the expected rate
  int ones = 0;
  for (int i = 0; i < n; ++i)
    if (!in_p[static_cast<std::size_t>(i)] && s[static_cast<std::size_t>(i)] == 1) ++ones;
  detail.accept = std::abs(ones - delta * (n / 2.0)) <= delta_er;
  return detail;
}

bool cver(const std::vector<int>& s, const std::vector<int>& p_set, double delta,
          double delta_er) {
  return cver_detail(s, p_set, delta, delta_er).accept;
}

ProtocolOutcome run_lr_protocol(const LrProtocolConfig& config, LrProver prover, Rng& rng) {
  LrSetup setup = build_lr_setup(config, rng);
  const int n = config.rounds_n;
  const std::vector<int> p_set = draw_p_set(n, rng);
  std::vector<char> in_p(static_cast<std::size_t>(n), 0);
  for (int idx : p_set) in_p[static_cast<std::size_t>(idx)] = 1;

  const TestPolicy swap_once{TestKind::Swap, 1};
  std::vector<int> s(static_cast<std::size_t>(n), 0);
  ProtocolOutcome outcome;
  outcome.per_round.reserve(static_cast<std::size_t>(n));

  for (int i = 0; i < n; ++i) {
    const bool b = in_p[static_cast<std::size_t>(i)] != 0;
    const PureState& sent = b ? setup.responses[static_cast<std::size_t>(i)]
                              : setup.trap_responses[static_cast<std::size_t>(i)];

    RoundRecord round;
    round.challenge_index = i;
    round.b = b ? 1 : 0;
    switch (prover) {
      case LrProver::Honest: {
        const PureState own = qeval_pure(setup.device, setup.challenges[static_cast<std::size_t>(i)]);
        const TestOutcome t = run_test(swap_once, sent, own, rng);
        round.p_accept = t.p_accept;
        s[static_cast<std::size_t>(i)] = t.accepted ? 0 : 1;
        break;
      }
      case LrProver::ClassicalRandomAdv:
        round.p_accept = 0.5;
        s[static_cast<std::size_t>(i)] = rng.bernoulli(0.5) ? 1 : 0;
        break;
      case LrProver::AllZeroAdv:
        round.p_accept = 1.0;
        s[static_cast<std::size_t>(i)] = 0;
        break;
      case LrProver::NoDeviceAdv: {
        const PureState own = haar_state(config.dim, rng);
        const TestOutcome t = run_test(swap_once, sent, own, rng);
        round.p_accept = t.p_accept;
        s[static_cast<std::size_t>(i)] = t.accepted ? 0 : 1;
        break;
      }
    }
    round.s = s[static_cast<std::size_t>(i)];
    outcome.per_round.push_back(round);
  }

  const double delta_er = config.resolved_delta_er();
  const CverDetail verdict = cver_detail(s, p_set, config.delta, delta_er);
  outcome.accepted = verdict.accept;
  outcome.test1_passed = verdict.test1;
  outcome.delta_er_used = delta_er;
  return outcome;
}

HrRateReport estimate_hr_rates(const HrProtocolConfig& config, HrProver prover, int trials,
                               RngStream stream, int n_threads) {
  if (trials < 100) throw ConfigError("estimate_hr_rates: trials must be >= 100");
  config.validate();
  std::vector<std::uint8_t> accepted(static_cast<std::size_t>(trials));
  parallel_trials(trials, n_threads, [&](int i) {
    Rng rng(stream.child(static_cast<std::uint64_t>(i)));
    accepted[static_cast<std::size_t>(i)] = run_hr_protocol(config, prover, rng).accepted ? 1 : 0;
  });
  double sum = 0.0;
  for (int i = 0; i < trials; ++i) sum += accepted[static_cast<std::size_t>(i)];
  HrRateReport report;
  report.trials = trials;
  report.accept_rate = sum / trials;
  report.std_err = binomial_std_err(report.accept_rate, trials);
  return report;
}

LrRateReport estimate_lr_rates(const LrProtocolConfig& config, LrProver prover, int trials,
                               RngStream stream, int n_threads) {
  if (trials < 100) throw ConfigError("estimate_lr_rates: trials must be >= 100");
  config.validate();
  std::vector<std::uint8_t> accepted(static_cast<std::size_t>(trials));
  std::vector<std::uint8_t> test1(static_cast<std::size_t>(trials));
  parallel_trials(trials, n_threads, [&](int i) {
    Rng rng(stream.child(static_cast<std::uint64_t>(i)));
    const ProtocolOutcome out = run_lr_protocol(config, prover, rng);
    accepted[static_cast<std::size_t>(i)] = out.accepted ? 1 : 0;
    test1[static_cast<std::size_t>(i)] = out.test1_passed ? 1 : 0;
  });
  double accept_sum = 0.0, test1_sum = 0.0;
  for (int i = 0; i < trials; ++i) {
    accept_sum += accepted[static_cast<std::size_t>(i)];
    test1_sum += test1[static_cast<std::size_t>(i)];
  }
  LrRateReport report;
  report.trials = trials;
  report.accept_rate = accept_sum / trials;
  report.std_err = binomial_std_err(report.accept_rate, trials);
  report.test1_pass_rate = test1_sum / trials;
  report.test1_std_err = binomial_std_err(report.test1_pass_rate, trials);
  report.delta_er_used = config.resolved_delta_er();
  return report;
}

}  // namespace qpufsim
