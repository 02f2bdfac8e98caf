#include "qpufsim/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "qpufsim/errors.hpp"
#include "qpufsim/games.hpp"
#include "qpufsim/matrix_io.hpp"
#include "qpufsim/parallel.hpp"
#include "qpufsim/protocols.hpp"
#include "qpufsim/qpuf.hpp"
#include "qpufsim/spectral.hpp"
#include "qpufsim/version.hpp"

namespace qpufsim {

using nlohmann::json;

namespace {

// ---- flat parameter store; one variable per (command, knob) where defaults differ ----

struct RawParams {
  // common
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  int threads = 1;
  bool verbose = false;
  std::string output = "json";
  std::string config_path;

  // swap-demo
  int sd_dim = 2;
  std::string sd_pair = "orthogonal";
  int sd_copies = 3;
  int sd_trials = 0;

  // game
  int g_dim = 16;
  int g_trials = 1000;
  int g_learning_q = 0;
  int g_kappa = 3;
  std::string g_adversary = "random";
  std::string g_source = "haar";
  std::string g_family = "haar";
  int g_pru_depth = 0;
  double g_epsilon_noise = 0.0;
  double g_fid_threshold = 0.5;
  std::string g_test = "gswap";
  int g_lambda_bits = 128;
  std::string g_device_matrix;
  std::string g_export_device;

  // reduction
  int r_dim = 16;
  int r_trials = 2000;
  std::string r_stage = "game3";
  int r_m = 4;
  int r_l = -1;
  int r_l_prime = -1;
  int r_learning_q = 4;

  // protocol-hr
  int hr_dim = 16;
  int hr_trials = 1000;
  int hr_challenges = 8;
  int hr_copies = 3;
  int hr_rounds = 3;
  std::string hr_test = "gswap";
  std::string hr_prover = "honest";
  std::string hr_source = "haar";
  std::string hr_family = "haar";
  int hr_pru_depth = 0;
  int hr_adv_q = 8;
  double hr_epsilon_noise = 0.0;

  // protocol-lr
  int lr_dim = 16;
  int lr_trials = 1000;
  int lr_rounds = 32;
  double lr_delta = 0.5;
  double lr_delta_er = -1.0;
  std::string lr_prover = "honest";
  std::string lr_source = "haar";
  std::string lr_family = "haar";
  int lr_pru_depth = 0;
  double lr_epsilon_noise = 0.0;

  // spectral
  int sp_dim = 64;
  int sp_samples = 200;
  std::string sp_family = "haar";
  double sp_theta = M_PI;
  int sp_pru_depth = 0;
  double sp_epsilon = 0.05;
  int sp_max_attempts = 0;

  // uniqueness
  int u_dim = 16;
  int u_devices = 10;
  double u_delta_u = 1.9;
  std::string u_family = "haar";
  int u_pru_depth = 0;
  std::string u_device_matrix;
};

void add_common(CLI::App* sub, RawParams& p) {
  sub->add_option("--seed", p.seed, "base RNG seed (64-bit)")->capture_default_str();
  sub->add_option("--stream-id", p.stream_id, "RNG stream id (64-bit)")->capture_default_str();
  sub->add_option("--threads", p.threads, "worker threads; metrics are identical for any count")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_flag("--verbose", p.verbose, "include per-trial detail in the report");
  sub->add_option("--output", p.output, "report format")
      ->check(CLI::IsMember({"json", "csv", "human"}))
      ->capture_default_str();
  sub->add_option("--config", p.config_path,
                  "JSON config file with flat key/value pairs; flags take precedence");
}

CLI::App* make_app(CLI::App& app, RawParams& p) {
  app.description("Seeded simulation experiments for unitary hardware tokens: "
                  "equality tests, unforgeability games, identification protocols, "
                  "and eigenphase statistics.");
  app.require_subcommand(0, 1);
  app.set_version_flag("--version", kVersion);

  const std::vector<std::string> sources{"haar", "prs"};
  const std::vector<std::string> families{"haar", "pru", "fixed"};
  const std::vector<std::string> tests{"swap", "gswap"};

  CLI::App* sd = app.add_subcommand("swap-demo", "closed-form and sampled equality tests");
  sd->add_option("--dim", p.sd_dim, "Hilbert-space dimension d")->check(CLI::Range(2, 512))
      ->capture_default_str();
  sd->add_option("--pair", p.sd_pair, "state pair to test")
      ->check(CLI::IsMember({"orthogonal", "identical", "random"}))
      ->capture_default_str();
  sd->add_option("--copies", p.sd_copies, "SWAP repetitions / GSWAP reference copies M")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sd->add_option("--trials", p.sd_trials, "sampled-outcome trials (0 = closed forms only)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  add_common(sd, p);

  CLI::App* g = app.add_subcommand("game", "universal unforgeability game (Monte Carlo)");
  g->add_option("--dim", p.g_dim, "Hilbert-space dimension d")->check(CLI::Range(2, 512))
      ->capture_default_str();
  g->add_option("--trials", p.g_trials, "game trials")->check(CLI::Range(100, 100000000))
      ->capture_default_str();
  g->add_option("--learning-q", p.g_learning_q, "adversary learning-phase query budget q")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  g->add_option("--kappa", p.g_kappa, "reference copies for the test algorithm")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  g->add_option("--adversary", p.g_adversary, "forgery strategy")
      ->check(CLI::IsMember({"random", "replay", "subspace"}))
      ->capture_default_str();
  g->add_option("--challenge-source", p.g_source, "challenge distribution")
      ->check(CLI::IsMember(sources))
      ->capture_default_str();
  g->add_option("--device-family", p.g_family, "device unitary family")
      ->check(CLI::IsMember(families))
      ->capture_default_str();
  g->add_option("--pru-depth", p.g_pru_depth, "brickwork layers (0 = 4 * qubits)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  g->add_option("--epsilon-noise", p.g_epsilon_noise,
                "contractive-branch weight (must be 0 for game paths)")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  g->add_option("--fid-threshold", p.g_fid_threshold, "fidelity^2 win threshold")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  g->add_option("--test", p.g_test, "equality test used by the challenger")
      ->check(CLI::IsMember(tests))
      ->capture_default_str();
  g->add_option("--lambda-bits", p.g_lambda_bits, "security parameter in bits (key sizes)")
      ->check(CLI::Range(8, 4096))
      ->capture_default_str();
  g->add_option("--device-matrix", p.g_device_matrix,
                "unitary file for --device-family fixed (default: identity)");
  g->add_option("--export-device", p.g_export_device,
                "write the first trial's device unitary to this file");
  add_common(g, p);

  CLI::App* r = app.add_subcommand("reduction", "distinguishing-game ladder (game3/4/5)");
  r->add_option("--dim", p.r_dim, "Hilbert-space dimension d (power of two)")
      ->check(CLI::Range(2, 512))
      ->capture_default_str();
  r->add_option("--trials", p.r_trials, "game trials")->check(CLI::Range(100, 100000000))
      ->capture_default_str();
  r->add_option("--stage", p.r_stage, "ladder stage")
      ->check(CLI::IsMember({"game3", "game4", "game5"}))
      ->capture_default_str();
  r->add_option("--m", p.r_m, "total state copies handed to the distinguisher")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  r->add_option("--l", p.r_l, "plain copies (default: m for game3/4, 1 for game5)");
  r->add_option("--l-prime", p.r_l_prime,
                "unitary-image copies (default: 0 for game3/4, m-1 for game5)");
  r->add_option("--learning-q", p.r_learning_q, "game5 oracle queries before the challenge")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  add_common(r, p);

  CLI::App* hr = app.add_subcommand("protocol-hr", "high-resource-verifier identification");
  hr->add_option("--dim", p.hr_dim, "Hilbert-space dimension d")->check(CLI::Range(2, 512))
      ->capture_default_str();
  hr->add_option("--trials", p.hr_trials, "protocol runs")->check(CLI::Range(100, 100000000))
      ->capture_default_str();
  hr->add_option("--challenges", p.hr_challenges, "database size K")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  hr->add_option("--copies", p.hr_copies, "stored response copies M")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  hr->add_option("--rounds", p.hr_rounds, "identification rounds R (R <= K)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  hr->add_option("--test", p.hr_test, "verification test")->check(CLI::IsMember(tests))
      ->capture_default_str();
  hr->add_option("--prover", p.hr_prover, "prover behaviour")
      ->check(CLI::IsMember({"honest", "random", "replay"}))
      ->capture_default_str();
  hr->add_option("--challenge-source", p.hr_source, "challenge distribution")
      ->check(CLI::IsMember(sources))
      ->capture_default_str();
  hr->add_option("--device-family", p.hr_family, "device unitary family")
      ->check(CLI::IsMember({"haar", "pru"}))
      ->capture_default_str();
  hr->add_option("--pru-depth", p.hr_pru_depth, "brickwork layers (0 = 4 * qubits)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  hr->add_option("--adv-learning-q", p.hr_adv_q, "replay adversary transition-phase queries")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  hr->add_option("--epsilon-noise", p.hr_epsilon_noise,
                 "contractive-branch weight (must be 0 for protocol paths)")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  add_common(hr, p);

  CLI::App* lr = app.add_subcommand("protocol-lr", "low-resource-verifier identification");
  lr->add_option("--dim", p.lr_dim, "Hilbert-space dimension d")->check(CLI::Range(2, 512))
      ->capture_default_str();
  lr->add_option("--trials", p.lr_trials, "protocol runs")->check(CLI::Range(100, 100000000))
      ->capture_default_str();
  lr->add_option("--rounds", p.lr_rounds, "rounds N (even)")->check(CLI::PositiveNumber)
      ->capture_default_str();
  lr->add_option("--delta", p.lr_delta, "expected trap flip rate")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  lr->add_option("--delta-er", p.lr_delta_er,
                 "trap-count tolerance radius (negative = Hoeffding default)")
      ->capture_default_str();
  lr->add_option("--prover", p.lr_prover, "prover behaviour")
      ->check(CLI::IsMember({"honest", "classical-random", "allzero", "nodevice"}))
      ->capture_default_str();
  lr->add_option("--challenge-source", p.lr_source, "challenge distribution")
      ->check(CLI::IsMember(sources))
      ->capture_default_str();
  lr->add_option("--device-family", p.lr_family, "device unitary family")
      ->check(CLI::IsMember({"haar", "pru"}))
      ->capture_default_str();
  lr->add_option("--pru-depth", p.lr_pru_depth, "brickwork layers (0 = 4 * qubits)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  lr->add_option("--epsilon-noise", p.lr_epsilon_noise,
                 "contractive-branch weight (must be 0 for protocol paths)")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  add_common(lr, p);

  CLI::App* sp = app.add_subcommand("spectral", "eigenphase statistics of unitary families");
  sp->add_option("--dim", p.sp_dim, "Hilbert-space dimension d")->check(CLI::Range(2, 512))
      ->capture_default_str();
  sp->add_option("--samples", p.sp_samples, "unitaries sampled (family members for maxunique)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sp->add_option("--family", p.sp_family, "unitary family")
      ->check(CLI::IsMember({"haar", "pru", "maxunique"}))
      ->capture_default_str();
  sp->add_option("--theta", p.sp_theta, "arc length in radians")
      ->check(CLI::Range(1e-9, 2.0 * M_PI))
      ->capture_default_str();
  sp->add_option("--pru-depth", p.sp_pru_depth, "brickwork layers (0 = 4 * qubits)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  sp->add_option("--epsilon", p.sp_epsilon, "maxunique distance slack (keep if >= 2-epsilon)")
      ->check(CLI::Range(1e-9, 2.0))
      ->capture_default_str();
  sp->add_option("--max-attempts", p.sp_max_attempts,
                 "maxunique rejection-sampling budget (0 = default)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  add_common(sp, p);

  CLI::App* u = app.add_subcommand("uniqueness", "pairwise diamond distances of fresh devices");
  u->add_option("--dim", p.u_dim, "Hilbert-space dimension d")->check(CLI::Range(2, 512))
      ->capture_default_str();
  u->add_option("--devices", p.u_devices, "number of devices generated")
      ->check(CLI::Range(2, 4096))
      ->capture_default_str();
  u->add_option("--delta-u", p.u_delta_u, "uniqueness threshold in diamond-norm units")
      ->check(CLI::Range(0.0, 2.0))
      ->capture_default_str();
  u->add_option("--device-family", p.u_family, "device unitary family")
      ->check(CLI::IsMember(families))
      ->capture_default_str();
  u->add_option("--pru-depth", p.u_pru_depth, "brickwork layers (0 = 4 * qubits)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  u->add_option("--device-matrix", p.u_device_matrix,
                "unitary file for --device-family fixed (default: identity)");
  add_common(u, p);

  return &app;
}

bool token_sets_flag(const std::vector<std::string>& tokens, const std::string& flag) {
  for (const std::string& t : tokens)
    if (t == flag || t.rfind(flag + "=", 0) == 0) return true;
  return false;
}

std::string find_config_path(const std::vector<std::string>& tokens) {
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] == "--config" && i + 1 < tokens.size()) return tokens[i + 1];
    if (tokens[i].rfind("--config=", 0) == 0) return tokens[i].substr(9);
  }
  return {};
}

// ---- typed getters over the flat params echo ----

json require_key(const json& p, const char* key) {
  auto it = p.find(key);
  if (it == p.end()) throw ConfigError(std::string("missing scenario key '") + key + "'");
  return *it;
}

int get_int(const json& p, const char* key) {
  const json v = require_key(p, key);
  if (!v.is_number_integer()) throw ConfigError(std::string("key '") + key + "' must be an integer");
  return v.get<int>();
}

double get_double(const json& p, const char* key) {
  const json v = require_key(p, key);
  if (!v.is_number()) throw ConfigError(std::string("key '") + key + "' must be a number");
  return v.get<double>();
}

std::string get_str(const json& p, const char* key) {
  const json v = require_key(p, key);
  if (!v.is_string()) throw ConfigError(std::string("key '") + key + "' must be a string");
  return v.get<std::string>();
}

// ---- enum parsing ----

ChallengeSource to_source(const std::string& s) {
  if (s == "haar") return ChallengeSource::Haar;
  if (s == "prs") return ChallengeSource::Prs;
  throw ConfigError("unknown challenge source '" + s + "'");
}

DeviceFamily to_family(const std::string& s) {
  if (s == "haar") return DeviceFamily::Haar;
  if (s == "pru") return DeviceFamily::Pru;
  if (s == "fixed") return DeviceFamily::Fixed;
  throw ConfigError("unknown device family '" + s + "'");
}

TestKind to_test(const std::string& s) {
  if (s == "swap") return TestKind::Swap;
  if (s == "gswap") return TestKind::Gswap;
  throw ConfigError("unknown test kind '" + s + "'");
}

AdversaryKind to_adversary(const std::string& s) {
  if (s == "random") return AdversaryKind::RandomState;
  if (s == "replay") return AdversaryKind::ReplayNearest;
  if (s == "subspace") return AdversaryKind::SubspaceEmulation;
  throw ConfigError("unknown adversary kind '" + s + "'");
}

HrProver to_hr_prover(const std::string& s) {
  if (s == "honest") return HrProver::Honest;
  if (s == "random") return HrProver::RandomAdv;
  if (s == "replay") return HrProver::ReplayAdv;
  throw ConfigError("unknown hr prover '" + s + "'");
}

LrProver to_lr_prover(const std::string& s) {
  if (s == "honest") return LrProver::Honest;
  if (s == "classical-random") return LrProver::ClassicalRandomAdv;
  if (s == "allzero") return LrProver::AllZeroAdv;
  if (s == "nodevice") return LrProver::NoDeviceAdv;
  throw ConfigError("unknown lr prover '" + s + "'");
}

SpectralFamily to_spectral_family(const std::string& s) {
  if (s == "haar") return SpectralFamily::Haar;
  if (s == "pru") return SpectralFamily::Pru;
  if (s == "maxunique") return SpectralFamily::MaxUnique;
  throw ConfigError("unknown spectral family '" + s + "'");
}

ReductionStage to_stage(const std::string& s) {
  if (s == "game3") return ReductionStage::Game3;
  if (s == "game4") return ReductionStage::Game4;
  if (s == "game5") return ReductionStage::Game5;
  throw ConfigError("unknown reduction stage '" + s + "'");
}

// ---- scenario assembly (defaults resolved, validated) ----

void fill_common(Scenario& sc, const RawParams& p) {
  sc.seed = p.seed;
  sc.stream_id = p.stream_id;
  sc.threads = p.threads;
  sc.verbose = p.verbose;
  sc.output_format = p.output;
  sc.params["seed"] = p.seed;
  sc.params["stream-id"] = p.stream_id;
  sc.params["threads"] = p.threads;
  sc.params["verbose"] = p.verbose;
  sc.params["output"] = p.output;
  if (!p.config_path.empty()) sc.params["config"] = p.config_path;
}

Scenario build_scenario(const std::string& command, const RawParams& p) {
  Scenario sc;
  sc.command = command;
  if (command == "swap-demo") {
    sc.trials = p.sd_trials;
    sc.params["dim"] = p.sd_dim;
    sc.params["pair"] = p.sd_pair;
    sc.params["copies"] = p.sd_copies;
    sc.params["trials"] = p.sd_trials;
  } else if (command == "game") {
    sc.trials = p.g_trials;
    sc.params["dim"] = p.g_dim;
    sc.params["trials"] = p.g_trials;
    sc.params["learning-q"] = p.g_learning_q;
    sc.params["kappa"] = p.g_kappa;
    sc.params["adversary"] = p.g_adversary;
    sc.params["challenge-source"] = p.g_source;
    sc.params["device-family"] = p.g_family;
    sc.params["pru-depth"] = p.g_pru_depth;
    sc.params["epsilon-noise"] = p.g_epsilon_noise;
    sc.params["fid-threshold"] = p.g_fid_threshold;
    sc.params["test"] = p.g_test;
    sc.params["lambda-bits"] = p.g_lambda_bits;
    if (!p.g_device_matrix.empty()) sc.params["device-matrix"] = p.g_device_matrix;
    if (!p.g_export_device.empty()) sc.params["export-device"] = p.g_export_device;
    GameConfig cfg;
    cfg.dim = p.g_dim;
    cfg.challenge_source = to_source(p.g_source);
    cfg.learning_budget_q = p.g_learning_q;
    cfg.test_copies_kappa = p.g_kappa;
    cfg.test_kind = to_test(p.g_test);
    cfg.validate();
    if (p.g_epsilon_noise != 0.0)
      throw ConfigError("game: the pure-state test path requires --epsilon-noise 0");
  } else if (command == "reduction") {
    sc.trials = p.r_trials;
    const ReductionStage stage = to_stage(p.r_stage);
    int l = p.r_l, lp = p.r_l_prime;
    if (l < 0 && lp < 0) {
      l = stage == ReductionStage::Game5 ? 1 : p.r_m;
      lp = p.r_m - l;
    } else if (l < 0) {
      l = p.r_m - lp;
    } else if (lp < 0) {
      lp = p.r_m - l;
    }
    if (l < 0 || lp < 0 || l + lp != p.r_m)
      throw ConfigError("reduction: need l + l-prime = m with both non-negative");
    sc.params["dim"] = p.r_dim;
    sc.params["trials"] = p.r_trials;
    sc.params["stage"] = p.r_stage;
    sc.params["m"] = p.r_m;
    sc.params["l"] = l;
    sc.params["l-prime"] = lp;
    sc.params["learning-q"] = p.r_learning_q;
  } else if (command == "protocol-hr") {
    sc.trials = p.hr_trials;
    sc.params["dim"] = p.hr_dim;
    sc.params["trials"] = p.hr_trials;
    sc.params["challenges"] = p.hr_challenges;
    sc.params["copies"] = p.hr_copies;
    sc.params["rounds"] = p.hr_rounds;
    sc.params["test"] = p.hr_test;
    sc.params["prover"] = p.hr_prover;
    sc.params["challenge-source"] = p.hr_source;
    sc.params["device-family"] = p.hr_family;
    sc.params["pru-depth"] = p.hr_pru_depth;
    sc.params["adv-learning-q"] = p.hr_adv_q;
    sc.params["epsilon-noise"] = p.hr_epsilon_noise;
    HrProtocolConfig cfg;
    cfg.dim = p.hr_dim;
    cfg.n_challenges = p.hr_challenges;
    cfg.copies_m = p.hr_copies;
    cfg.rounds = p.hr_rounds;
    cfg.validate();
    if (p.hr_epsilon_noise != 0.0)
      throw ConfigError("protocol-hr: protocol paths require --epsilon-noise 0");
  } else if (command == "protocol-lr") {
    sc.trials = p.lr_trials;
    if (p.lr_rounds % 2 != 0)
      throw ConfigError("protocol-lr: --rounds must be even (got " +
                        std::to_string(p.lr_rounds) + ")");
    LrProtocolConfig cfg;
    cfg.dim = p.lr_dim;
    cfg.rounds_n = p.lr_rounds;
    cfg.delta = p.lr_delta;
    cfg.delta_er = p.lr_delta_er;
    cfg.validate();
    sc.params["dim"] = p.lr_dim;
    sc.params["trials"] = p.lr_trials;
    sc.params["rounds"] = p.lr_rounds;
    sc.params["delta"] = p.lr_delta;
    sc.params["delta-er"] = cfg.resolved_delta_er();  // the frozen radius
    sc.params["prover"] = p.lr_prover;
    sc.params["challenge-source"] = p.lr_source;
    sc.params["device-family"] = p.lr_family;
    sc.params["pru-depth"] = p.lr_pru_depth;
    sc.params["epsilon-noise"] = p.lr_epsilon_noise;
    if (p.lr_epsilon_noise != 0.0)
      throw ConfigError("protocol-lr: protocol paths require --epsilon-noise 0");
  } else if (command == "spectral") {
    sc.trials = p.sp_samples;
    sc.params["dim"] = p.sp_dim;
    sc.params["samples"] = p.sp_samples;
    sc.params["family"] = p.sp_family;
    sc.params["theta"] = p.sp_theta;
    sc.params["pru-depth"] = p.sp_pru_depth;
    sc.params["epsilon"] = p.sp_epsilon;
    sc.params["max-attempts"] = p.sp_max_attempts;
  } else if (command == "uniqueness") {
    sc.trials = p.u_devices;
    sc.params["dim"] = p.u_dim;
    sc.params["devices"] = p.u_devices;
    sc.params["delta-u"] = p.u_delta_u;
    sc.params["device-family"] = p.u_family;
    sc.params["pru-depth"] = p.u_pru_depth;
    if (!p.u_device_matrix.empty()) sc.params["device-matrix"] = p.u_device_matrix;
  } else {
    throw ConfigError("unknown command '" + command + "'");
  }
  fill_common(sc, p);
  return sc;
}

// ---- execution helpers ----

void add_metric(Report& report, const std::string& name, double value,
                std::optional<double> std_err = std::nullopt) {
  report.metrics[name] = Metric{value, std_err};
}

QpufParams device_params_from(const json& params, int dim, const char* family_key) {
  QpufParams qp;
  qp.dim = dim;
  qp.family = to_family(get_str(params, family_key));
  if (params.contains("pru-depth")) qp.pru_depth = get_int(params, "pru-depth");
  if (params.contains("epsilon-noise")) qp.epsilon_noise = get_double(params, "epsilon-noise");
  if (params.contains("lambda-bits")) qp.lambda_sec = get_int(params, "lambda-bits");
  if (qp.family == DeviceFamily::Fixed) {
    if (params.contains("device-matrix")) {
      qp.fixed_unitary = load_unitary(get_str(params, "device-matrix"));
      if (qp.fixed_unitary->dim() != dim)
        throw ConfigError("device-matrix dimension does not match --dim");
    } else {
      qp.fixed_unitary = UnitaryOp::identity(dim);
    }
  }
  return qp;
}

json round_records_json(const ProtocolOutcome& out, bool lr) {
  json arr = json::array();
  for (const RoundRecord& r : out.per_round) {
    json rec;
    rec["challenge_index"] = r.challenge_index;
    if (lr) {
      rec["b"] = r.b;
      rec["s"] = r.s;
    } else {
      rec["accept"] = r.test_accept;
      rec["p_accept"] = r.p_accept;
    }
    arr.push_back(rec);
  }
  return arr;
}

void exec_swap_demo(const Scenario& sc, Report& report) {
  const int dim = get_int(sc.params, "dim");
  const int copies = get_int(sc.params, "copies");
  const std::string pair = get_str(sc.params, "pair");

  Rng rng(sc.stream());
  DensityMatrix rho = DensityMatrix::from_pure(PureState::basis(dim, 0));
  PureState psi = PureState::basis(dim, pair == "identical" ? 0 : 1);
  if (pair == "random") {
    rho = DensityMatrix::from_pure(haar_state(dim, rng));
    psi = haar_state(dim, rng);
  }

  add_metric(report, "swap.overlap_sq", rho.expectation(psi));
  add_metric(report, "swap.p_accept", swap_accept_prob(rho, psi));
  if (dim <= 16) add_metric(report, "swap.p_accept_circuit", swap_circuit_oracle(rho, psi));
  add_metric(report, "gswap.p_accept", gswap_accept_prob(rho, psi, copies));
  if (dim <= 4 && copies <= 3)
    add_metric(report, "gswap.p_accept_projector", gswap_projector_oracle(rho, psi, copies));

  if (sc.trials > 0) {
    const TestPolicy swap_policy{TestKind::Swap, copies};
    const TestPolicy gswap_policy{TestKind::Gswap, copies};
    int swap_accepts = 0, gswap_accepts = 0;
    for (int i = 0; i < sc.trials; ++i) {
      Rng trial_rng(sc.stream().child(static_cast<std::uint64_t>(i)));
      if (run_test(swap_policy, rho, psi, trial_rng).accepted) ++swap_accepts;
      if (run_test(gswap_policy, rho, psi, trial_rng).accepted) ++gswap_accepts;
    }
    const double swap_rate = static_cast<double>(swap_accepts) / sc.trials;
    const double gswap_rate = static_cast<double>(gswap_accepts) / sc.trials;
    add_metric(report, "swap.sampled_accept_rate", swap_rate,
               binomial_std_err(swap_rate, sc.trials));
    add_metric(report, "gswap.sampled_accept_rate", gswap_rate,
               binomial_std_err(gswap_rate, sc.trials));
  }
}

void exec_game(const Scenario& sc, Report& report) {
  GameConfig cfg;
  cfg.dim = get_int(sc.params, "dim");
  cfg.challenge_source = to_source(get_str(sc.params, "challenge-source"));
  cfg.learning_budget_q = get_int(sc.params, "learning-q");
  cfg.test_copies_kappa = get_int(sc.params, "kappa");
  cfg.test_kind = to_test(get_str(sc.params, "test"));
  cfg.prs_key_bytes = std::max(1, get_int(sc.params, "lambda-bits") / 8);

  const AdversaryKind adv = to_adversary(get_str(sc.params, "adversary"));
  const QpufParams qp = device_params_from(sc.params, cfg.dim, "device-family");
  if (qp.epsilon_noise != 0.0)
    throw ConfigError("game: the pure-state test path requires epsilon-noise 0");
  const double threshold = get_double(sc.params, "fid-threshold");

  const WinRateReport r = estimate_win_rate(cfg, qp, adv, sc.trials, sc.stream(), threshold,
                                            sc.threads);

  const int d_tilde = adv == AdversaryKind::RandomState
                          ? 0
                          : std::min(cfg.learning_budget_q, cfg.dim);
  add_metric(report, "unforgeability.win_rate", r.win_rate, r.win_rate_std_err);
  add_metric(report, "unforgeability.fidelity_sq_mean", r.fid_sq_mean, r.fid_sq_mean_std_err);
  add_metric(report, "unforgeability.fidelity_sq_win_rate", r.fid_win_rate,
             r.fid_win_rate_std_err);
  add_metric(report, "unforgeability.fid_threshold", r.fid_threshold);
  add_metric(report, "unforgeability.subspace_bound",
             (d_tilde + 1.0) / static_cast<double>(cfg.dim));

  if (sc.params.contains("export-device")) {
    Rng rng(sc.stream().child(0));
    const QpufDevice device = qgen(qp, rng);  // replays trial 0's generation
    save_unitary(get_str(sc.params, "export-device"), device.unitary());
  }
}

void exec_reduction(const Scenario& sc, Report& report) {
  const ReductionStage stage = to_stage(get_str(sc.params, "stage"));
  const int dim = get_int(sc.params, "dim");
  const int m = get_int(sc.params, "m");
  const int l = get_int(sc.params, "l");
  const int lp = get_int(sc.params, "l-prime");
  const int q = get_int(sc.params, "learning-q");

  int threshold = 0;
  if (stage != ReductionStage::Game5) {
    // held-out seeded calibration, frozen before the measured trials
    threshold = calibrate_collision_threshold(dim, m, 2000, sc.stream().child(0xCA11B));
  }

  const ReductionReport r = estimate_reduction(stage, dim, m, l, lp, q, sc.trials, sc.stream(),
                                               threshold, sc.threads);
  add_metric(report, "reduction.success_rate", r.success_rate, r.std_err);
  add_metric(report, "reduction.prs_world_accept_rate", r.prs_world_accept_rate);
  add_metric(report, "reduction.haar_world_accept_rate", r.haar_world_accept_rate);
  if (stage == ReductionStage::Game5) {
    add_metric(report, "reduction.prs_world_fidelity_sq_mean", r.prs_world_fid_sq_mean);
    add_metric(report, "reduction.haar_world_fidelity_sq_mean", r.haar_world_fid_sq_mean);
  } else {
    add_metric(report, "reduction.collision_threshold", threshold);
  }
}

void exec_protocol_hr(const Scenario& sc, Report& report) {
  HrProtocolConfig cfg;
  cfg.dim = get_int(sc.params, "dim");
  cfg.n_challenges = get_int(sc.params, "challenges");
  cfg.copies_m = get_int(sc.params, "copies");
  cfg.rounds = get_int(sc.params, "rounds");
  cfg.test_kind = to_test(get_str(sc.params, "test"));
  cfg.challenge_source = to_source(get_str(sc.params, "challenge-source"));
  cfg.device_family = to_family(get_str(sc.params, "device-family"));
  cfg.pru_depth = get_int(sc.params, "pru-depth");
  cfg.adv_learning_q = get_int(sc.params, "adv-learning-q");
  const HrProver prover = to_hr_prover(get_str(sc.params, "prover"));

  const HrRateReport r = estimate_hr_rates(cfg, prover, sc.trials, sc.stream(), sc.threads);
  add_metric(report, "hr.accept_rate", r.accept_rate, r.std_err);

  if (sc.verbose) {
    json detail = json::array();
    const int shown = std::min(sc.trials, 10);
    for (int i = 0; i < shown; ++i) {
      Rng rng(sc.stream().child(static_cast<std::uint64_t>(i)));
      detail.push_back(round_records_json(run_hr_protocol(cfg, prover, rng), /*lr=*/false));
    }
    report.per_trial = detail;
  }
}

void exec_protocol_lr(const Scenario& sc, Report& report) {
  LrProtocolConfig cfg;
  cfg.dim = get_int(sc.params, "dim");
  cfg.rounds_n = get_int(sc.params, "rounds");
  cfg.delta = get_double(sc.params, "delta");
  cfg.delta_er = get_double(sc.params, "delta-er");
  cfg.challenge_source = to_source(get_str(sc.params, "challenge-source"));
  cfg.device_family = to_family(get_str(sc.params, "device-family"));
  cfg.pru_depth = get_int(sc.params, "pru-depth");
  const LrProver prover = to_lr_prover(get_str(sc.params, "prover"));

  const LrRateReport r = estimate_lr_rates(cfg, prover, sc.trials, sc.stream(), sc.threads);
  add_metric(report, "lr.accept_rate", r.accept_rate, r.std_err);
  add_metric(report, "lr.test1_pass_rate", r.test1_pass_rate, r.test1_std_err);
  add_metric(report, "lr.delta_er", r.delta_er_used);

  if (sc.verbose) {
    json detail = json::array();
    const int shown = std::min(sc.trials, 10);
    for (int i = 0; i < shown; ++i) {
      Rng rng(sc.stream().child(static_cast<std::uint64_t>(i)));
      detail.push_back(round_records_json(run_lr_protocol(cfg, prover, rng), /*lr=*/true));
    }
    report.per_trial = detail;
  }
}

void exec_spectral(const Scenario& sc, Report& report) {
  const SpectralFamily family = to_spectral_family(get_str(sc.params, "family"));
  const int dim = get_int(sc.params, "dim");
  const int samples = get_int(sc.params, "samples");
  SpectralOptions options;
  options.pru_depth = get_int(sc.params, "pru-depth");
  options.maxunique_epsilon = get_double(sc.params, "epsilon");
  options.theta = get_double(sc.params, "theta");
  options.max_attempts = get_int(sc.params, "max-attempts");

  const SpectralReport r = spectral_report(family, dim, samples, sc.stream(), options,
                                           sc.threads);
  add_metric(report, "spectral.kolmogorov_mean", r.kolmogorov_mean);
  add_metric(report, "spectral.arc_mean_count", r.arc_stats.mean_count);
  add_metric(report, "spectral.arc_var_count", r.arc_stats.var_count);
  add_metric(report, "spectral.theta", r.theta);
  if (options.theta > 0.05 && options.theta < 2.0 * M_PI - 0.05) {
    const WieandMoments w = wieand_expected(dim, options.theta);
    add_metric(report, "spectral.wieand_mean", w.mean);
    add_metric(report, "spectral.wieand_variance", w.variance);
  }
  if (sc.verbose) report.per_trial = json(r.kolmogorov_per_sample);
}

void exec_uniqueness(const Scenario& sc, Report& report) {
  const int dim = get_int(sc.params, "dim");
  QpufParams qp = device_params_from(sc.params, dim, "device-family");
  qp.delta_u = get_double(sc.params, "delta-u");
  const int devices = get_int(sc.params, "devices");

  Rng rng(sc.stream());
  const UniquenessReport r = uniqueness_test(qp, devices, rng);
  add_metric(report, "uniqueness.fraction_ge_delta_u", r.fraction_ge_delta_u);
  add_metric(report, "uniqueness.min_pairwise_distance", r.min_distance);
  add_metric(report, "uniqueness.mean_pairwise_distance", r.mean_distance);
  add_metric(report, "uniqueness.delta_u", r.delta_u);
  add_metric(report, "uniqueness.n_devices", r.n_devices);
  if (sc.verbose) report.per_trial = json(r.pairwise_distances);
}

}  // namespace

Scenario parse_scenario(const std::vector<std::string>& args) {
  RawParams params;
  CLI::App app{"qpufsim"};
  make_app(app, params);

  auto parse_tokens = [&](std::vector<std::string> tokens) {
    std::reverse(tokens.begin(), tokens.end());  // CLI11 vector parse is reversed
    try {
      app.parse(tokens);
    } catch (const CLI::CallForHelp&) {
      const std::vector<CLI::App*> subs = app.get_subcommands();
      std::cout << (subs.empty() ? app.help() : subs.front()->help());
      throw HelpRequested{};
    } catch (const CLI::CallForAllHelp&) {
      std::cout << app.help("", CLI::AppFormatMode::All);
      throw HelpRequested{};
    } catch (const CLI::CallForVersion&) {
      std::cout << kVersion << "\n";
      throw HelpRequested{};
    } catch (const CLI::ParseError& e) {
      throw ConfigError(e.what());
    }
  };

  if (args.empty()) throw ConfigError("no command given (try --help)");
  if (args[0][0] == '-') {
    parse_tokens(args);  // handles --help / --version
    throw ConfigError("no command given (try --help)");
  }

  const std::string command = args[0];
  CLI::App* sub = app.get_subcommand_no_throw(command);
  if (sub == nullptr) throw ConfigError("unknown command '" + command + "' (try --help)");

  const std::vector<std::string> user_tokens(args.begin() + 1, args.end());
  std::vector<std::string> injected;
  std::vector<std::string> warnings;

  const std::string config_path = find_config_path(user_tokens);
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw ConfigError("cannot open config file '" + config_path + "'");
    json cfg;
    try {
      cfg = json::parse(in);
    } catch (const json::exception& e) {
      throw ConfigError("config file '" + config_path + "': " + e.what());
    }
    if (!cfg.is_object())
      throw ConfigError("config file '" + config_path + "' must hold a flat JSON object");
    for (const auto& [key, value] : cfg.items()) {
      const std::string flag = "--" + key;
      if (sub->get_option_no_throw(flag) == nullptr)
        throw ConfigError("unknown config key '" + key + "' for command '" + command + "'");
      if (token_sets_flag(user_tokens, flag)) {
        warnings.push_back("config key '" + key + "' overridden by command-line flag");
        continue;
      }
      const std::string rendered = value.is_string() ? value.get<std::string>() : value.dump();
      injected.push_back(flag + "=" + rendered);
    }
  }

  std::vector<std::string> tokens;
  tokens.push_back(command);
  tokens.insert(tokens.end(), injected.begin(), injected.end());
  tokens.insert(tokens.end(), user_tokens.begin(), user_tokens.end());
  parse_tokens(std::move(tokens));

  Scenario scenario = build_scenario(command, params);
  scenario.warnings = std::move(warnings);
  return scenario;
}

Report execute(const Scenario& scenario) {
  const auto t0 = std::chrono::steady_clock::now();
  Report report;
  report.scenario = scenario;
  report.version = kVersion;

  if (scenario.command == "swap-demo")
    exec_swap_demo(scenario, report);
  else if (scenario.command == "game")
    exec_game(scenario, report);
  else if (scenario.command == "reduction")
    exec_reduction(scenario, report);
  else if (scenario.command == "protocol-hr")
    exec_protocol_hr(scenario, report);
  else if (scenario.command == "protocol-lr")
    exec_protocol_lr(scenario, report);
  else if (scenario.command == "spectral")
    exec_spectral(scenario, report);
  else if (scenario.command == "uniqueness")
    exec_uniqueness(scenario, report);
  else
    throw ConfigError("unknown command '" + scenario.command + "'");

  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

json Report::to_json() const {
  json j;
  j["command"] = scenario.command;
  j["scenario"] = scenario.params;
  j["seed"] = scenario.seed;
  json metrics_json = json::object();
  for (const auto& [name, metric] : metrics) {
    json m;
    m["value"] = metric.value;
    if (metric.std_err) m["std_err"] = *metric.std_err;
    metrics_json[name] = m;
  }
  j["metrics"] = metrics_json;
  j["version"] = version;
  j["wall_time_seconds"] = wall_time_seconds;
  j["warnings"] = scenario.warnings;
  if (!per_trial.is_null()) j["per_trial"] = per_trial;
  return j;
}

std::string Report::to_csv() const {
  char buf[64];
  auto fmt = [&buf](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  std::string header = "command,seed,trials";
  std::string row = scenario.command + "," + std::to_string(scenario.seed) + "," +
                    std::to_string(scenario.trials);
  for (const auto& [name, metric] : metrics) {
    header += "," + name;
    row += "," + fmt(metric.value);
    if (metric.std_err) {
      header += "," + name + ".std_err";
      row += "," + fmt(*metric.std_err);
    }
  }
  return header + "\n" + row + "\n";
}

std::string Report::to_human() const {
  std::ostringstream out;
  out << "command: " << scenario.command << "  seed: " << scenario.seed
      << "  trials: " << scenario.trials << "\n";
  for (const std::string& w : scenario.warnings) out << "warning: " << w << "\n";
  std::size_t width = 0;
  for (const auto& [name, metric] : metrics) width = std::max(width, name.size());
  for (const auto& [name, metric] : metrics) {
    out << "  " << name << std::string(width - name.size() + 2, ' ') << "= " << metric.value;
    if (metric.std_err) out << " +/- " << *metric.std_err;
    out << "\n";
  }
  out << "wall_time_seconds: " << wall_time_seconds << "\n";
  return out.str();
}

std::string Report::render() const {
  if (scenario.output_format == "json") return to_json().dump(2);
  if (scenario.output_format == "csv") return to_csv();
  return to_human();
}

int run_cli(int argc, const char* const* argv) {
  try {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    const Scenario scenario = parse_scenario(args);
    const Report report = execute(scenario);
    std::cout << report.render() << "\n";
    return 0;
  } catch (const HelpRequested&) {
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const QueryBudgetExceeded& e) {
    std::cerr << "budget error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  } catch (const RefusalError& e) {
    std::cerr << "refused: " << e.what() << "\n";
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace qpufsim
