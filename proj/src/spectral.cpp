#include "qpufsim/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "qpufsim/errors.hpp"
#include "qpufsim/parallel.hpp"
#include "qpufsim/sampling.hpp"

namespace qpufsim {

namespace {

constexpr double kEulerGamma = 0.5772156649015329;
constexpr double kTwoPi = 2.0 * M_PI;

int qubits_for(int dim) {
  if ((dim & (dim - 1)) != 0 || dim < 2)
    throw ConfigError("spectral: PRU family needs a power-of-two dim");
  int n = 0;
  while ((1 << n) < dim) ++n;
  return n;
}

}  // namespace

int arc_count(const EigenphaseSet& phases, double start, double length) {
  if (!(length > 0.0 && length <= kTwoPi))
    throw ConfigError("arc_count: length must be in (0, 2*pi]");
  int count = 0;
  for (double p : phases.phases()) {
    double rel = std::fmod(p - start, kTwoPi);
    if (rel < 0.0) rel += kTwoPi;
    if (rel < length) ++count;
  }
  return count;
}

WieandMoments wieand_expected(int d, double theta) {
  if (d < 2) throw ConfigError("wieand_expected: d must be >= 2");
  if (!(theta > 0.05 && theta < kTwoPi - 0.05))
    throw RefusalError("wieand_expected: theta outside the supported window (0.05, 2*pi-0.05)");
  WieandMoments out;
  out.mean = d * theta / kTwoPi;
  out.variance = (std::log(static_cast<double>(d)) + 1.0 + kEulerGamma +
                  std::log(std::abs(2.0 * std::sin(theta / 2.0)))) /
                 (M_PI * M_PI);
  return out;
}

double kolmogorov_distance(const EigenphaseSet& phases) {
  const int d = phases.size();
  if (d == 0) throw ConfigError("kolmogorov_distance: empty phase set");
  std::vector<double> sorted = phases.phases();
  std::sort(sorted.begin(), sorted.end());

  // The gap |N_theta/d - theta/2pi| is piecewise linear between phase atoms,
  // so the supremum sits at an atom, approached from either side.
  double sup = 0.0;
  int below = 0;  // phases strictly less than the current atom
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const double frac = sorted[i] / kTwoPi;
    sup = std::max(sup, std::abs(static_cast<double>(below) / d - frac));  // theta -> atom-
    below += static_cast<int>(j - i);
    sup = std::max(sup, std::abs(static_cast<double>(below) / d - frac));  // theta -> atom+
    i = j;
  }
  return sup;
}

std::vector<UnitaryOp> build_maxunique_family(int dim, int n_members, double epsilon, Rng& rng,
                                              int max_attempts) {
  if (dim < 2) throw ConfigError("build_maxunique_family: dim must be >= 2");
  if (n_members < 1) throw ConfigError("build_maxunique_family: n_members must be >= 1");
  if (epsilon <= 0.0 || epsilon >= 2.0)
    throw ConfigError("build_maxunique_family: epsilon must be in (0,2)");
  if (static_cast<long long>(n_members) * dim > 16384)
    throw RefusalError("build_maxunique_family: n_members * dim above desk-scale budget");
  const int budget = max_attempts > 0 ? max_attempts : 100 * n_members;
  const double min_distance = 2.0 - epsilon;

  std::vector<UnitaryOp> family;
  family.reserve(static_cast<std::size_t>(n_members));
  for (int attempt = 0; attempt < budget; ++attempt) {
    UnitaryOp candidate = haar_unitary(dim, rng);
    bool ok = true;
    for (const UnitaryOp& member : family)
      if (diamond_distance_unitaries(candidate, member) < min_distance) {
        ok = false;
        break;
      }
    if (ok) {
      family.push_back(std::move(candidate));
      if (static_cast<int>(family.size()) == n_members) return family;
    }
  }
  throw RefusalError("build_maxunique_family: attempt budget exhausted, achieved " +
                     std::to_string(family.size()) + " of " + std::to_string(n_members) +
                     " members");
}

SpectralReport spectral_report(SpectralFamily family, int dim, int n_samples, RngStream stream,
                               const SpectralOptions& options, int n_threads) {
  if (dim < 2) throw ConfigError("spectral_report: dim must be >= 2");
  const int min_samples = family == SpectralFamily::MaxUnique ? 2 : 30;
  if (n_samples < min_samples)
    throw ConfigError("spectral_report: n_samples must be >= " + std::to_string(min_samples));
  if (!(options.theta > 0.0 && options.theta < kTwoPi))
    throw ConfigError("spectral_report: theta must be in (0, 2*pi)");

  // MaxUnique members come from the sequential rejection constructor; sampled
  // families draw one unitary per substream.
  std::vector<UnitaryOp> members;
  if (family == SpectralFamily::MaxUnique) {
    Rng rng(stream.child(0));
    members = build_maxunique_family(dim, n_samples, options.maxunique_epsilon, rng,
                                     options.max_attempts);
  }

  std::vector<double> counts(static_cast<std::size_t>(n_samples));
  std::vector<double> kolmogorov(static_cast<std::size_t>(n_samples));
  parallel_trials(n_samples, n_threads, [&](int i) {
    const EigenphaseSet phases = [&] {
      switch (family) {
        case SpectralFamily::Haar: {
          Rng rng(stream.child(static_cast<std::uint64_t>(i)));
          return eigenphases(haar_unitary(dim, rng));
        }
        case SpectralFamily::Pru: {
          Rng rng(stream.child(static_cast<std::uint64_t>(i)));
          const int n = qubits_for(dim);
          const int depth = options.pru_depth > 0 ? options.pru_depth : default_pru_depth(n);
          return eigenphases(pru_unitary(random_pru_key(n, depth, rng)));
        }
        case SpectralFamily::MaxUnique:
          return eigenphases(members[static_cast<std::size_t>(i)]);
      }
      throw ConfigError("spectral_report: unknown family");
    }();
    counts[static_cast<std::size_t>(i)] = arc_count(phases, 0.0, options.theta);
    kolmogorov[static_cast<std::size_t>(i)] = kolmogorov_distance(phases);
  });

  SpectralReport report;
  report.family = family;
  report.dim = dim;
  report.n_samples = n_samples;
  report.theta = options.theta;
  report.kolmogorov_per_sample = kolmogorov;

  double count_sum = 0.0, kolmogorov_sum = 0.0;
  for (int i = 0; i < n_samples; ++i) {
    count_sum += counts[static_cast<std::size_t>(i)];
    kolmogorov_sum += kolmogorov[static_cast<std::size_t>(i)];
  }
  const double count_mean = count_sum / n_samples;
  double count_var = 0.0;
  for (int i = 0; i < n_samples; ++i) {
    const double dev = counts[static_cast<std::size_t>(i)] - count_mean;
    count_var += dev * dev;
  }
  count_var /= std::max(1, n_samples - 1);

  report.kolmogorov_mean = kolmogorov_sum / n_samples;
  report.arc_stats = ArcStats{options.theta, count_mean, count_var, n_samples};
  return report;
}

}  // namespace qpufsim
