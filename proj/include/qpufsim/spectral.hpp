#pragma once

#include <vector>

#include "qpufsim/qmath.hpp"
#include "qpufsim/qpuf.hpp"
#include "qpufsim/rng.hpp"

namespace qpufsim {

struct ArcStats {
  double theta = 0.0;
  double mean_count = 0.0;
  double var_count = 0.0;  // sample variance (n-1 denominator)
  int n_samples = 0;
};

enum class SpectralFamily { Haar, Pru, MaxUnique };

struct SpectralOptions {
  int pru_depth = 0;  // 0 -> default for the qubit count
  double maxunique_epsilon = 0.05;
  double theta = M_PI;
  int max_attempts = 0;  // 0 -> default budget for the MaxUnique constructor
};

struct SpectralReport {
  SpectralFamily family = SpectralFamily::Haar;
  int dim = 0;
  int n_samples = 0;
  double theta = 0.0;
  double kolmogorov_mean = 0.0;
  std::vector<double> kolmogorov_per_sample;
  ArcStats arc_stats;
};

// Number of phases in the half-open arc [start, start + length), with
// wraparound; start may be any real.
int arc_count(const EigenphaseSet& phases, double start, double length);

struct WieandMoments {
  double mean = 0.0;
  double variance = 0.0;
};

// mean = d*theta/(2 pi); variance = (1/pi^2)(ln d + 1 + gamma + ln|2 sin(theta/2)|).
// Refuses theta outside (0.05, 2 pi - 0.05) where the log term degenerates.
WieandMoments wieand_expected(int d, double theta);

// sup over theta of |N_theta / d - theta / (2 pi)|, evaluated one-sided at the
// sorted-phase breakpoints where the supremum is attained.
double kolmogorov_distance(const EigenphaseSet& phases);

// Rejection-samples Haar unitaries, keeping a candidate only when its diamond
// distance to every kept member is >= 2 - epsilon. Refuses (reporting the
// achieved size) once the attempt budget runs out.
std::vector<UnitaryOp> build_maxunique_family(int dim, int n_members, double epsilon, Rng& rng,
                                              int max_attempts = 0);

SpectralReport spectral_report(SpectralFamily family, int dim, int n_samples, RngStream stream,
                               const SpectralOptions& options = {}, int n_threads = 1);

}  // namespace qpufsim
