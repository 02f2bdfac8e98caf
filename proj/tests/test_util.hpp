#pragma once

// Shared helpers for the test suites: independent brute-force oracles and
// small statistics utilities. Everything here stays out of the library so the
// oracles cannot share code with the implementation paths they check.

#include <cmath>
#include <numeric>
#include <vector>

#include "qpufsim/qmath.hpp"
#include "qpufsim/rng.hpp"
#include "qpufsim/sampling.hpp"

namespace test_util {

using qpufsim::Complex;
using qpufsim::DensityMatrix;
using qpufsim::Matrix;
using qpufsim::PureState;
using qpufsim::Rng;
using qpufsim::UnitaryOp;
using qpufsim::Vector;

// random mixed state: normalized Wishart G G† with G of shape d x rank
inline DensityMatrix random_density(int dim, int rank, Rng& rng) {
  Matrix g(dim, rank);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < rank; ++j) g(i, j) = rng.complex_gaussian();
  Matrix w = g * g.adjoint();
  w /= w.trace().real();
  return DensityMatrix((w + Matrix(w.adjoint())) / 2.0);
}

struct MeanStdErr {
  double mean = 0.0;
  double std_err = 0.0;
};

inline MeanStdErr mean_std_err(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= (n - 1.0);
  return {mean, std::sqrt(var / n)};
}

inline double binomial_se(double p, double n) { return std::sqrt(p * (1.0 - p) / n); }

// Sampled lower bound on the diamond distance of two unitary channels:
// maximize the trace distance of (U ⊗ I)|phi> vs (V ⊗ I)|phi> over Haar
// ancilla-extended pure states. For pure states the trace distance is
// 2 sqrt(1 - overlap^2), with overlap <phi|(U†V ⊗ I)|phi>.
inline double sampled_diamond_lower_bound(const UnitaryOp& u, const UnitaryOp& v, int n_samples,
                                          Rng& rng) {
  const int d = u.dim();
  const Matrix w = u.entries().adjoint() * v.entries();
  const Matrix w_ext = qpufsim::kron(w, Matrix::Identity(d, d));
  double best = 0.0;
  for (int s = 0; s < n_samples; ++s) {
    const PureState phi = qpufsim::haar_state(d * d, rng);
    const Complex ov = phi.amplitudes().dot(w_ext * phi.amplitudes());
    const double val = 2.0 * std::sqrt(std::max(0.0, 1.0 - std::norm(ov)));
    best = std::max(best, val);
  }
  return best;
}

// exact Binomial(n, p) tail helpers in long double
inline long double binom_pmf(int n, int k, long double p) {
  long double log_c = 0.0L;
  for (int i = 0; i < k; ++i)
    log_c += std::log(static_cast<long double>(n - i)) - std::log(static_cast<long double>(i + 1));
  return std::exp(log_c + k * std::log(p) + (n - k) * std::log(1.0L - p));
}

// P[|X - center| <= radius] for X ~ Binomial(n, p)
inline long double binom_window_prob(int n, long double p, long double center,
                                     long double radius) {
  long double total = 0.0L;
  for (int k = 0; k <= n; ++k)
    if (std::fabs(static_cast<long double>(k) - center) <= radius) total += binom_pmf(n, k, p);
  return total;
}

}  // namespace test_util
