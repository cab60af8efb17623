#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mixguide/mixture.hpp"

// Differential-entropy estimators for sampler output ensembles. All report a
// jackknife stderr proxy: the sample is cut into 10 interleaved blocks and
// the estimator is recomputed leaving one block out at a time;
// stderr = sqrt((B-1)/B * sum_b (theta_b - mean)^2).
namespace mixguide {

enum class EntropyEstimator { Spacing, Knn, KdeMc, Gaussian };

const char* estimator_name(EntropyEstimator e);
std::optional<EntropyEstimator> estimator_from_name(const std::string& s);

struct EntropyEstimate {
  double value = 0.0;
  double stderr_proxy = 0.0;
  EntropyEstimator estimator = EntropyEstimator::Spacing;
  int n = 0;
  // Set when a spacing/distance floor (1e-12) was applied; the value is then
  // dominated by degenerate geometry, not the underlying law.
  bool degenerate_warning = false;
};

// m-spacing estimator (1d): value = (1/n) sum_i log[(n/(2m)) (x_(i+m) - x_(i-m))]
// with order statistics clamped to [1, n]. Default m = floor(sqrt(n) + 1/2).
// bias_corrected selects the boundary-weight variant (2 -> c_i with
// c_i = 1 + (i-1)/m for i <= m, c_i = 1 + (n-i)/m for i > n-m).
// Requires n >= max(10, 2m+1).
EntropyEstimate spacing_entropy_1d(const std::vector<double>& samples,
                                   std::optional<int> m = std::nullopt,
                                   bool bias_corrected = false);

// Nearest-neighbor estimator:
// value = psi(n) - psi(k) + log V_d + (d/n) sum_i log r_{i,k},
// V_d = pi^{d/2} / Gamma(d/2 + 1), r_{i,k} the k-th neighbor distance
// (floored at 1e-12). Brute-force O(n^2). Requires n > k >= 1.
EntropyEstimate knn_entropy(const std::vector<Vec>& samples, int k = 3);

// Cross-validated kernel density estimator: fit a Gaussian-product KDE on the
// even-index half with per-dimension bandwidth h_j = sd_j * n_fit^{-1/(d+4)},
// evaluate mean negative log density on the odd-index half. Rejects
// degenerate (zero) bandwidths. Requires n >= 20.
EntropyEstimate kde_mc_entropy(const std::vector<Vec>& samples);

// Exact differential entropy of N(mu, Sigma): (1/2) log((2 pi e)^d det Sigma).
// Throws std::invalid_argument if Sigma is not positive definite.
double gaussian_entropy(const std::vector<double>& cov_rowmajor, int d);

}  // namespace mixguide
