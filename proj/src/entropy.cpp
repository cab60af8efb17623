#include "mixguide/entropy.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "mixguide/simd/kernels.hpp"

namespace mixguide {

namespace {

constexpr double kFloor = 1e-12;
constexpr double kPi = 3.14159265358979323846264338327950288;
constexpr double kLog2Pi = 1.8378770664093454835606594728112;
constexpr double kEulerGamma = 0.57721566490153286060651209;
constexpr int kJackknifeBlocks = 10;

[[noreturn]] void fail(const char* op, const std::string& what) {
  throw std::invalid_argument(std::string(op) + ": " + what);
}

// digamma at integer argument: psi(m) = -gamma + H_{m-1}
double psi_int(int m) {
  double h = 0.0;
  for (int j = 1; j < m; ++j) h += 1.0 / j;
  return h - kEulerGamma;
}

double spacing_value(std::vector<double> x, int m, bool bias_corrected, bool* warn) {
  const int n = static_cast<int>(x.size());
  std::sort(x.begin(), x.end());
  double acc = 0.0;
  for (int i = 1; i <= n; ++i) {
    const int lo = std::max(i - m, 1);
    const int hi = std::min(i + m, n);
    double diff = x[hi - 1] - x[lo - 1];
    if (diff < kFloor) {
      diff = kFloor;
      if (warn) *warn = true;
    }
    double c = 2.0;
    if (bias_corrected) {
      if (i <= m)
        c = 1.0 + static_cast<double>(i - 1) / m;
      else if (i > n - m)
        c = 1.0 + static_cast<double>(n - i) / m;
    }
    acc += std::log(static_cast<double>(n) / (c * m) * diff);
  }
  return acc / n;
}

double knn_value(const std::vector<Vec>& x, int k, bool* warn) {
  const int n = static_cast<int>(x.size());
  const int d = static_cast<int>(x.front().size());
  std::vector<double> best(k);
  double sum_log_r = 0.0;
  for (int i = 0; i < n; ++i) {
    int filled = 0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double dist = simd::sq_dist(x[i].data(), x[j].data(), d);
      if (filled < k) {
        best[filled++] = dist;
        if (filled == k) std::make_heap(best.begin(), best.end());
      } else if (dist < best.front()) {
        std::pop_heap(best.begin(), best.end());
        best[k - 1] = dist;
        std::push_heap(best.begin(), best.end());
      }
    }
    double r = std::sqrt(best.front());
    if (r < kFloor) {
      r = kFloor;
      if (warn) *warn = true;
    }
    sum_log_r += std::log(r);
  }
  const double log_vd = 0.5 * d * std::log(kPi) - std::lgamma(0.5 * d + 1.0);
  return psi_int(n) - psi_int(k) + log_vd + static_cast<double>(d) / n * sum_log_r;
}

double kde_mc_value(const std::vector<Vec>& x) {
  const int n = static_cast<int>(x.size());
  const int d = static_cast<int>(x.front().size());
  std::vector<const Vec*> fit, held;
  for (int i = 0; i < n; ++i) ((i % 2 == 0) ? fit : held).push_back(&x[i]);
  const int nf = static_cast<int>(fit.size());

  Vec mean(d, 0.0), inv_h(d);
  for (const Vec* p : fit)
    for (int j = 0; j < d; ++j) mean[j] += (*p)[j];
  for (int j = 0; j < d; ++j) mean[j] /= nf;
  double log_h_sum = 0.0;
  const double rate = std::pow(static_cast<double>(nf), -1.0 / (d + 4.0));
  for (int j = 0; j < d; ++j) {
    double ss = 0.0;
    for (const Vec* p : fit) {
      const double r = (*p)[j] - mean[j];
      ss += r * r;
    }
    const double sd = std::sqrt(ss / (nf - 1));
    const double h = sd * rate;
    if (!(h > 0.0) || !std::isfinite(h))
      fail("kde_mc_entropy", "degenerate bandwidth (constant coordinate in fit half)");
    inv_h[j] = 1.0 / h;
    log_h_sum += std::log(h);
  }
  const double log_norm = -log_h_sum - 0.5 * d * kLog2Pi - std::log(static_cast<double>(nf));

  std::vector<double> expo(nf);
  double acc = 0.0;
  for (const Vec* q : held) {
    double mx = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < nf; ++i) {
      expo[i] = -0.5 * simd::sq_dist_scaled(q->data(), fit[i]->data(), inv_h.data(), d);
      mx = std::max(mx, expo[i]);
    }
    double s = 0.0;
    for (int i = 0; i < nf; ++i) s += std::exp(expo[i] - mx);
    acc += mx + std::log(s) + log_norm;
  }
  return -acc / static_cast<double>(held.size());
}

// Delete-one-block jackknife over interleaved blocks.
template <typename Subset, typename Fn>
double jackknife_stderr(const std::vector<Subset>& all, Fn&& value_of) {
  const int n = static_cast<int>(all.size());
  const int B = kJackknifeBlocks;
  std::vector<double> theta(B);
  std::vector<Subset> sub;
  sub.reserve(all.size());
  for (int b = 0; b < B; ++b) {
    sub.clear();
    for (int i = 0; i < n; ++i) {
      if (i % B != b) sub.push_back(all[i]);
    }
    theta[b] = value_of(sub);
  }
  double mean = 0.0;
  for (double t : theta) mean += t;
  mean /= B;
  double ss = 0.0;
  for (double t : theta) ss += (t - mean) * (t - mean);
  return std::sqrt((B - 1.0) / B * ss);
}

}  // namespace

const char* estimator_name(EntropyEstimator e) {
  switch (e) {
    case EntropyEstimator::Spacing: return "spacing";
    case EntropyEstimator::Knn: return "knn";
    case EntropyEstimator::KdeMc: return "kde-mc";
    case EntropyEstimator::Gaussian: return "gaussian";
  }
  return "?";
}

std::optional<EntropyEstimator> estimator_from_name(const std::string& s) {
  if (s == "spacing") return EntropyEstimator::Spacing;
  if (s == "knn") return EntropyEstimator::Knn;
  if (s == "kde-mc") return EntropyEstimator::KdeMc;
  if (s == "gaussian") return EntropyEstimator::Gaussian;
  return std::nullopt;
}

EntropyEstimate spacing_entropy_1d(const std::vector<double>& samples, std::optional<int> m_opt,
                                   bool bias_corrected) {
  const char* op = "spacing_entropy_1d";
  const int n = static_cast<int>(samples.size());
  if (n < 10) fail(op, "need at least 10 samples");
  for (double v : samples) {
    if (!std::isfinite(v)) fail(op, "non-finite sample");
  }
  const int m = m_opt.value_or(static_cast<int>(std::floor(std::sqrt(n) + 0.5)));
  if (m < 1 || n < 2 * m + 1) fail(op, "spacing order m requires n >= 2m+1");

  EntropyEstimate e;
  e.estimator = EntropyEstimator::Spacing;
  e.n = n;
  e.value = spacing_value(samples, m, bias_corrected, &e.degenerate_warning);
  e.stderr_proxy = jackknife_stderr(samples, [&](const std::vector<double>& sub) {
    const int msub = m_opt.value_or(static_cast<int>(std::floor(std::sqrt(sub.size()) + 0.5)));
    return spacing_value(sub, std::min<int>(msub, (static_cast<int>(sub.size()) - 1) / 2),
                         bias_corrected, nullptr);
  });
  return e;
}

EntropyEstimate knn_entropy(const std::vector<Vec>& samples, int k) {
  const char* op = "knn_entropy";
  const int n = static_cast<int>(samples.size());
  if (k < 1) fail(op, "k must be >= 1");
  if (n <= k) fail(op, "need n > k samples");
  const int d = static_cast<int>(samples.front().size());
  for (const Vec& v : samples) {
    if (static_cast<int>(v.size()) != d) fail(op, "inconsistent sample dimensions");
    for (double c : v) {
      if (!std::isfinite(c)) fail(op, "non-finite sample");
    }
  }

  EntropyEstimate e;
  e.estimator = EntropyEstimator::Knn;
  e.n = n;
  e.value = knn_value(samples, k, &e.degenerate_warning);
  e.stderr_proxy = jackknife_stderr(
      samples, [&](const std::vector<Vec>& sub) { return knn_value(sub, k, nullptr); });
  return e;
}

EntropyEstimate kde_mc_entropy(const std::vector<Vec>& samples) {
  const char* op = "kde_mc_entropy";
  const int n = static_cast<int>(samples.size());
  if (n < 20) fail(op, "need at least 20 samples");
  const int d = static_cast<int>(samples.front().size());
  for (const Vec& v : samples) {
    if (static_cast<int>(v.size()) != d) fail(op, "inconsistent sample dimensions");
    for (double c : v) {
      if (!std::isfinite(c)) fail(op, "non-finite sample");
    }
  }

  EntropyEstimate e;
  e.estimator = EntropyEstimator::KdeMc;
  e.n = n;
  e.value = kde_mc_value(samples);
  e.stderr_proxy = jackknife_stderr(
      samples, [&](const std::vector<Vec>& sub) { return kde_mc_value(sub); });
  return e;
}

double gaussian_entropy(const std::vector<double>& cov_rowmajor, int d) {
  const char* op = "gaussian_entropy";
  if (d < 1 || cov_rowmajor.size() != static_cast<std::size_t>(d) * d)
    fail(op, "covariance must be d x d");
  Eigen::MatrixXd S(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) S(i, j) = cov_rowmajor[i * d + j];
  Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (S + S.transpose()));
  if (llt.info() != Eigen::Success) fail(op, "covariance must be positive definite");
  double logdet = 0.0;
  for (int i = 0; i < d; ++i) logdet += std::log(llt.matrixL()(i, i));
  return 0.5 * (d * (kLog2Pi + 1.0) + 2.0 * logdet);
}

}  // namespace mixguide
