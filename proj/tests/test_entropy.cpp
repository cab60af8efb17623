#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "mixguide/entropy.hpp"
#include "mixguide/rng.hpp"

using namespace mixguide;

namespace {

// h(N(0, I_1)) = (1 + log(2 pi)) / 2
constexpr double kH1 = 1.4189385332046727;

std::vector<double> gauss_1d(int n, std::uint64_t seed) {
  NoiseTape tape(seed);
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) tape.fill_init(static_cast<std::uint64_t>(i), &v[i], 1);
  return v;
}

std::vector<Vec> gauss_nd(int n, int d, std::uint64_t seed) {
  NoiseTape tape(seed);
  std::vector<Vec> v(n, Vec(d));
  for (int i = 0; i < n; ++i) tape.fill_init(static_cast<std::uint64_t>(i), v[i].data(), d);
  return v;
}

}  // namespace

TEST_CASE("gaussian entropy closed forms") {
  CHECK(gaussian_entropy({1.0}, 1) == doctest::Approx(kH1).epsilon(1e-14));
  CHECK(gaussian_entropy({1.0, 0.0, 0.0, 1.0}, 2) == doctest::Approx(2.0 * kH1).epsilon(1e-14));
  CHECK(gaussian_entropy({4.0}, 1) == doctest::Approx(kH1 + std::log(2.0)).epsilon(1e-13));
  // det = 1: entropy equals the isotropic value even with correlation
  CHECK(gaussian_entropy({1.25, 0.75, 0.75, 1.25}, 2) ==
        doctest::Approx(2.0 * kH1).epsilon(1e-12));
  CHECK_THROWS_AS(gaussian_entropy({1.0, 2.0, 2.0, 1.0}, 2), std::invalid_argument);
  CHECK_THROWS_AS(gaussian_entropy({1.0, 0.0}, 2), std::invalid_argument);
}

TEST_CASE("estimator names round-trip") {
  for (EntropyEstimator e : {EntropyEstimator::Spacing, EntropyEstimator::Knn,
                             EntropyEstimator::KdeMc, EntropyEstimator::Gaussian}) {
    const auto back = estimator_from_name(estimator_name(e));
    REQUIRE(back.has_value());
    CHECK(*back == e);
  }
  CHECK(!estimator_from_name("parzen").has_value());
}

TEST_CASE("spacing estimator calibrates on the standard normal") {
  // accuracy improves with n; thresholds are loose on purpose
  CHECK(std::abs(spacing_entropy_1d(gauss_1d(100, 1)).value - kH1) < 0.5);
  CHECK(std::abs(spacing_entropy_1d(gauss_1d(1000, 2)).value - kH1) < 0.12);
  const EntropyEstimate e = spacing_entropy_1d(gauss_1d(10000, 3));
  CHECK(std::abs(e.value - kH1) < 0.05);
  CHECK(e.estimator == EntropyEstimator::Spacing);
  CHECK(e.n == 10000);
  CHECK(e.stderr_proxy > 0.0);
  CHECK(e.stderr_proxy < 0.1);
  CHECK(!e.degenerate_warning);

  const EntropyEstimate bc = spacing_entropy_1d(gauss_1d(10000, 3), std::nullopt, true);
  CHECK(std::abs(bc.value - kH1) < 0.05);

  // explicit window override
  CHECK(std::abs(spacing_entropy_1d(gauss_1d(10000, 3), 25).value - kH1) < 0.05);
}

TEST_CASE("spacing estimator is exactly location/scale equivariant") {
  const auto base = gauss_1d(600, 9);
  std::vector<double> moved(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) moved[i] = 2.0 * base[i] + 3.0;
  const double h0 = spacing_entropy_1d(base).value;
  const double h1 = spacing_entropy_1d(moved).value;
  CHECK(h1 - h0 == doctest::Approx(std::log(2.0)).epsilon(1e-10));
}

TEST_CASE("spacing estimator flags degenerate samples and validates input") {
  const std::vector<double> flat(64, 1.5);
  const EntropyEstimate e = spacing_entropy_1d(flat);
  CHECK(e.degenerate_warning);
  CHECK(e.value < -20.0);  // floored spacings, not a real entropy

  CHECK_THROWS_AS(spacing_entropy_1d(std::vector<double>(5, 0.0)), std::invalid_argument);
  CHECK_THROWS_AS(spacing_entropy_1d(gauss_1d(20, 1), 10), std::invalid_argument);  // 2m+1 > n
  CHECK_THROWS_AS(spacing_entropy_1d(gauss_1d(20, 1), 0), std::invalid_argument);
  std::vector<double> bad = gauss_1d(20, 1);
  bad[3] = std::nan("");
  CHECK_THROWS_AS(spacing_entropy_1d(bad), std::invalid_argument);
}

TEST_CASE("knn estimator calibrates in one and two dimensions") {
  const EntropyEstimate e1 = knn_entropy(gauss_nd(2000, 1, 4));
  CHECK(std::abs(e1.value - kH1) < 0.12);
  const EntropyEstimate e2 = knn_entropy(gauss_nd(2000, 2, 5));
  CHECK(std::abs(e2.value - 2.0 * kH1) < 0.15);
  CHECK(e2.stderr_proxy > 0.0);

  // exact scale equivariance: h(aX) = h(X) + d log a
  const auto base = gauss_nd(400, 2, 6);
  std::vector<Vec> scaled(base.size(), Vec(2));
  for (std::size_t i = 0; i < base.size(); ++i)
    for (int j = 0; j < 2; ++j) scaled[i][j] = 3.0 * base[i][j];
  CHECK(knn_entropy(scaled).value - knn_entropy(base).value ==
        doctest::Approx(2.0 * std::log(3.0)).epsilon(1e-10));
}

TEST_CASE("knn estimator flags duplicates and validates input") {
  // thirty points stacked on three locations: k=3 neighbors at distance zero
  std::vector<Vec> stacked;
  for (int i = 0; i < 30; ++i) stacked.push_back({static_cast<double>(i % 3)});
  const EntropyEstimate e = knn_entropy(stacked);
  CHECK(e.degenerate_warning);

  CHECK_THROWS_AS(knn_entropy(gauss_nd(3, 1, 1), 3), std::invalid_argument);  // n <= k
  CHECK_THROWS_AS(knn_entropy(gauss_nd(10, 1, 1), 0), std::invalid_argument);
  auto ragged = gauss_nd(10, 2, 1);
  ragged[4] = {1.0};
  CHECK_THROWS_AS(knn_entropy(ragged), std::invalid_argument);
}

TEST_CASE("kde estimator calibrates and rejects degenerate bandwidths") {
  const EntropyEstimate e1 = kde_mc_entropy(gauss_nd(4000, 1, 7));
  CHECK(std::abs(e1.value - kH1) < 0.1);
  const EntropyEstimate e2 = kde_mc_entropy(gauss_nd(4000, 2, 8));
  CHECK(std::abs(e2.value - 2.0 * kH1) < 0.15);
  CHECK(e2.stderr_proxy > 0.0);

  CHECK_THROWS_AS(kde_mc_entropy(gauss_nd(10, 1, 1)), std::invalid_argument);  // n < 20
  CHECK_THROWS_AS(kde_mc_entropy(std::vector<Vec>(50, Vec{1.0, 2.0})), std::invalid_argument);
}

TEST_CASE("estimators agree with each other on the same sample") {
  const auto s2 = gauss_nd(3000, 1, 11);
  std::vector<double> flat(s2.size());
  for (std::size_t i = 0; i < s2.size(); ++i) flat[i] = s2[i][0];
  const double hs = spacing_entropy_1d(flat).value;
  const double hk = knn_entropy(s2).value;
  const double hd = kde_mc_entropy(s2).value;
  CHECK(std::abs(hs - hk) < 0.15);
  CHECK(std::abs(hs - hd) < 0.15);
}
