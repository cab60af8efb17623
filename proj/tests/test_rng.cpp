#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <vector>

#include "mixguide/rng.hpp"

using namespace mixguide;

TEST_CASE("mix64 is a bijective-looking mixer") {
  CHECK(mix64(1) != mix64(2));
  // zero is the finalizer's one fixed point; keyed streams offset seeds so
  // a raw zero input never reaches it
  CHECK(mix64(0) == 0);
  CHECK(mix64(0x9e3779b97f4a7c15ull) != 0);
  // avalanche: flipping one input bit flips roughly half the output bits
  const std::uint64_t a = mix64(0x123456789abcdef0ull);
  const std::uint64_t b = mix64(0x123456789abcdef1ull);
  int diff = 0;
  for (int i = 0; i < 64; ++i) diff += static_cast<int>((a >> i & 1) != (b >> i & 1));
  CHECK(diff > 16);
  CHECK(diff < 48);
}

TEST_CASE("tape replay is bit-identical") {
  NoiseTape tape(99);
  std::vector<double> a(7), b(7);
  tape.fill_step(3, 11, a.data(), 7);
  tape.fill_step(3, 11, b.data(), 7);
  CHECK(a == b);

  NoiseTape same(99);
  same.fill_step(3, 11, b.data(), 7);
  CHECK(a == b);

  CHECK(tape.uniform(5, 2) == tape.uniform(5, 2));
}

TEST_CASE("streams are distinct across seed, path, step, and init") {
  std::vector<double> a(8), b(8);

  NoiseTape t1(1), t2(2);
  t1.fill_step(0, 0, a.data(), 8);
  t2.fill_step(0, 0, b.data(), 8);
  CHECK(a != b);

  t1.fill_step(1, 0, b.data(), 8);
  CHECK(a != b);

  t1.fill_step(0, 1, b.data(), 8);
  CHECK(a != b);

  t1.fill_init(0, b.data(), 8);
  CHECK(a != b);

  CHECK(t1.uniform(0, 0) != t1.uniform(0, 1));
  CHECK(t1.uniform(0, 0) != t1.uniform(1, 0));
}

TEST_CASE("zeros tape emits zero increments") {
  NoiseTape z = NoiseTape::zeros();
  CHECK(z.is_zero());
  std::vector<double> v(5, 1.0);
  z.fill_step(7, 9, v.data(), 5);
  for (double x : v) CHECK(x == 0.0);
  z.fill_init(7, v.data(), 5);
  for (double x : v) CHECK(x == 0.0);
}

TEST_CASE("gaussian output has standard moments") {
  NoiseTape tape(2024);
  const int n = 20000, d = 4;
  double sum = 0.0, sumsq = 0.0, max_abs = 0.0;
  std::vector<double> v(d);
  for (int i = 0; i < n; ++i) {
    tape.fill_step(static_cast<std::uint64_t>(i), 0, v.data(), d);
    for (double x : v) {
      CHECK(std::isfinite(x));
      sum += x;
      sumsq += x * x;
      max_abs = std::max(max_abs, std::abs(x));
    }
  }
  const double total = static_cast<double>(n) * d;
  const double mean = sum / total;
  const double var = sumsq / total - mean * mean;
  CHECK(std::abs(mean) < 0.02);       // se ~ 1/sqrt(8e4) ~ 0.0035
  CHECK(std::abs(var - 1.0) < 0.03);  // se ~ sqrt(2/8e4) ~ 0.005
  CHECK(max_abs < 7.0);               // no Box-Muller blowups
  CHECK(max_abs > 3.0);               // tails are actually populated
}

TEST_CASE("uniform output lies in [0,1) and is equidistributed") {
  NoiseTape tape(5);
  const int n = 20000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = tape.uniform(static_cast<std::uint64_t>(i), 3);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / n - 0.5) < 0.01);
}

TEST_CASE("odd dimensions exercise the Box-Muller tail lane") {
  NoiseTape tape(8);
  std::vector<double> a(3), b(4);
  tape.fill_step(0, 0, a.data(), 3);
  tape.fill_step(0, 0, b.data(), 4);
  // same (path, step) stream: a shared prefix regardless of requested width
  CHECK(a[0] == b[0]);
  CHECK(a[1] == b[1]);
  CHECK(a[2] == b[2]);
}
