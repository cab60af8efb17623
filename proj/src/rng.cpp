#include "mixguide/rng.hpp"

#include <cmath>
#include <cstring>

namespace mixguide {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kStepTag = 0xa0761d6478bd642fULL;
constexpr std::uint64_t kInitTag = 0xe7037ed1a0b428dbULL;
constexpr std::uint64_t kUniformTag = 0x8ebc6af09c88c6e3ULL;

// Key one output word to (seed, tag, path, step, lane). Three mix rounds keep
// adjacent counters statistically independent.
inline std::uint64_t keyed(std::uint64_t seed, std::uint64_t tag, std::uint64_t path,
                           std::uint64_t step, std::uint64_t lane) {
  std::uint64_t h = mix64(seed + kGolden);
  h = mix64(h ^ (tag + kGolden * path));
  h = mix64(h ^ (kGolden * (step + 1) + lane));
  return h;
}

inline double to_unit_open(std::uint64_t bits) {
  // (0,1]; never 0 so log() below is safe.
  return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

inline double to_unit_half_open(std::uint64_t bits) {
  // [0,1)
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace

std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

void NoiseTape::fill(std::uint64_t tag, std::uint64_t path, std::uint64_t step, double* out,
                     int d) const {
  if (zero_) {
    for (int i = 0; i < d; ++i) out[i] = 0.0;
    return;
  }
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  for (int i = 0; i < d; i += 2) {
    const std::uint64_t lane = static_cast<std::uint64_t>(i / 2);
    const double u1 = to_unit_open(keyed(seed_, tag, path, step, 2 * lane));
    const double u2 = to_unit_half_open(keyed(seed_, tag, path, step, 2 * lane + 1));
    const double r = std::sqrt(-2.0 * std::log(u1));
    out[i] = r * std::cos(kTwoPi * u2);
    if (i + 1 < d) out[i + 1] = r * std::sin(kTwoPi * u2);
  }
}

void NoiseTape::fill_step(std::uint64_t path, std::uint64_t step, double* out, int d) const {
  fill(kStepTag, path, step, out, d);
}

void NoiseTape::fill_init(std::uint64_t path, double* out, int d) const {
  fill(kInitTag, path, 0, out, d);
}

double NoiseTape::uniform(std::uint64_t path, std::uint64_t slot) const {
  if (zero_) return 0.0;
  return to_unit_half_open(keyed(seed_, kUniformTag, path, slot, 0));
}

}  // namespace mixguide
