#pragma once

#include <cstdint>

// Counter-based Gaussian noise source. Every increment is a pure function of
// (seed, path, step, lane), so replaying any path or step is bit-identical
// regardless of evaluation order. That is what makes coupled guided/unguided
// runs and ensemble re-runs reproducible without storing noise.
namespace mixguide {

// splitmix64 finalizer; full-period bijective mixer.
std::uint64_t mix64(std::uint64_t z);

class NoiseTape {
 public:
  explicit NoiseTape(std::uint64_t seed) : seed_(seed) {}

  // All-zero increments; for deterministic checks of stochastic integrators.
  static NoiseTape zeros() {
    NoiseTape t(0);
    t.zero_ = true;
    return t;
  }

  std::uint64_t seed() const { return seed_; }
  bool is_zero() const { return zero_; }

  // d i.i.d. standard normals for integration step `step` of path `path`.
  void fill_step(std::uint64_t path, std::uint64_t step, double* out, int d) const;
  // d i.i.d. standard normals for the initial draw of path `path`; a stream
  // disjoint from every fill_step stream.
  void fill_init(std::uint64_t path, double* out, int d) const;

  // Uniform in [0,1) for auxiliary decisions keyed to (path, slot).
  double uniform(std::uint64_t path, std::uint64_t slot) const;

 private:
  void fill(std::uint64_t stream_tag, std::uint64_t path, std::uint64_t step, double* out,
            int d) const;

  std::uint64_t seed_ = 0;
  bool zero_ = false;
};

}  // namespace mixguide
