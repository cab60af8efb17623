#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mixguide/mixture.hpp"
#include "mixguide/rng.hpp"

// Reverse-time guided samplers over a horizon T. Reverse time t runs 0 -> T
// while diffusion time tau = T - t runs T -> 0. The deterministic (DDIM)
// family integrates dx/dt = x + score + eta * classifier gradient; the
// stochastic (DDPM) family integrates the doubled drift plus sqrt(2) dB via
// Euler-Maruyama with tape noise. The "discrete" kinds are the explicit
// update rules X_{k+1} = X_k + delta_k * drift(tau_k, X_k) (+ noise), which
// coincide with Euler/Euler-Maruyama on the same grid.
namespace mixguide {

enum class SamplerKind { DdimContinuous, DdpmContinuous, DdimDiscrete, DdpmDiscrete };
enum class OdeMethod { Euler, Rk4 };

bool sampler_is_stochastic(SamplerKind k);
const char* sampler_name(SamplerKind k);
std::optional<SamplerKind> sampler_from_name(const std::string& s);

struct Schedule {
  std::vector<double> knots;   // t_0 = 0 < t_1 < ... < t_K <= T
  std::vector<double> deltas;  // delta_k = t_{k+1} - t_k > 0
  double horizon = 0.0;        // T

  // K equal steps covering [0, T].
  static Schedule uniform(double T, int K);
  // Equal steps of size delta; K = floor(T/delta + 1e-9), so t_K <= T with
  // equality when delta divides T.
  static Schedule from_delta(double T, double delta);
  static Schedule from_deltas(std::vector<double> deltas, double T);

  int steps() const { return static_cast<int>(deltas.size()); }
  double delta_max() const;
  double delta_min() const;
};

struct Trajectory {
  SamplerKind kind = SamplerKind::DdimContinuous;
  int label = 0;
  double eta = 0.0;
  double horizon = 0.0;            // T
  std::vector<double> times;       // schedule knots, size K+1
  std::vector<Vec> states;         // state at each knot
  std::vector<double> confidence;  // P(state, label) at each knot

  const Vec& terminal() const { return states.back(); }
  double terminal_confidence() const { return confidence.back(); }
  double max_confidence() const;
};

struct CoupledRun {
  double eta = 0.0;
  Trajectory guided;
  Trajectory unguided;  // same init, same noise tape, eta = 0
  Vec init;
  std::uint64_t seed = 0;
};

struct InitLaw {
  enum class Kind { Point, Gaussian } kind = Kind::Gaussian;
  Vec x0;  // Point only

  static InitLaw point(Vec x) { return InitLaw{Kind::Point, std::move(x)}; }
  static InitLaw gaussian() { return InitLaw{Kind::Gaussian, {}}; }
};

struct SamplerSpec {
  SamplerKind kind = SamplerKind::DdimContinuous;
  OdeMethod method = OdeMethod::Rk4;  // continuous DDIM only
  int substeps = 1000;                // continuous kinds: uniform grid size
  double delta = 0.01;                // discrete kinds: uniform step size
  std::optional<Schedule> schedule;   // overrides substeps/delta when set

  Schedule make_schedule(double T) const;
};

// Single discrete updates (exact update rules at step k of the schedule).
Vec step_ddim_discrete(const MixtureModel& m, int y, double eta, const Vec& Xk, int k,
                       const Schedule& sched);
Vec step_ddpm_discrete(const MixtureModel& m, int y, double eta, const Vec& Xk, int k,
                       const Schedule& sched, const Vec& wk);

// Deterministic reverse integration with substep control; records state and
// confidence at every grid knot. Throws std::runtime_error naming the step
// index and eta if the state leaves the finite range.
Trajectory integrate_ddim(const MixtureModel& m, int y, double eta, const Vec& x0, double T,
                          int substeps, OdeMethod method = OdeMethod::Rk4);

// Euler-Maruyama for the stochastic sampler; noise from tape path `path`.
Trajectory integrate_ddpm(const MixtureModel& m, int y, double eta, const Vec& x0, double T,
                          const Schedule& sched, const NoiseTape& tape, std::uint64_t path = 0);
Trajectory integrate_ddpm(const MixtureModel& m, int y, double eta, const Vec& x0, double T,
                          int substeps, const NoiseTape& tape, std::uint64_t path = 0);

// One path of any sampler kind under `spec`.
Trajectory run_path(const MixtureModel& m, int y, double eta, const Vec& x0, double T,
                    const SamplerSpec& spec, const NoiseTape& tape, std::uint64_t path = 0);

// Guided/unguided twins for each eta in `etas` (must contain 0), all from the
// same init and the same noise tape. eta = 0 pairs the baseline with itself.
std::vector<CoupledRun> run_coupled(const MixtureModel& m, int y, const std::vector<double>& etas,
                                    const Vec& x0, double T, const SamplerSpec& spec,
                                    std::uint64_t seed);

// n terminal states; path i uses tape path index i. Gaussian init draws
// N(0, I_d) from the tape's init stream. Memory stays O(n * d): trajectories
// are not retained.
std::vector<Vec> sample_ensemble(const MixtureModel& m, int y, double eta, int n, double T,
                                 const SamplerSpec& spec, const InitLaw& init, std::uint64_t seed);

}  // namespace mixguide
