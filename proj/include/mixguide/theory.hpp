#pragma once

#include <optional>
#include <vector>

#include "mixguide/dynamics.hpp"
#include "mixguide/mixture.hpp"

// Quantitative predictions about guided runs: lower bounds on terminal
// confidence, step-size conditions for the discrete entropy comparison, and
// the strong-guidance phase analysis for the aligned three-component model.
namespace mixguide {

// Non-target posterior mass after a logit gain u on baseline probability p:
// (1-p) e^{-u} / (p + (1-p) e^{-u}) = 1 - logistic(logit(p) + u).
// Decreasing in p and in u; 1 at p=0, 0 at p=1.
double residual_mass(double p, double u);
// logistic(logit(p) + u) = p / (p + (1-p) e^{-u})
double logit_shift(double p, double u);

struct BoundInputs {
  int components = 0;
  double eta = 0.0;
  double horizon = 0.0;  // T
  // general (near-orthogonal) geometry around center mu0 for guided label y
  double xi_w = 0.0;       // 1 - w_y / (w_y + min_{y' != y} w_{y'})
  double Delta = 0.0;      // max_{y'} | ||mu_y||^2 - ||mu_{y'}||^2 |
  double mu_gap_sq = 0.0;  // ||mu_y - mu0||^2
  double epsilon = 0.0;
  // coupling data
  double init_gap = 0.0;  // min_{y' != y} <x0 - z0, mu_y - mu_{y'}>
  double max_unguided_conf = 0.0;       // max over knots of P(z_t, y)
  double terminal_unguided_conf = 0.0;  // P(z_T, y)
  double delta_max = 0.0;               // discrete schedules only
  // two-cluster geometry (components == 2)
  double mu_half_sq = 0.0;  // ||(mu_y - mu_other)/2||^2
  double Delta1 = 0.0;      // | ||mu_y||^2 - ||mu_other||^2 |
  double w_other = 0.0;
};

// Collects every scalar the bounds need from a coupled run. epsilon defaults
// to the measured max cross inner product around mu0.
BoundInputs make_bound_inputs(const MixtureModel& m, int y, const Vec& mu0,
                              std::optional<double> epsilon, const CoupledRun& run);

struct ConfidenceBound {
  double u_star = 0.0;  // supremum of logit gains certified by self-consistency
  double bound = 0.0;   // certified lower bound on terminal guided confidence
  bool degenerate = false;  // coefficient <= 0; bound equals the baseline
};

// Deterministic sampler, general geometry:
// u* = sup{u >= 0 : u < init_gap + (1 - e^{-T}) eta e^{-Delta/8}
//                       (mu_gap_sq - 3 eps) min(residual_mass(maxP, u), xi_w)}
// bound = logit_shift(P(z_T,y), u*).
ConfidenceBound ddim_confidence_bound(const BoundInputs& in);

// Stochastic sampler, general geometry: rhs uses e^{-T} init_gap,
// eta (1 - e^{-2T}) e^{-Delta/8} (...) min(residual_mass(maxP, e^T u), xi_w).
ConfidenceBound ddpm_confidence_bound(const BoundInputs& in);

// Two-component models (no near-orthogonality needed):
// coefficient 4 eta e^{-Delta1/8} mu_half_sq (1 - e^{-T}) (deterministic) or
// (1 - e^{-2T}) with residual argument e^T u (stochastic); cap w_other.
ConfidenceBound two_cluster_bound(const BoundInputs& in, bool stochastic);

// Discrete schedules. Deterministic: coefficient picks up e^{-delta_max}.
// Stochastic (requires delta_max <= 1/2): init term e^{-T-delta_max} init_gap,
// coefficient eta e^{-Delta/8} (e^{-T} - e^{-3T}) (...), final bound
// logit_shift(P(z_T,y), e^{-2T} u*). two_cluster substitutes the
// two-component geometry for the general one.
ConfidenceBound discrete_confidence_bound(const BoundInputs& in, bool stochastic,
                                          bool two_cluster = false);

struct StepConditionReport {
  std::vector<bool> growth_ok;  // 1 + d_k > d_k/(s^1) + d_k eta B / (s^2)
  std::vector<bool> half_ok;    // d_k + d_k/(s^1) + d_k eta B / (s^2) < 1/2
  bool all_ok = false;
  // sup of eta satisfying both conditions at every step (+inf if
  // eta-independent and satisfied, <= 0 if no eta >= 0 works)
  double limiting_eta = 0.0;
};

// Step-size conditions for the discrete entropy comparison, with
// s^1 = min(sigma_min, 1), s^2 = min(sigma_min^2, 1), B = sup_y ||mu_y||^2.
StepConditionReport entropy_step_condition(const MixtureModel& m, double eta,
                                           const Schedule& sched);

// Aligned symmetric model (1/3) N(-mu, I) + (1/3) N(0, I) + (1/3) N(mu, I)
// guided to the center component. v_k = <X_k, mu> obeys
// v_{k+1} = -(v_k + h(v_k, k)) with h as below.
struct PhaseInputs {
  Vec mu;
  double eta = 0.0;
  double horizon = 0.0;
  Schedule schedule;
};

// h(v,k) = delta_k eta a M (e^{av} - e^{-av}) / (e^{a^2 M/2} + e^{av} + e^{-av}) - 2v,
// a = e^{-T + t_k}, M = ||mu||^2. Odd in v.
double phase_h(double v, int k, const PhaseInputs& in);
// dh/dv = delta_k eta a^2 M [e^{a^2 M/2}(e^{av} + e^{-av}) + 4]
//           / (e^{a^2 M/2} + e^{av} + e^{-av})^2 - 2
double phase_h_derivative(double v, int k, const PhaseInputs& in);

struct PhaseThresholds {
  double eta0 = 0.0;        // guaranteed contraction for eta <= eta0
  double eta0_prime = 0.0;  // guaranteed splitting for eta >= eta0_prime
  // present when eta >= eta0_prime and the admissible step set
  // {k : e^{-T + t_k} >= 1/2} is nonempty
  std::optional<double> s0, s1, a, b_prime, b;
};

PhaseThresholds phase_thresholds(const PhaseInputs& in);

enum class PhaseClass { Convergent, Splitting, Indeterminate };

PhaseClass classify_phase(const PhaseInputs& in);
const char* phase_name(PhaseClass c);

}  // namespace mixguide
