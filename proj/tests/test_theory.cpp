#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "mixguide/dynamics.hpp"
#include "mixguide/mixture.hpp"
#include "mixguide/theory.hpp"

using namespace mixguide;

namespace {

MixtureModel symmetric_1d() { return MixtureModel::isotropic({0.5, 0.5}, {{1.0}, {-1.0}}); }

// near-orthogonal 3-component model (cross inner products all zero)
MixtureModel ortho_3d() {
  return MixtureModel::isotropic({0.25, 0.25, 0.5},
                                 {{2.0, 0.0, 0.0}, {0.0, 2.0, 0.0}, {0.0, 0.0, 2.0}});
}

MixtureModel aligned_2d() {
  return MixtureModel::isotropic({1.0 / 3, 1.0 / 3, 1.0 / 3},
                                 {{0.0, 0.0}, {2.0, 2.0}, {-2.0, -2.0}});
}

CoupledRun coupled_at(const MixtureModel& m, int y, double eta, const Vec& x0, double T,
                      const SamplerSpec& spec, std::uint64_t seed) {
  auto runs = run_coupled(m, y, {0.0, eta}, x0, T, spec, seed);
  return runs[1];
}

}  // namespace

TEST_CASE("residual mass and logit shift") {
  CHECK(residual_mass(0.0, 5.0) == 1.0);
  CHECK(residual_mass(-0.1, 5.0) == 1.0);
  CHECK(residual_mass(1.0, 5.0) == 0.0);
  CHECK(residual_mass(0.3, 0.0) == doctest::Approx(0.7).epsilon(1e-14));
  CHECK(logit_shift(0.0, 5.0) == 0.0);
  CHECK(logit_shift(1.0, 5.0) == 1.0);
  CHECK(logit_shift(0.3, 0.0) == doctest::Approx(0.3).epsilon(1e-14));

  // complementary by construction
  for (double p : {0.1, 0.5, 0.9}) {
    for (double u : {0.0, 0.7, 3.0}) {
      CHECK(residual_mass(p, u) + logit_shift(p, u) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }

  // decreasing in both arguments
  CHECK(residual_mass(0.2, 1.0) > residual_mass(0.2, 2.0));
  CHECK(residual_mass(0.2, 1.0) > residual_mass(0.4, 1.0));
  // huge gain drives the shifted probability to one
  CHECK(logit_shift(0.05, 50.0) > 1.0 - 1e-15);
}

TEST_CASE("bound inputs collect run geometry") {
  const MixtureModel m = symmetric_1d();
  SamplerSpec spec;
  spec.kind = SamplerKind::DdimDiscrete;
  spec.delta = 0.25;
  const CoupledRun run = coupled_at(m, 0, 2.0, {0.0}, 2.0, spec, 1);
  const BoundInputs in = make_bound_inputs(m, 0, {0.0}, std::nullopt, run);

  CHECK(in.components == 2);
  CHECK(in.eta == 2.0);
  CHECK(in.horizon == 2.0);
  CHECK(in.xi_w == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(in.Delta == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(in.mu_gap_sq == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(in.epsilon == doctest::Approx(1.0).epsilon(1e-14));  // |<mu_+, mu_->| around 0
  CHECK(in.init_gap == doctest::Approx(0.0).epsilon(1e-14));  // shared init
  CHECK(in.delta_max == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(in.mu_half_sq == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(in.Delta1 == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(in.w_other == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(in.max_unguided_conf >= in.terminal_unguided_conf);
  CHECK(in.max_unguided_conf <= 1.0);

  CHECK_THROWS_AS(make_bound_inputs(m, 0, {0.0, 0.0}, std::nullopt, run),
                  std::invalid_argument);
}

TEST_CASE("zero guidance gives the degenerate baseline bound") {
  const MixtureModel m = ortho_3d();
  SamplerSpec spec;
  spec.kind = SamplerKind::DdimContinuous;
  spec.substeps = 200;
  const CoupledRun run = coupled_at(m, 0, 0.0, {0.0, 0.0, 0.0}, 3.0, spec, 0);
  const BoundInputs in = make_bound_inputs(m, 0, {0.0, 0.0, 0.0}, std::nullopt, run);
  const ConfidenceBound b = ddim_confidence_bound(in);
  CHECK(b.degenerate);
  CHECK(b.u_star == 0.0);
  CHECK(b.bound == doctest::Approx(run.unguided.terminal_confidence()).epsilon(1e-14));
}

TEST_CASE("deterministic bounds hold and grow with eta") {
  const MixtureModel m = ortho_3d();
  const Vec x0 = {0.0, 0.0, 0.0};
  const double T = 4.0;
  SamplerSpec spec;
  spec.kind = SamplerKind::DdimContinuous;
  spec.substeps = 400;

  double prev = 0.0;
  for (double eta : {0.5, 1.0, 2.0, 4.0, 8.0}) {
    const CoupledRun run = coupled_at(m, 0, eta, x0, T, spec, 0);
    const BoundInputs in = make_bound_inputs(m, 0, x0, std::nullopt, run);
    const ConfidenceBound b = ddim_confidence_bound(in);
    CHECK(!b.degenerate);
    CHECK(b.u_star > 0.0);
    CHECK(b.bound >= 0.0);
    CHECK(b.bound <= 1.0);
    // certified lower bound respects the observed run ...
    CHECK(b.bound <= run.guided.terminal_confidence() + 1e-9);
    // ... improves on the baseline, and is monotone in guidance strength
    CHECK(b.bound > run.unguided.terminal_confidence());
    CHECK(b.bound >= prev - 1e-12);
    prev = b.bound;
  }
}

TEST_CASE("stochastic bound holds along a shared tape") {
  const MixtureModel m = ortho_3d();
  const Vec x0 = {0.0, 0.0, 0.0};
  const double T = 4.0;
  SamplerSpec spec;
  spec.kind = SamplerKind::DdpmContinuous;
  spec.substeps = 400;

  for (std::uint64_t seed : {11u, 12u, 13u}) {
    const CoupledRun run = coupled_at(m, 0, 2.0, x0, T, spec, seed);
    const BoundInputs in = make_bound_inputs(m, 0, x0, std::nullopt, run);
    const ConfidenceBound b = ddpm_confidence_bound(in);
    CHECK(b.bound <= run.guided.terminal_confidence() + 1e-6);
    CHECK(b.bound >= run.unguided.terminal_confidence() - 1e-12);
  }
}

TEST_CASE("two-cluster bounds dispense with near-orthogonality") {
  const MixtureModel m = symmetric_1d();
  const Vec x0 = {0.0};
  const double T = 5.0;

  SamplerSpec det;
  det.kind = SamplerKind::DdimContinuous;
  det.substeps = 300;
  const CoupledRun drun = coupled_at(m, 0, 3.0, x0, T, det, 0);
  const BoundInputs din = make_bound_inputs(m, 0, x0, std::nullopt, drun);
  const ConfidenceBound db = two_cluster_bound(din, false);
  CHECK(!db.degenerate);
  CHECK(db.bound <= drun.guided.terminal_confidence() + 1e-9);
  CHECK(db.bound > drun.unguided.terminal_confidence());

  SamplerSpec sto;
  sto.kind = SamplerKind::DdpmContinuous;
  sto.substeps = 300;
  const CoupledRun srun = coupled_at(m, 0, 3.0, x0, T, sto, 21);
  const BoundInputs sin = make_bound_inputs(m, 0, x0, std::nullopt, srun);
  const ConfidenceBound sb = two_cluster_bound(sin, true);
  CHECK(sb.bound <= srun.guided.terminal_confidence() + 1e-6);

  // needs exactly two components
  const MixtureModel m3 = ortho_3d();
  SamplerSpec spec3;
  spec3.kind = SamplerKind::DdimContinuous;
  spec3.substeps = 100;
  const CoupledRun r3 = coupled_at(m3, 0, 1.0, {0.0, 0.0, 0.0}, 2.0, spec3, 0);
  const BoundInputs in3 = make_bound_inputs(m3, 0, {0.0, 0.0, 0.0}, std::nullopt, r3);
  CHECK_THROWS_AS(two_cluster_bound(in3, false), std::invalid_argument);
}

TEST_CASE("discrete bounds") {
  const MixtureModel m = ortho_3d();
  const Vec x0 = {0.0, 0.0, 0.0};
  const double T = 4.0;

  SamplerSpec det;
  det.kind = SamplerKind::DdimDiscrete;
  det.delta = 0.05;
  const CoupledRun drun = coupled_at(m, 0, 2.0, x0, T, det, 0);
  const BoundInputs din = make_bound_inputs(m, 0, x0, std::nullopt, drun);
  const ConfidenceBound db = discrete_confidence_bound(din, false);
  CHECK(!db.degenerate);
  CHECK(db.bound <= drun.guided.terminal_confidence() + 1e-9);
  CHECK(db.bound > drun.unguided.terminal_confidence());

  SamplerSpec sto;
  sto.kind = SamplerKind::DdpmDiscrete;
  sto.delta = 0.05;
  const CoupledRun srun = coupled_at(m, 0, 2.0, x0, T, sto, 31);
  const BoundInputs sin = make_bound_inputs(m, 0, x0, std::nullopt, srun);
  const ConfidenceBound sb = discrete_confidence_bound(sin, true);
  CHECK(sb.bound <= srun.guided.terminal_confidence() + 1e-9);

  // the stochastic variant rejects coarse grids
  BoundInputs coarse = sin;
  coarse.delta_max = 0.6;
  CHECK_THROWS_AS(discrete_confidence_bound(coarse, true), std::invalid_argument);
  CHECK_NOTHROW(discrete_confidence_bound(coarse, false));

  // two-cluster flavor on the symmetric line
  const MixtureModel m2 = symmetric_1d();
  const CoupledRun run2 = coupled_at(m2, 0, 3.0, {0.0}, T, det, 0);
  const BoundInputs in2 = make_bound_inputs(m2, 0, {0.0}, std::nullopt, run2);
  const ConfidenceBound b2 = discrete_confidence_bound(in2, false, true);
  CHECK(b2.bound <= run2.guided.terminal_confidence() + 1e-9);
  CHECK(b2.bound > run2.unguided.terminal_confidence());
  CHECK_THROWS_AS(discrete_confidence_bound(din, false, true), std::invalid_argument);
}

TEST_CASE("step-size conditions for the discrete entropy comparison") {
  // sup ||mu||^2 = 2, identity covariance
  const MixtureModel m = MixtureModel::isotropic({0.5, 0.5}, {{1.0, 1.0}, {0.0, 0.0}});

  // eta = 1, delta = 0.01: growth 1.01 > 0.01 + 0.02, half 0.04 < 1/2
  const StepConditionReport fine = entropy_step_condition(m, 1.0, Schedule::from_delta(10.0, 0.01));
  CHECK(fine.all_ok);
  CHECK(fine.limiting_eta == doctest::Approx(24.0).epsilon(1e-12));

  // eta = 1, delta = 0.4: growth 1.4 > 1.2 still holds, half 1.6 >= 1/2 fails
  const StepConditionReport coarse = entropy_step_condition(m, 1.0, Schedule::from_delta(10.0, 0.4));
  CHECK(!coarse.all_ok);
  CHECK(coarse.growth_ok[0]);
  CHECK(!coarse.half_ok[0]);

  // eta = 0: both conditions reduce to delta < 1/4
  CHECK(entropy_step_condition(m, 0.0, Schedule::from_delta(10.0, 0.2)).all_ok);
  CHECK(!entropy_step_condition(m, 0.0, Schedule::from_delta(10.0, 0.3)).all_ok);

  // centered single component: no eta dependence at all
  const MixtureModel zero = MixtureModel::isotropic({1.0}, {{0.0, 0.0}});
  const StepConditionReport free_ok = entropy_step_condition(zero, 7.0, Schedule::from_delta(10.0, 0.2));
  CHECK(free_ok.all_ok);
  CHECK(free_ok.limiting_eta == std::numeric_limits<double>::infinity());
  const StepConditionReport free_bad = entropy_step_condition(zero, 7.0, Schedule::from_delta(10.0, 0.3));
  CHECK(!free_bad.all_ok);
  CHECK(free_bad.limiting_eta == -std::numeric_limits<double>::infinity());

  CHECK_THROWS_AS(entropy_step_condition(m, -1.0, Schedule::from_delta(10.0, 0.01)),
                  std::invalid_argument);
}

TEST_CASE("aligned-model projection recursion matches the sampler") {
  const MixtureModel m = aligned_2d();
  const Vec mu = {2.0, 2.0};
  const double T = 10.0, eta = 3.0;
  const Schedule sched = Schedule::from_delta(T, 0.1);
  const PhaseInputs in{mu, eta, T, sched};

  Vec x = {0.7, -0.2};
  double v = mu[0] * x[0] + mu[1] * x[1];
  for (int k = 0; k < sched.steps(); ++k) {
    const Vec xn = step_ddim_discrete(m, 0, eta, x, k, sched);
    const double vn = mu[0] * xn[0] + mu[1] * xn[1];
    // v_{k+1} = -(v_k + h(v_k, k)); the -2v term inside h carries the flip
    const double pred = -(v + phase_h(v, k, in));
    CHECK(std::abs(pred - vn) < 1e-10 * std::max(1.0, std::abs(vn)));
    x = xn;
    v = vn;
  }
}

TEST_CASE("phase map h") {
  const Vec mu = {2.0, 2.0};  // M = 8
  const double T = 10.0;
  const Schedule sched = Schedule::from_delta(T, 0.1);

  const PhaseInputs weak{mu, 1.0, T, sched};
  const int k_late = sched.steps() - 1;  // a = e^{-T + t_k} near 1
  CHECK(phase_h(0.0, k_late, weak) == 0.0);
  CHECK(phase_h(0.0, 0, weak) == 0.0);
  // odd in v
  CHECK(phase_h(1.3, k_late, weak) == doctest::Approx(-phase_h(-1.3, k_late, weak)).epsilon(1e-13));

  // eta = 0 leaves only the -2v term
  const PhaseInputs off{mu, 0.0, T, sched};
  CHECK(phase_h(0.8, k_late, off) == doctest::Approx(-1.6).epsilon(1e-13));
  CHECK(phase_h_derivative(0.8, k_late, off) == doctest::Approx(-2.0).epsilon(1e-13));

  // finite differences confirm the derivative
  const PhaseInputs strong{mu, 50.0, T, sched};
  for (int k : {0, k_late / 2, k_late}) {
    for (double v : {-3.0, -0.5, 0.0, 1.0, 4.0}) {
      const double e = 1e-6;
      const double fd = (phase_h(v + e, k, strong) - phase_h(v - e, k, strong)) / (2.0 * e);
      CHECK(std::abs(fd - phase_h_derivative(v, k, strong)) < 1e-4);
    }
  }

  CHECK_THROWS_AS(phase_h(0.0, -1, weak), std::invalid_argument);
  CHECK_THROWS_AS(phase_h(0.0, sched.steps(), weak), std::invalid_argument);
}

TEST_CASE("phase thresholds and classification") {
  const Vec mu = {2.0, 2.0};  // M = 8
  const double T = 10.0;
  const Schedule coarse = Schedule::from_delta(T, 0.1);
  const Schedule fine = Schedule::from_delta(T, 0.04);

  const PhaseThresholds tc = phase_thresholds({mu, 1.0, T, coarse});
  CHECK(tc.eta0 == doctest::Approx(1.25).epsilon(1e-14));
  const PhaseThresholds tf = phase_thresholds({mu, 1.0, T, fine});
  CHECK(tf.eta0 == doctest::Approx(3.125).epsilon(1e-14));
  CHECK(tc.eta0_prime > 1e3);
  CHECK(tf.eta0_prime > tc.eta0_prime);  // finer grids demand more guidance
  CHECK(!tc.s0.has_value());  // eta below eta0': no splitting window

  CHECK(classify_phase({mu, 1.0, T, coarse}) == PhaseClass::Convergent);
  CHECK(classify_phase({mu, 20.0, T, coarse}) == PhaseClass::Indeterminate);
  CHECK(classify_phase({mu, 2.0 * tc.eta0_prime, T, coarse}) == PhaseClass::Splitting);
  CHECK(std::string(phase_name(PhaseClass::Convergent)) == "convergent");
  CHECK(std::string(phase_name(PhaseClass::Splitting)) == "splitting");
  CHECK(std::string(phase_name(PhaseClass::Indeterminate)) == "indeterminate");

  // above eta0' the window [a, b] exists; h pushes outward below it and
  // inward beyond it at every admissible step
  const PhaseInputs strong{mu, 2.0 * tc.eta0_prime, T, coarse};
  const PhaseThresholds ts = phase_thresholds(strong);
  REQUIRE(ts.s0.has_value());
  REQUIRE(ts.s1.has_value());
  REQUIRE(ts.a.has_value());
  REQUIRE(ts.b_prime.has_value());
  REQUIRE(ts.b.has_value());
  CHECK(*ts.s0 >= 2.0);
  CHECK(*ts.s1 >= 2.0);
  CHECK(*ts.a > 0.0);
  CHECK(*ts.b >= *ts.b_prime);

  std::vector<int> admissible;
  for (int k = 0; k < coarse.steps(); ++k)
    if (std::exp(-T + coarse.knots[k]) >= 0.5) admissible.push_back(k);
  REQUIRE(!admissible.empty());
  for (int k : admissible) {
    for (double f : {0.25, 0.5, 1.0}) CHECK(phase_h(*ts.a * f, k, strong) > 0.0);
    for (double f : {1.001, 2.0, 10.0}) CHECK(phase_h(*ts.b * f, k, strong) < 0.0);
  }

  // contraction below eta0 at every admissible step
  const PhaseInputs weak{mu, 1.0, T, coarse};
  for (int k : admissible) {
    for (double v : {-2.0, -0.3, 0.4, 3.0}) {
      const double h = phase_h(v, k, weak);
      CHECK(h * (v > 0 ? 1.0 : -1.0) < 0.0);
      CHECK(std::abs(v + h) < std::abs(v));
    }
  }

  CHECK_THROWS_AS(phase_thresholds({{}, 1.0, T, coarse}), std::invalid_argument);
  CHECK_THROWS_AS(phase_thresholds({{0.0, 0.0}, 1.0, T, coarse}), std::invalid_argument);
}
