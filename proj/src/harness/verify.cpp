#include "mixguide/harness/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "mixguide/dynamics.hpp"
#include "mixguide/entropy.hpp"
#include "mixguide/harness/config.hpp"
#include "mixguide/harness/csv.hpp"
#include "mixguide/mixture.hpp"
#include "mixguide/rng.hpp"
#include "mixguide/simd/kernels.hpp"
#include "mixguide/theory.hpp"

namespace mixguide::harness {

namespace {

using GradFn = Vec (*)(const MixtureModel&, const Vec&, int, double);

Vec flipped_classifier_gradient(const MixtureModel& m, const Vec& x, int y, double t) {
  Vec g = classifier_gradient(m, x, y, t);
  for (double& v : g) v = -v;
  return g;
}

struct Ctx {
  std::uint64_t seed = 0;
  GradFn clsgrad = &classifier_gradient;
};

// Deterministic scenario randomness, one tape path per draw.
class Draws {
 public:
  explicit Draws(std::uint64_t seed) : tape_(seed) {}

  Vec gaussians(int d) {
    Vec v(d);
    tape_.fill_init(next_++, v.data(), d);
    return v;
  }

 private:
  NoiseTape tape_;
  std::uint64_t next_ = 0;
};

Vec unit_sphere(Draws& dr, int d) {
  for (;;) {
    Vec v = dr.gaussians(d);
    const double n = std::sqrt(simd::dot(v.data(), v.data(), d));
    if (n > 1e-6) {
      for (double& x : v) x /= n;
      return v;
    }
  }
}

// Unit-sphere means resampled until the near-orthogonality premise holds for
// the guided label.
MixtureModel random_near_orthogonal_model(Draws& dr, int d, int C, int y) {
  const Vec zero(d, 0.0);
  for (int attempt = 0; attempt < 500; ++attempt) {
    std::vector<Vec> means;
    means.reserve(C);
    for (int c = 0; c < C; ++c) means.push_back(unit_sphere(dr, d));
    MixtureModel m =
        MixtureModel::isotropic(std::vector<double>(C, 1.0 / C), std::move(means));
    if (check_assumption1(m, y, zero).satisfied()) return m;
  }
  throw std::runtime_error("could not sample a near-orthogonal mean set");
}

MixtureModel symmetric_1d() {
  return MixtureModel::isotropic({0.5, 0.5}, {{1.0}, {-1.0}});
}

std::string fmt(double v) { return format_double(v); }

double rel_err(const Vec& got, const Vec& want) {
  double scale = 1.0, err = 0.0;
  for (double w : want) scale = std::max(scale, std::abs(w));
  for (std::size_t i = 0; i < got.size(); ++i) err = std::max(err, std::abs(got[i] - want[i]));
  return err / scale;
}

struct Check {
  const char* name;
  const char* thm;
  std::function<bool(const Ctx&, std::string&)> run;
};

// --- gradient oracles -------------------------------------------------------

bool check_gradient_oracle(const Ctx& ctx, std::string& detail) {
  Draws dr(ctx.seed ^ 0x11);
  const int d = 4, C = 3, y = 0;
  const MixtureModel m = random_near_orthogonal_model(dr, d, C, y);
  const double h = 1e-5;
  double worst = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    Vec x = dr.gaussians(d);
    for (double& v : x) v *= 1.5;
    const double t = rep % 2 == 0 ? 0.3 : 1.7;

    Vec fd_cond(d), fd_cls(d), fd_marg(d);
    for (int i = 0; i < d; ++i) {
      Vec xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      fd_cond[i] =
          (marginal_log_density(m, xp, t, y) - marginal_log_density(m, xm, t, y)) / (2 * h);
      fd_cls[i] = (std::log(posterior(m, xp, t)[y]) - std::log(posterior(m, xm, t)[y])) / (2 * h);
      fd_marg[i] = (marginal_log_density(m, xp, t) - marginal_log_density(m, xm, t)) / (2 * h);
    }
    worst = std::max(worst, rel_err(conditional_score(m, x, y, t), fd_cond));
    worst = std::max(worst, rel_err(ctx.clsgrad(m, x, y, t), fd_cls));
    worst = std::max(worst, rel_err(marginal_score(m, x, t), fd_marg));
  }
  detail = "max rel err " + fmt(worst);
  return worst < 1e-6;
}

// --- confidence dominance and bounds ----------------------------------------

bool dominates(const CoupledRun& run, double slack, double& worst_gap) {
  bool ok = true;
  for (std::size_t k = 0; k < run.guided.confidence.size(); ++k) {
    const double gap = run.guided.confidence[k] - run.unguided.confidence[k];
    worst_gap = std::min(worst_gap, gap);
    ok = ok && gap >= -slack;
  }
  return ok;
}

struct DominanceScenario {
  MixtureModel model;
  int label;
  Vec x0;
  Vec center;
};

std::vector<DominanceScenario> dominance_scenarios(const Ctx& ctx) {
  Draws dr(ctx.seed ^ 0x22);
  std::vector<DominanceScenario> out;
  const int d = 8, y = 0;
  MixtureModel m = random_near_orthogonal_model(dr, d, 3, y);
  Vec x0 = dr.gaussians(d);
  for (double& v : x0) v *= 0.5;
  out.push_back({std::move(m), y, std::move(x0), Vec(d, 0.0)});
  out.push_back({symmetric_1d(), 0, Vec{0.0}, Vec{0.0}});
  return out;
}

bool check_ddim_dominance(const Ctx& ctx, std::string& detail) {
  double worst = 1.0;
  bool ok = true;
  SamplerSpec spec;
  spec.kind = SamplerKind::DdimContinuous;
  spec.substeps = 200;
  for (const auto& sc : dominance_scenarios(ctx)) {
    const auto runs =
        run_coupled(sc.model, sc.label, {0.0, 1.0, 4.0}, sc.x0, 10.0, spec, ctx.seed);
    for (const auto& run : runs) ok = dominates(run, 1e-8, worst) && ok;
  }
  detail = "min confidence gap " + fmt(worst);
  return ok;
}

bool check_ddim_bound(const Ctx& ctx, std::string& detail) {
  bool ok = true;
  double worst_margin = 1.0;
  SamplerSpec spec;
  spec.kind = SamplerKind::DdimContinuous;
  spec.substeps = 200;
  for (const auto& sc : dominance_scenarios(ctx)) {
    const auto runs =
        run_coupled(sc.model, sc.label, {0.0, 1.0, 4.0}, sc.x0, 10.0, spec, ctx.seed);
    for (const auto& run : runs) {
      if (run.eta == 0.0) continue;
      const BoundInputs in =
          make_bound_inputs(sc.model, sc.label, sc.center, std::nullopt, run);
      const ConfidenceBound b = sc.model.components() == 2 ? two_cluster_bound(in, false)
                                                          : ddim_confidence_bound(in);
      const double margin = run.guided.terminal_confidence() - b.bound;
      worst_margin = std::min(worst_margin, margin);
      ok = ok && margin >= -1e-6 && b.bound >= 0.0 && b.bound <= 1.0;
    }
  }
  detail = "min observed minus bound " + fmt(worst_margin);
  return ok;
}

bool check_ddpm_dominance(const Ctx& ctx, std::string& detail) {
  double worst = 1.0;
  bool ok = true;
  SamplerSpec spec;
  spec.kind = SamplerKind::DdpmContinuous;
  spec.substeps = 300;
  for (const auto& sc : dominance_scenarios(ctx)) {
    for (std::uint64_t s = 1; s <= 5; ++s) {
      const auto runs =
          run_coupled(sc.model, sc.label, {0.0, 1.0, 4.0}, sc.x0, 10.0, spec, ctx.seed + s);
      for (const auto& run : runs) ok = dominates(run, 1e-8, worst) && ok;
    }
  }
  detail = "min confidence gap over 5 tapes " + fmt(worst);
  return ok;
}

bool check_ddpm_bound(const Ctx& ctx, std::string& detail) {
  bool ok = true;
  double worst_margin = 1.0;
  SamplerSpec spec;
  spec.kind = SamplerKind::DdpmContinuous;
  spec.substeps = 300;
  for (const auto& sc : dominance_scenarios(ctx)) {
    for (std::uint64_t s = 1; s <= 5; ++s) {
      const auto runs =
          run_coupled(sc.model, sc.label, {0.0, 1.0, 4.0}, sc.x0, 10.0, spec, ctx.seed + s);
      for (const auto& run : runs) {
        if (run.eta == 0.0) continue;
        const BoundInputs in =
            make_bound_inputs(sc.model, sc.label, sc.center, std::nullopt, run);
        const ConfidenceBound b = sc.model.components() == 2 ? two_cluster_bound(in, true)
                                                             : ddpm_confidence_bound(in);
        const double margin = run.guided.terminal_confidence() - b.bound;
        worst_margin = std::min(worst_margin, margin);
        ok = ok && margin >= -1e-6 && b.bound >= 0.0 && b.bound <= 1.0;
      }
    }
  }
  detail = "min observed minus bound " + fmt(worst_margin);
  return ok;
}

bool check_two_cluster_ddim(const Ctx& ctx, std::string& detail) {
  const MixtureModel m = symmetric_1d();
  SamplerSpec spec;
  spec.kind = SamplerKind::DdimContinuous;
  spec.substeps = 300;
  const auto runs = run_coupled(m, 0, {0.0, 1.0, 4.0}, {0.0}, 10.0, spec, ctx.seed);
  bool ok = true;
  double worst_gap = 1.0, worst_margin = 1.0;
  for (const auto& run : runs) {
    ok = dominates(run, 1e-8, worst_gap) && ok;
    if (run.eta == 0.0) continue;
    const BoundInputs in = make_bound_inputs(m, 0, {0.0}, std::nullopt, run);
    const ConfidenceBound b = two_cluster_bound(in, false);
    const double margin = run.guided.terminal_confidence() - b.bound;
    worst_margin = std::min(worst_margin, margin);
    ok = ok && margin >= -1e-6;
  }
  detail = "min gap " + fmt(worst_gap) + ", min margin " + fmt(worst_margin);
  return ok;
}

bool check_two_cluster_ddpm(const Ctx& ctx, std::string& detail) {
  const MixtureModel m = symmetric_1d();
  SamplerSpec spec;
  spec.kind = SamplerKind::DdpmContinuous;
  spec.substeps = 300;
  bool ok = true;
  double worst_gap = 1.0, worst_margin = 1.0;
  for (std::uint64_t s = 1; s <= 4; ++s) {
    const auto runs = run_coupled(m, 0, {0.0, 1.0, 4.0}, {0.0}, 10.0, spec, ctx.seed + s);
    for (const auto& run : runs) {
      ok = dominates(run, 1e-8, worst_gap) && ok;
      if (run.eta == 0.0) continue;
      const BoundInputs in = make_bound_inputs(m, 0, {0.0}, std::nullopt, run);
      const ConfidenceBound b = two_cluster_bound(in, true);
      const double margin = run.guided.terminal_confidence() - b.bound;
      worst_margin = std::min(worst_margin, margin);
      ok = ok && margin >= -1e-6;
    }
  }
  detail = "min gap " + fmt(worst_gap) + ", min margin " + fmt(worst_margin);
  return ok;
}

bool check_discrete_ddim(const Ctx& ctx, std::string& detail) {
  bool ok = true;
  double worst_gap = 1.0, worst_margin = 1.0;
  SamplerSpec spec;
  spec.kind = SamplerKind::DdimDiscrete;
  spec.delta = 0.05;
  for (const auto& sc : dominance_scenarios(ctx)) {
    const auto runs =
        run_coupled(sc.model, sc.label, {0.0, 1.0, 4.0}, sc.x0, 10.0, spec, ctx.seed);
    for (const auto& run : runs) {
      ok = dominates(run, 1e-8, worst_gap) && ok;
      if (run.eta == 0.0) continue;
      const BoundInputs in =
          make_bound_inputs(sc.model, sc.label, sc.center, std::nullopt, run);
      const ConfidenceBound b =
          discrete_confidence_bound(in, false, sc.model.components() == 2);
      const double margin = run.guided.terminal_confidence() - b.bound;
      worst_margin = std::min(worst_margin, margin);
      ok = ok && margin >= -1e-6;
    }
  }
  detail = "min gap " + fmt(worst_gap) + ", min margin " + fmt(worst_margin);
  return ok;
}

bool check_discrete_ddpm(const Ctx& ctx, std::string& detail) {
  bool ok = true;
  double worst_gap = 1.0, worst_margin = 1.0;
  SamplerSpec spec;
  spec.kind = SamplerKind::DdpmDiscrete;
  spec.delta = 0.05;
  for (const auto& sc : dominance_scenarios(ctx)) {
    for (std::uint64_t s = 1; s <= 4; ++s) {
      const auto runs =
          run_coupled(sc.model, sc.label, {0.0, 1.0, 4.0}, sc.x0, 10.0, spec, ctx.seed + s);
      for (const auto& run : runs) {
        ok = dominates(run, 1e-8, worst_gap) && ok;
        if (run.eta == 0.0) continue;
        const BoundInputs in =
            make_bound_inputs(sc.model, sc.label, sc.center, std::nullopt, run);
        const ConfidenceBound b =
            discrete_confidence_bound(in, true, sc.model.components() == 2);
        const double margin = run.guided.terminal_confidence() - b.bound;
        worst_margin = std::min(worst_margin, margin);
        ok = ok && margin >= -1e-6;
      }
    }
  }
  detail = "min gap " + fmt(worst_gap) + ", min margin " + fmt(worst_margin);
  return ok;
}

// --- entropy ----------------------------------------------------------------

EntropyEstimate spacing_of_terminals(const MixtureModel& m, double eta, int n,
                                     const SamplerSpec& spec, std::uint64_t seed) {
  const auto xs = sample_ensemble(m, 0, eta, n, 10.0, spec, InitLaw::gaussian(), seed);
  std::vector<double> v(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) v[i] = xs[i][0];
  return spacing_entropy_1d(v);
}

bool check_entropy_reduction(const Ctx& ctx, std::string& detail) {
  const MixtureModel m = symmetric_1d();
  SamplerSpec spec;
  spec.kind = SamplerKind::DdimContinuous;
  spec.substeps = 200;
  const EntropyEstimate h0 = spacing_of_terminals(m, 0.0, 2000, spec, ctx.seed);
  const EntropyEstimate h8 = spacing_of_terminals(m, 8.0, 2000, spec, ctx.seed);
  const double drop = h0.value - h8.value;
  const double err = std::hypot(h0.stderr_proxy, h8.stderr_proxy);
  detail = "entropy drop " + fmt(drop) + " vs stderr " + fmt(err);
  return drop > err;
}

bool check_estimator_calibration(const Ctx& ctx, std::string& detail) {
  NoiseTape tape(ctx.seed ^ 0x33);
  const double h1 = 1.4189385332046727;  // (1/2) log(2 pi e)
  std::vector<double> u(4000);
  for (std::size_t i = 0; i < u.size(); ++i) {
    double z;
    tape.fill_init(i, &z, 1);
    u[i] = z;
  }
  const double e_spacing = std::abs(spacing_entropy_1d(u).value - h1);

  std::vector<Vec> xy(1200, Vec(2));
  for (std::size_t i = 0; i < xy.size(); ++i) tape.fill_init(10000 + i, xy[i].data(), 2);
  const double e_knn = std::abs(knn_entropy(xy, 3).value - 2 * h1);

  std::vector<Vec> u2(4000, Vec(1));
  for (std::size_t i = 0; i < u2.size(); ++i) u2[i][0] = u[i];
  const double e_kde = std::abs(kde_mc_entropy(u2).value - h1);

  detail = "abs errs: spacing " + fmt(e_spacing) + ", knn " + fmt(e_knn) + ", kde " + fmt(e_kde);
  return e_spacing < 0.08 && e_knn < 0.15 && e_kde < 0.15;
}

bool check_step_condition(const Ctx&, std::string& detail) {
  const MixtureModel m = MixtureModel::isotropic({0.5, 0.5}, {{1.0, 1.0}, {0.0, 0.0}});
  // sup ||mu||^2 = 2, Sigma = I: with eta 1, delta 0.01 both conditions hold;
  // delta 0.4 breaks the half condition (0.4+0.4+0.8 >= 1/2); with eta 0 both
  // hold exactly when delta < 1/4.
  const auto r1 = entropy_step_condition(m, 1.0, Schedule::from_delta(10.0, 0.01));
  const auto r2 = entropy_step_condition(m, 1.0, Schedule::from_delta(10.0, 0.4));
  const auto r3a = entropy_step_condition(m, 0.0, Schedule::from_delta(10.0, 0.2));
  const auto r3b = entropy_step_condition(m, 0.0, Schedule::from_delta(10.0, 0.3));
  bool ok = r1.all_ok;
  ok = ok && !r2.all_ok && r2.growth_ok[0] && !r2.half_ok[0];
  ok = ok && r3a.all_ok && !r3b.all_ok;
  detail = "limiting eta at delta 0.01: " + fmt(r1.limiting_eta);
  return ok;
}

bool check_discrete_entropy(const Ctx& ctx, std::string& detail) {
  const MixtureModel m = symmetric_1d();
  SamplerSpec spec;
  spec.kind = SamplerKind::DdimDiscrete;
  spec.delta = 0.05;
  const auto cond = entropy_step_condition(m, 1.0, Schedule::from_delta(10.0, 0.05));
  if (!cond.all_ok) {
    detail = "step condition unexpectedly failed";
    return false;
  }
  const EntropyEstimate h0 = spacing_of_terminals(m, 0.0, 1500, spec, ctx.seed);
  const EntropyEstimate h1 = spacing_of_terminals(m, 1.0, 1500, spec, ctx.seed);
  const double err = std::hypot(h0.stderr_proxy, h1.stderr_proxy);
  detail = "guided " + fmt(h1.value) + " vs unguided " + fmt(h0.value);
  return h1.value <= h0.value + 3.0 * err;
}

// --- phase ------------------------------------------------------------------

bool check_phase(const Ctx&, std::string& detail) {
  const Vec mu = {2.0, 2.0};
  const double T = 10.0;
  const Schedule sched = Schedule::from_delta(T, 0.1);
  const Schedule fine = Schedule::from_delta(T, 0.04);

  const PhaseThresholds t1 = phase_thresholds({mu, 1.0, T, sched});
  const PhaseThresholds t2 = phase_thresholds({mu, 1.0, T, fine});
  bool ok = std::abs(t1.eta0 - 1.25) < 1e-12 && std::abs(t2.eta0 - 3.125) < 1e-12;

  std::vector<int> admissible;
  for (int k = 0; k < sched.steps(); ++k)
    if (std::exp(-T + sched.knots[k]) >= 0.5) admissible.push_back(k);
  ok = ok && !admissible.empty();

  // weak guidance contracts towards zero
  const PhaseInputs weak{mu, 1.0, T, sched};
  ok = ok && classify_phase(weak) == PhaseClass::Convergent;
  for (int k : admissible) {
    for (int i = -50; i <= 50; ++i) {
      if (i == 0) continue;
      const double v = i / 5.0;
      const double h = phase_h(v, k, weak);
      ok = ok && h * (v > 0 ? 1.0 : -1.0) < 0.0;
      ok = ok && std::abs(v + h) < std::abs(v);
    }
  }

  // strong guidance grows small |v| and shrinks large |v|
  const PhaseInputs strong{mu, 2.0 * t1.eta0_prime, T, sched};
  const PhaseThresholds ts = phase_thresholds(strong);
  ok = ok && classify_phase(strong) == PhaseClass::Splitting;
  ok = ok && ts.a.has_value() && ts.b.has_value();
  if (ts.a && ts.b) {
    for (int k : admissible) {
      for (double f : {0.25, 0.5, 1.0}) ok = ok && phase_h(*ts.a * f, k, strong) > 0.0;
      for (double f : {1.001, 2.0, 10.0}) ok = ok && phase_h(*ts.b * f, k, strong) < 0.0;
    }
    detail = "eta0 " + fmt(t1.eta0) + ", eta0' " + fmt(t1.eta0_prime) + ", a " + fmt(*ts.a) +
             ", b " + fmt(*ts.b);
  } else {
    detail = "thresholds missing at eta 2 eta0'";
  }
  return ok;
}

}  // namespace

int cmd_verify(const VerifyOptions& opt, std::ostream& os) {
  Ctx ctx;
  ctx.seed = opt.seed;
  if (opt.mutate.empty()) {
    ctx.clsgrad = &classifier_gradient;
  } else if (opt.mutate == "classifier-gradient-sign") {
    ctx.clsgrad = &flipped_classifier_gradient;
  } else {
    throw ConfigError("unknown --mutate fixture \"" + opt.mutate +
                      "\" (classifier-gradient-sign)");
  }

  const Check checks[] = {
      {"gradient-oracle", "Thm 3.1", check_gradient_oracle},
      {"ddim-dominance", "Thm 3.1", check_ddim_dominance},
      {"ddim-bound", "Thm 3.2", check_ddim_bound},
      {"ddpm-dominance", "Thm 3.3", check_ddpm_dominance},
      {"ddpm-bound", "Thm 3.4", check_ddpm_bound},
      {"two-cluster-ddim", "Thm 3.7", check_two_cluster_ddim},
      {"two-cluster-ddpm", "Thm 3.8", check_two_cluster_ddpm},
      {"entropy-reduction", "Thm 4.2", check_entropy_reduction},
      {"estimator-calibration", "Thm 4.2", check_estimator_calibration},
      {"discrete-ddim", "Thm 5.1", check_discrete_ddim},
      {"step-condition", "Thm 5.2", check_step_condition},
      {"discrete-entropy", "Thm 5.2", check_discrete_entropy},
      {"discrete-ddpm", "Thm 5.3", check_discrete_ddpm},
      {"phase-transition", "Prop 6.1/Lemma C.3", check_phase},
  };

  int failures = 0;
  for (const Check& c : checks) {
    std::string detail;
    bool pass = false;
    try {
      pass = c.run(ctx, detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    if (!pass) ++failures;
    os << (pass ? "[PASS] " : "[FAIL] ") << c.name << " (" << c.thm << ")"
       << (detail.empty() ? "" : ": " + detail) << "\n";
  }
  os << "verify: " << (sizeof(checks) / sizeof(checks[0])) << " checks, " << failures
     << " failure" << (failures == 1 ? "" : "s") << "\n";
  return failures == 0 ? 0 : 1;
}

}  // namespace mixguide::harness
