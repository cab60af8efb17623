#include "mixguide/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mixguide/simd/kernels.hpp"

namespace mixguide {

namespace {

[[noreturn]] void fail(const char* op, const std::string& what) {
  throw std::invalid_argument(std::string(op) + ": " + what);
}

void require_horizon(double T, const char* op) {
  if (!std::isfinite(T) || T <= 0.0) fail(op, "horizon must be finite and > 0");
}

bool finite_state(const double* x, int d) {
  for (int i = 0; i < d; ++i) {
    if (!std::isfinite(x[i])) return false;
  }
  return true;
}

[[noreturn]] void blowup(const char* op, int step, double eta) {
  throw std::runtime_error(std::string(op) + ": non-finite state at step " +
                           std::to_string(step) + " (eta=" + std::to_string(eta) + ")");
}

// Coefficient tables resolved once per run; raw pointers stay valid for the
// model's lifetime.
struct GridCoeffs {
  std::vector<const TimeCoeffs*> at_knot;  // tau = T - t_k, k = 0..K
  std::vector<const TimeCoeffs*> at_mid;   // tau = T - t_k - delta_k/2, k = 0..K-1
  const TimeCoeffs* conf = nullptr;        // t = 0, for confidence
};

GridCoeffs build_grid(const MixtureModel& m, const Schedule& s, bool need_mid) {
  GridCoeffs g;
  const int K = s.steps();
  g.at_knot.resize(K + 1);
  for (int k = 0; k <= K; ++k) {
    double tau = s.horizon - s.knots[k];
    if (tau < 0.0 && tau > -1e-12) tau = 0.0;
    g.at_knot[k] = &m.coeffs(tau);
  }
  if (need_mid) {
    g.at_mid.resize(K);
    for (int k = 0; k < K; ++k) {
      double tau = s.horizon - s.knots[k] - 0.5 * s.deltas[k];
      if (tau < 0.0 && tau > -1e-12) tau = 0.0;
      g.at_mid[k] = &m.coeffs(tau);
    }
  }
  g.conf = &m.coeffs(0.0);
  return g;
}

struct Workspace {
  Vec q;             // component posterior buffer
  Vec drift;         // drift accumulator
  Vec k1, k2, k3, xtmp;
  Vec noise;

  explicit Workspace(int d, int C)
      : q(C), drift(d), k1(d), k2(d), k3(d), xtmp(d), noise(d) {}
};

double confidence_of(const GridCoeffs& g, const double* x, int d, int y, Workspace& w) {
  posterior_logits(*g.conf, x, d, w.q.data());
  softmax_inplace(w.q.data(), static_cast<int>(w.q.size()));
  return w.q[y];
}

void eval_drift(const TimeCoeffs& c, bool ddpm, const double* x, int d, int y, double eta,
                Workspace& w, double* out) {
  posterior_logits(c, x, d, w.q.data());
  softmax_inplace(w.q.data(), static_cast<int>(w.q.size()));
  drift_into(c, ddpm, x, d, y, eta, w.q.data(), out);
}

// Advances x across the whole grid. `record` may be null (ensembles).
void drive(const MixtureModel& m, int y, double eta, SamplerKind kind, OdeMethod method,
           const Schedule& s, const GridCoeffs& g, const NoiseTape& tape, std::uint64_t path,
           Vec& x, Trajectory* record, Workspace& w, const char* op) {
  const int d = m.dim();
  const int K = s.steps();
  const bool ddpm = sampler_is_stochastic(kind);
  const bool rk4 = kind == SamplerKind::DdimContinuous && method == OdeMethod::Rk4;

  if (record) {
    record->kind = kind;
    record->label = y;
    record->eta = eta;
    record->horizon = s.horizon;
    record->times = s.knots;
    record->states.assign(K + 1, Vec());
    record->confidence.assign(K + 1, 0.0);
    record->states[0] = x;
    record->confidence[0] = confidence_of(g, x.data(), d, y, w);
  }
  if (!finite_state(x.data(), d)) blowup(op, 0, eta);

  for (int k = 0; k < K; ++k) {
    const double h = s.deltas[k];
    if (rk4) {
      eval_drift(*g.at_knot[k], false, x.data(), d, y, eta, w, w.k1.data());
      simd::combine2(w.xtmp.data(), 1.0, x.data(), 0.0, x.data(), d);
      simd::axpy(w.xtmp.data(), 0.5 * h, w.k1.data(), d);
      eval_drift(*g.at_mid[k], false, w.xtmp.data(), d, y, eta, w, w.k2.data());
      simd::combine2(w.xtmp.data(), 1.0, x.data(), 0.0, x.data(), d);
      simd::axpy(w.xtmp.data(), 0.5 * h, w.k2.data(), d);
      eval_drift(*g.at_mid[k], false, w.xtmp.data(), d, y, eta, w, w.k3.data());
      simd::combine2(w.xtmp.data(), 1.0, x.data(), 0.0, x.data(), d);
      simd::axpy(w.xtmp.data(), h, w.k3.data(), d);
      eval_drift(*g.at_knot[k + 1], false, w.xtmp.data(), d, y, eta, w, w.drift.data());
      // x += h/6 (k1 + 2 k2 + 2 k3 + k4)
      simd::axpy(x.data(), h / 6.0, w.k1.data(), d);
      simd::axpy(x.data(), h / 3.0, w.k2.data(), d);
      simd::axpy(x.data(), h / 3.0, w.k3.data(), d);
      simd::axpy(x.data(), h / 6.0, w.drift.data(), d);
    } else {
      eval_drift(*g.at_knot[k], ddpm, x.data(), d, y, eta, w, w.drift.data());
      simd::axpy(x.data(), h, w.drift.data(), d);
      if (ddpm) {
        tape.fill_step(path, static_cast<std::uint64_t>(k), w.noise.data(), d);
        simd::axpy(x.data(), std::sqrt(2.0 * h), w.noise.data(), d);
      }
    }
    if (!finite_state(x.data(), d)) blowup(op, k + 1, eta);
    if (record) {
      record->states[k + 1] = x;
      record->confidence[k + 1] = confidence_of(g, x.data(), d, y, w);
    }
  }
}

}  // namespace

bool sampler_is_stochastic(SamplerKind k) {
  return k == SamplerKind::DdpmContinuous || k == SamplerKind::DdpmDiscrete;
}

const char* sampler_name(SamplerKind k) {
  switch (k) {
    case SamplerKind::DdimContinuous: return "ddim-cont";
    case SamplerKind::DdpmContinuous: return "ddpm-cont";
    case SamplerKind::DdimDiscrete: return "ddim-disc";
    case SamplerKind::DdpmDiscrete: return "ddpm-disc";
  }
  return "?";
}

std::optional<SamplerKind> sampler_from_name(const std::string& s) {
  if (s == "ddim-cont") return SamplerKind::DdimContinuous;
  if (s == "ddpm-cont") return SamplerKind::DdpmContinuous;
  if (s == "ddim-disc") return SamplerKind::DdimDiscrete;
  if (s == "ddpm-disc") return SamplerKind::DdpmDiscrete;
  return std::nullopt;
}

double Trajectory::max_confidence() const {
  double mx = 0.0;
  for (double c : confidence) mx = std::max(mx, c);
  return mx;
}

Schedule Schedule::uniform(double T, int K) {
  require_horizon(T, "Schedule::uniform");
  if (K < 1) fail("Schedule::uniform", "need at least one step");
  Schedule s;
  s.horizon = T;
  s.knots.resize(K + 1);
  s.deltas.assign(K, T / K);
  for (int k = 0; k <= K; ++k) s.knots[k] = T * k / K;
  s.knots[K] = T;
  return s;
}

Schedule Schedule::from_delta(double T, double delta) {
  require_horizon(T, "Schedule::from_delta");
  if (!std::isfinite(delta) || delta <= 0.0 || delta > T)
    fail("Schedule::from_delta", "step size must lie in (0, T]");
  const int K = static_cast<int>(std::floor(T / delta + 1e-9));
  Schedule s;
  s.horizon = T;
  s.deltas.assign(K, delta);
  s.knots.resize(K + 1);
  for (int k = 0; k <= K; ++k) s.knots[k] = delta * k;
  if (s.knots[K] > T) s.knots[K] = T;
  return s;
}

Schedule Schedule::from_deltas(std::vector<double> deltas, double T) {
  require_horizon(T, "Schedule::from_deltas");
  if (deltas.empty()) fail("Schedule::from_deltas", "need at least one step");
  Schedule s;
  s.horizon = T;
  s.knots.resize(deltas.size() + 1);
  s.knots[0] = 0.0;
  for (std::size_t k = 0; k < deltas.size(); ++k) {
    if (!std::isfinite(deltas[k]) || deltas[k] <= 0.0)
      fail("Schedule::from_deltas", "step sizes must be finite and > 0");
    s.knots[k + 1] = s.knots[k] + deltas[k];
  }
  if (s.knots.back() > T + 1e-12) fail("Schedule::from_deltas", "knots exceed horizon");
  s.deltas = std::move(deltas);
  return s;
}

double Schedule::delta_max() const {
  double mx = 0.0;
  for (double d : deltas) mx = std::max(mx, d);
  return mx;
}

double Schedule::delta_min() const {
  double mn = deltas.empty() ? 0.0 : deltas.front();
  for (double d : deltas) mn = std::min(mn, d);
  return mn;
}

Schedule SamplerSpec::make_schedule(double T) const {
  if (schedule.has_value()) {
    if (std::abs(schedule->horizon - T) > 1e-12)
      fail("SamplerSpec", "explicit schedule horizon disagrees with T");
    return *schedule;
  }
  switch (kind) {
    case SamplerKind::DdimContinuous:
    case SamplerKind::DdpmContinuous:
      return Schedule::uniform(T, substeps);
    case SamplerKind::DdimDiscrete:
    case SamplerKind::DdpmDiscrete:
      return Schedule::from_delta(T, delta);
  }
  fail("SamplerSpec", "unknown sampler kind");
}

Vec step_ddim_discrete(const MixtureModel& m, int y, double eta, const Vec& Xk, int k,
                       const Schedule& sched) {
  const char* op = "step_ddim_discrete";
  require_state(m, Xk, op);
  require_label(m, y, op);
  require_eta(eta, op);
  if (k < 0 || k >= sched.steps()) fail(op, "step index out of range");
  const double tau = sched.horizon - sched.knots[k];
  DriftEval de = guided_drift_ddim(m, Xk, y, eta, tau);
  Vec out(Xk);
  simd::axpy(out.data(), sched.deltas[k], de.drift.data(), m.dim());
  return out;
}

Vec step_ddpm_discrete(const MixtureModel& m, int y, double eta, const Vec& Xk, int k,
                       const Schedule& sched, const Vec& wk) {
  const char* op = "step_ddpm_discrete";
  require_state(m, Xk, op);
  require_label(m, y, op);
  require_eta(eta, op);
  if (k < 0 || k >= sched.steps()) fail(op, "step index out of range");
  if (static_cast<int>(wk.size()) != m.dim()) fail(op, "noise dimension mismatch");
  const double tau = sched.horizon - sched.knots[k];
  DriftEval de = guided_drift_ddpm(m, Xk, y, eta, tau);
  Vec out(Xk);
  simd::axpy(out.data(), sched.deltas[k], de.drift.data(), m.dim());
  simd::axpy(out.data(), std::sqrt(2.0 * sched.deltas[k]), wk.data(), m.dim());
  return out;
}

Trajectory integrate_ddim(const MixtureModel& m, int y, double eta, const Vec& x0, double T,
                          int substeps, OdeMethod method) {
  const char* op = "integrate_ddim";
  require_state(m, x0, op);
  require_label(m, y, op);
  require_eta(eta, op);
  require_horizon(T, op);
  const Schedule s = Schedule::uniform(T, substeps);
  const GridCoeffs g = build_grid(m, s, method == OdeMethod::Rk4);
  Workspace w(m.dim(), m.components());
  Vec x = x0;
  Trajectory traj;
  drive(m, y, eta, SamplerKind::DdimContinuous, method, s, g, NoiseTape::zeros(), 0, x, &traj, w,
        op);
  return traj;
}

Trajectory integrate_ddpm(const MixtureModel& m, int y, double eta, const Vec& x0, double T,
                          const Schedule& sched, const NoiseTape& tape, std::uint64_t path) {
  const char* op = "integrate_ddpm";
  require_state(m, x0, op);
  require_label(m, y, op);
  require_eta(eta, op);
  require_horizon(T, op);
  const GridCoeffs g = build_grid(m, sched, false);
  Workspace w(m.dim(), m.components());
  Vec x = x0;
  Trajectory traj;
  drive(m, y, eta, SamplerKind::DdpmContinuous, OdeMethod::Euler, sched, g, tape, path, x, &traj,
        w, op);
  return traj;
}

Trajectory integrate_ddpm(const MixtureModel& m, int y, double eta, const Vec& x0, double T,
                          int substeps, const NoiseTape& tape, std::uint64_t path) {
  return integrate_ddpm(m, y, eta, x0, T, Schedule::uniform(T, substeps), tape, path);
}

Trajectory run_path(const MixtureModel& m, int y, double eta, const Vec& x0, double T,
                    const SamplerSpec& spec, const NoiseTape& tape, std::uint64_t path) {
  const char* op = "run_path";
  require_state(m, x0, op);
  require_label(m, y, op);
  require_eta(eta, op);
  require_horizon(T, op);
  const Schedule s = spec.make_schedule(T);
  const bool rk4 = spec.kind == SamplerKind::DdimContinuous && spec.method == OdeMethod::Rk4;
  const GridCoeffs g = build_grid(m, s, rk4);
  Workspace w(m.dim(), m.components());
  Vec x = x0;
  Trajectory traj;
  drive(m, y, eta, spec.kind, spec.method, s, g, tape, path, x, &traj, w, op);
  return traj;
}

std::vector<CoupledRun> run_coupled(const MixtureModel& m, int y, const std::vector<double>& etas,
                                    const Vec& x0, double T, const SamplerSpec& spec,
                                    std::uint64_t seed) {
  const char* op = "run_coupled";
  if (etas.empty()) fail(op, "need at least one eta");
  bool has_zero = false;
  for (double e : etas) {
    require_eta(e, op);
    if (e == 0.0) has_zero = true;
  }
  if (!has_zero) fail(op, "etas must include 0 (the unguided baseline)");

  const NoiseTape tape(seed);
  Trajectory baseline = run_path(m, y, 0.0, x0, T, spec, tape, 0);
  std::vector<CoupledRun> out;
  out.reserve(etas.size());
  for (double e : etas) {
    CoupledRun r;
    r.eta = e;
    r.seed = seed;
    r.init = x0;
    r.unguided = baseline;
    r.guided = (e == 0.0) ? baseline : run_path(m, y, e, x0, T, spec, tape, 0);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<Vec> sample_ensemble(const MixtureModel& m, int y, double eta, int n, double T,
                                 const SamplerSpec& spec, const InitLaw& init, std::uint64_t seed) {
  const char* op = "sample_ensemble";
  require_label(m, y, op);
  require_eta(eta, op);
  require_horizon(T, op);
  if (n < 1) fail(op, "need at least one sample");
  if (init.kind == InitLaw::Kind::Point) require_state(m, init.x0, op);

  const Schedule s = spec.make_schedule(T);
  const bool rk4 = spec.kind == SamplerKind::DdimContinuous && spec.method == OdeMethod::Rk4;
  const GridCoeffs g = build_grid(m, s, rk4);
  const NoiseTape tape(seed);
  const int d = m.dim();
  Workspace w(d, m.components());

  std::vector<Vec> out(n);
  Vec x(d);
  for (int i = 0; i < n; ++i) {
    if (init.kind == InitLaw::Kind::Point) {
      x = init.x0;
    } else {
      tape.fill_init(static_cast<std::uint64_t>(i), x.data(), d);
    }
    drive(m, y, eta, spec.kind, spec.method, s, g, tape, static_cast<std::uint64_t>(i), x,
          nullptr, w, op);
    out[i] = x;
  }
  return out;
}

}  // namespace mixguide
