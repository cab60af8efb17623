#include "mixguide/theory.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

#include "mixguide/simd/kernels.hpp"

namespace mixguide {

namespace {

[[noreturn]] void fail(const char* op, const std::string& what) {
  throw std::invalid_argument(std::string(op) + ": " + what);
}

double logistic(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// sup{u >= 0 : u < rhs(u)} for continuous non-increasing rhs; the unique
// root of rhs(u) - u when rhs(0) > 0, else 0.
double solve_u_star(const std::function<double(double)>& rhs) {
  const double g0 = rhs(0.0);
  if (!(g0 > 0.0)) return 0.0;
  double hi = std::max(1.0, 2.0 * g0);
  for (int i = 0; i < 200 && rhs(hi) > hi; ++i) hi *= 2.0;
  double lo = 0.0;
  for (int i = 0; i < 200 && hi - lo > 1e-12 * std::max(1.0, hi); ++i) {
    const double mid = 0.5 * (lo + hi);
    if (rhs(mid) > mid) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

void require_inputs(const BoundInputs& in, const char* op) {
  if (!(in.horizon > 0.0) || !std::isfinite(in.horizon)) fail(op, "horizon must be > 0");
  if (!(in.eta >= 0.0) || !std::isfinite(in.eta)) fail(op, "eta must be >= 0");
  if (!(in.max_unguided_conf >= 0.0 && in.max_unguided_conf <= 1.0))
    fail(op, "max unguided confidence must lie in [0,1]");
  if (!(in.terminal_unguided_conf >= 0.0 && in.terminal_unguided_conf <= 1.0))
    fail(op, "terminal unguided confidence must lie in [0,1]");
}

ConfidenceBound degenerate_bound(const BoundInputs& in) {
  ConfidenceBound b;
  b.u_star = 0.0;
  b.bound = in.terminal_unguided_conf;
  b.degenerate = true;
  return b;
}

}  // namespace

double residual_mass(double p, double u) {
  if (p <= 0.0) return 1.0;
  if (p >= 1.0) return 0.0;
  const double z = std::log(p / (1.0 - p)) + u;
  return logistic(-z);
}

double logit_shift(double p, double u) {
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return 1.0;
  return logistic(std::log(p / (1.0 - p)) + u);
}

BoundInputs make_bound_inputs(const MixtureModel& m, int y, const Vec& mu0,
                              std::optional<double> epsilon, const CoupledRun& run) {
  const char* op = "make_bound_inputs";
  require_label(m, y, op);
  if (static_cast<int>(mu0.size()) != m.dim()) fail(op, "center dimension mismatch");
  const int C = m.components();
  const int d = m.dim();

  BoundInputs in;
  in.components = C;
  in.eta = run.eta;
  in.horizon = run.guided.horizon;

  const auto& w = m.weights();
  double min_other_w = std::numeric_limits<double>::infinity();
  for (int yy = 0; yy < C; ++yy) {
    if (yy != y) min_other_w = std::min(min_other_w, w[yy]);
  }
  in.xi_w = (C > 1) ? 1.0 - w[y] / (w[y] + min_other_w) : 0.0;

  const auto& mus = m.means();
  const double norm_y = simd::dot(mus[y].data(), mus[y].data(), d);
  double Delta = 0.0;
  for (int yy = 0; yy < C; ++yy) {
    const double norm_yy = simd::dot(mus[yy].data(), mus[yy].data(), d);
    Delta = std::max(Delta, std::abs(norm_y - norm_yy));
  }
  in.Delta = Delta;

  const Assumption1Report rep = check_assumption1(m, y, mu0, epsilon);
  in.mu_gap_sq = rep.mu_gap_sq;
  in.epsilon = rep.epsilon;

  Vec diff(d);
  const Vec& x0 = run.guided.states.front();
  const Vec& z0 = run.unguided.states.front();
  double init_gap = (C > 1) ? std::numeric_limits<double>::infinity() : 0.0;
  for (int yy = 0; yy < C; ++yy) {
    if (yy == y) continue;
    double g = 0.0;
    for (int i = 0; i < d; ++i) g += (x0[i] - z0[i]) * (mus[y][i] - mus[yy][i]);
    init_gap = std::min(init_gap, g);
  }
  in.init_gap = init_gap;

  in.max_unguided_conf = run.unguided.max_confidence();
  in.terminal_unguided_conf = run.unguided.terminal_confidence();

  double dmax = 0.0;
  const auto& times = run.guided.times;
  for (std::size_t k = 0; k + 1 < times.size(); ++k)
    dmax = std::max(dmax, times[k + 1] - times[k]);
  in.delta_max = dmax;

  if (C == 2) {
    const int other = 1 - y;
    double half_sq = 0.0;
    for (int i = 0; i < d; ++i) {
      const double h = 0.5 * (mus[y][i] - mus[other][i]);
      half_sq += h * h;
    }
    in.mu_half_sq = half_sq;
    const double n_other = simd::dot(mus[other].data(), mus[other].data(), d);
    in.Delta1 = std::abs(norm_y - n_other);
    in.w_other = w[other];
  }
  return in;
}

ConfidenceBound ddim_confidence_bound(const BoundInputs& in) {
  const char* op = "ddim_confidence_bound";
  require_inputs(in, op);
  const double coef = (1.0 - std::exp(-in.horizon)) * in.eta * std::exp(-in.Delta / 8.0) *
                      (in.mu_gap_sq - 3.0 * in.epsilon);
  if (coef <= 0.0 && in.init_gap <= 0.0) return degenerate_bound(in);
  const double p = in.max_unguided_conf;
  const double cap = in.xi_w;
  ConfidenceBound b;
  b.u_star = solve_u_star([&](double u) {
    return in.init_gap + std::max(coef, 0.0) * std::min(residual_mass(p, u), cap);
  });
  b.bound = logit_shift(in.terminal_unguided_conf, b.u_star);
  b.degenerate = coef <= 0.0;
  return b;
}

ConfidenceBound ddpm_confidence_bound(const BoundInputs& in) {
  const char* op = "ddpm_confidence_bound";
  require_inputs(in, op);
  const double eT = std::exp(in.horizon);
  const double coef = in.eta * (1.0 - std::exp(-2.0 * in.horizon)) *
                      std::exp(-in.Delta / 8.0) * (in.mu_gap_sq - 3.0 * in.epsilon);
  const double gap = std::exp(-in.horizon) * in.init_gap;
  if (coef <= 0.0 && gap <= 0.0) return degenerate_bound(in);
  const double p = in.max_unguided_conf;
  const double cap = in.xi_w;
  ConfidenceBound b;
  b.u_star = solve_u_star([&](double u) {
    return gap + std::max(coef, 0.0) * std::min(residual_mass(p, eT * u), cap);
  });
  b.bound = logit_shift(in.terminal_unguided_conf, b.u_star);
  b.degenerate = coef <= 0.0;
  return b;
}

ConfidenceBound two_cluster_bound(const BoundInputs& in, bool stochastic) {
  const char* op = "two_cluster_bound";
  require_inputs(in, op);
  if (in.components != 2) fail(op, "two-cluster bound needs a two-component model");
  const double T = in.horizon;
  const double shrink = stochastic ? (1.0 - std::exp(-2.0 * T)) : (1.0 - std::exp(-T));
  const double coef = 4.0 * in.eta * std::exp(-in.Delta1 / 8.0) * in.mu_half_sq * shrink;
  const double gap = (stochastic ? std::exp(-T) : 1.0) * in.init_gap;
  if (coef <= 0.0 && gap <= 0.0) return degenerate_bound(in);
  const double p = in.max_unguided_conf;
  const double cap = in.w_other;
  const double scale = stochastic ? std::exp(T) : 1.0;
  ConfidenceBound b;
  b.u_star = solve_u_star([&](double u) {
    return gap + std::max(coef, 0.0) * std::min(residual_mass(p, scale * u), cap);
  });
  b.bound = logit_shift(in.terminal_unguided_conf, b.u_star);
  b.degenerate = coef <= 0.0;
  return b;
}

ConfidenceBound discrete_confidence_bound(const BoundInputs& in, bool stochastic,
                                          bool two_cluster) {
  const char* op = "discrete_confidence_bound";
  require_inputs(in, op);
  if (!(in.delta_max > 0.0)) fail(op, "discrete bound needs delta_max > 0");
  if (two_cluster && in.components != 2) fail(op, "two-cluster bound needs two components");
  if (stochastic && in.delta_max > 0.5) fail(op, "stochastic variant requires delta_max <= 1/2");

  const double T = in.horizon;
  const double geom = two_cluster ? 4.0 * in.mu_half_sq : (in.mu_gap_sq - 3.0 * in.epsilon);
  const double sep = std::exp(-(two_cluster ? in.Delta1 : in.Delta) / 8.0);
  const double cap = two_cluster ? in.w_other : in.xi_w;
  const double p = in.max_unguided_conf;

  double coef, gap, final_scale;
  if (stochastic) {
    coef = in.eta * sep * (std::exp(-T) - std::exp(-3.0 * T)) * geom;
    gap = std::exp(-T - in.delta_max) * in.init_gap;
    final_scale = std::exp(-2.0 * T);
  } else {
    coef = std::exp(-in.delta_max) * (1.0 - std::exp(-T)) * in.eta * sep * geom;
    gap = in.init_gap;
    final_scale = 1.0;
  }
  if (coef <= 0.0 && gap <= 0.0) return degenerate_bound(in);

  ConfidenceBound b;
  b.u_star = solve_u_star([&](double u) {
    return gap + std::max(coef, 0.0) * std::min(residual_mass(p, u), cap);
  });
  b.bound = logit_shift(in.terminal_unguided_conf, final_scale * b.u_star);
  b.degenerate = coef <= 0.0;
  return b;
}

StepConditionReport entropy_step_condition(const MixtureModel& m, double eta,
                                           const Schedule& sched) {
  require_eta(eta, "entropy_step_condition");
  StepConditionReport rep;
  const double s1 = std::min(m.sigma_min(), 1.0);
  const double s2 = std::min(m.sigma_min() * m.sigma_min(), 1.0);
  const double B = m.max_mean_sq_norm();
  const int K = sched.steps();
  rep.growth_ok.resize(K);
  rep.half_ok.resize(K);
  rep.all_ok = true;
  double limiting = std::numeric_limits<double>::infinity();
  for (int k = 0; k < K; ++k) {
    const double dk = sched.deltas[k];
    const double eta_term = dk * eta * B / s2;
    rep.growth_ok[k] = 1.0 + dk > dk / s1 + eta_term;
    rep.half_ok[k] = dk + dk / s1 + eta_term < 0.5;
    rep.all_ok = rep.all_ok && rep.growth_ok[k] && rep.half_ok[k];
    if (B > 0.0) {
      const double cap_growth = (1.0 + dk - dk / s1) * s2 / (dk * B);
      const double cap_half = (0.5 - dk - dk / s1) * s2 / (dk * B);
      limiting = std::min(limiting, std::min(cap_growth, cap_half));
    } else if (!(1.0 + dk > dk / s1) || !(dk + dk / s1 < 0.5)) {
      limiting = -std::numeric_limits<double>::infinity();
    }
  }
  rep.limiting_eta = limiting;
  return rep;
}

namespace {

struct PhaseGeometry {
  double M = 0.0;         // ||mu||^2
  double T = 0.0;
  std::vector<int> admissible;  // steps with e^{-T + t_k} >= 1/2
  double alpha_min = 0.0, alpha_max = 0.0;
};

PhaseGeometry phase_geometry(const PhaseInputs& in, const char* op) {
  if (in.mu.empty()) fail(op, "mu must be nonempty");
  if (!(in.horizon > 0.0)) fail(op, "horizon must be > 0");
  require_eta(in.eta, op);
  PhaseGeometry g;
  g.M = simd::dot(in.mu.data(), in.mu.data(), in.mu.size());
  if (!(g.M > 0.0)) fail(op, "mu must be nonzero");
  g.T = in.horizon;
  const int K = in.schedule.steps();
  if (K < 1) fail(op, "schedule must have at least one step");
  double amin = std::numeric_limits<double>::infinity(), amax = 0.0;
  for (int k = 0; k < K; ++k) {
    const double a = std::exp(-g.T + in.schedule.knots[k]);
    if (a >= 0.5) {
      g.admissible.push_back(k);
      amin = std::min(amin, a);
      amax = std::max(amax, a);
    }
  }
  g.alpha_min = amin;
  g.alpha_max = amax;
  return g;
}

// (e^s - e^{-s}) / (e^{logD} + e^s + e^{-s}), overflow-safe
double tanh_like(double s, double logD) {
  const double as = std::abs(s);
  const double num = 1.0 - std::exp(-2.0 * as);
  const double den = std::exp(logD - as) + 1.0 + std::exp(-2.0 * as);
  const double r = num / den;
  return s < 0.0 ? -r : r;
}

// [e^{logD}(e^s + e^{-s}) + 4] / (e^{logD} + e^s + e^{-s})^2, overflow-safe
double tanh_like_derivative(double s, double logD) {
  const double as = std::abs(s);
  const double num =
      std::exp(logD - as) + std::exp(logD - 3.0 * as) + 4.0 * std::exp(-2.0 * as);
  const double den = std::exp(logD - as) + 1.0 + std::exp(-2.0 * as);
  return num / (den * den);
}

}  // namespace

double phase_h(double v, int k, const PhaseInputs& in) {
  const char* op = "phase_h";
  if (k < 0 || k >= in.schedule.steps()) fail(op, "step index out of range");
  const double M = simd::dot(in.mu.data(), in.mu.data(), in.mu.size());
  const double a = std::exp(-in.horizon + in.schedule.knots[k]);
  const double logD = 0.5 * a * a * M;
  return in.schedule.deltas[k] * in.eta * a * M * tanh_like(a * v, logD) - 2.0 * v;
}

double phase_h_derivative(double v, int k, const PhaseInputs& in) {
  const char* op = "phase_h_derivative";
  if (k < 0 || k >= in.schedule.steps()) fail(op, "step index out of range");
  const double M = simd::dot(in.mu.data(), in.mu.data(), in.mu.size());
  const double a = std::exp(-in.horizon + in.schedule.knots[k]);
  const double logD = 0.5 * a * a * M;
  return in.schedule.deltas[k] * in.eta * a * a * M * tanh_like_derivative(a * v, logD) - 2.0;
}

PhaseThresholds phase_thresholds(const PhaseInputs& in) {
  const char* op = "phase_thresholds";
  const PhaseGeometry g = phase_geometry(in, op);
  const double M = g.M;
  const double dmin = in.schedule.delta_min();
  const double dmax = in.schedule.delta_max();

  PhaseThresholds th;
  th.eta0 = 1.0 / (M * dmax);
  th.eta0_prime = (16.0 + 16.0 * std::exp(M / 2.0) + std::max(16.0, 8.0 * std::exp(M))) /
                  (M * std::exp(M / 8.0) * dmin);

  if (in.eta < th.eta0_prime || g.admissible.empty()) return th;

  // s0: larger root of s^2 + (2 e^{M/2} - C0/2) s + e^M = 0,
  // C0 = (1/4) dmin eta M e^{M/8}
  const double c0 = 0.25 * dmin * in.eta * M * std::exp(M / 8.0);
  const double disc0 =
      (0.5 * c0 - 2.0 * std::exp(M / 2.0)) * (0.5 * c0 - 2.0 * std::exp(M / 2.0)) -
      4.0 * std::exp(M);
  if (disc0 < 0.0) return th;
  const double s0 = 0.25 * c0 - std::exp(M / 2.0) + 0.5 * std::sqrt(disc0);

  const double c1 = 0.25 * dmax * in.eta * M * std::exp(M / 2.0);
  const double disc1 = (2.0 * c1 - 2.0 * std::exp(M / 8.0)) * (2.0 * c1 - 2.0 * std::exp(M / 8.0)) -
                       4.0 * std::exp(M / 4.0) + 8.0 * dmax * in.eta * M;
  if (disc1 < 0.0) return th;
  const double s1 = c1 - std::exp(M / 8.0) + 0.5 * std::sqrt(disc1);

  if (s0 < 2.0 || s1 < 2.0) return th;
  th.s0 = s0;
  th.s1 = s1;
  th.a = std::acosh(0.5 * s0) / g.alpha_max;
  const double b_prime = std::acosh(0.5 * s1) / g.alpha_min;
  th.b_prime = b_prime;

  auto worst_h = [&](double v) {
    double w = -std::numeric_limits<double>::infinity();
    for (int k : g.admissible) w = std::max(w, phase_h(v, k, in));
    return w;
  };
  // h(v,k) <= dmax eta M - 2v, so worst_h is negative past dmax eta M / 2.
  double b = b_prime;
  if (worst_h(b) >= 0.0) {
    double hi = std::max(2.0 * b_prime, 0.5 * dmax * in.eta * M + 1.0);
    int guard = 0;
    while (worst_h(hi) >= 0.0 && guard++ < 200) hi *= 2.0;
    double lo = b_prime;
    for (int i = 0; i < 200 && hi - lo > 1e-10 * std::max(1.0, hi); ++i) {
      const double mid = 0.5 * (lo + hi);
      if (worst_h(mid) >= 0.0) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    b = hi;
  }
  th.b = b;
  return th;
}

PhaseClass classify_phase(const PhaseInputs& in) {
  const PhaseThresholds th = phase_thresholds(in);
  if (in.eta <= th.eta0) return PhaseClass::Convergent;
  if (in.eta >= th.eta0_prime) return PhaseClass::Splitting;
  return PhaseClass::Indeterminate;
}

const char* phase_name(PhaseClass c) {
  switch (c) {
    case PhaseClass::Convergent: return "convergent";
    case PhaseClass::Splitting: return "splitting";
    case PhaseClass::Indeterminate: return "indeterminate";
  }
  return "?";
}

}  // namespace mixguide
