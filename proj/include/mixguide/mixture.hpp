#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

// Gaussian-mixture functionals for the forward Ornstein-Uhlenbeck noising
// process dz = -z dt + sqrt(2) dB. With data law sum_y w_y N(mu_y, Sigma),
// the time-t noisy law conditioned on component y is N(e^{-t} mu_y, Sigma_t),
// Sigma_t = e^{-2t} Sigma + (1 - e^{-2t}) I. Everything downstream (scores,
// posteriors, guided drifts, confidence) is closed-form in these quantities.
namespace mixguide {

using Vec = std::vector<double>;

// Per-(model, t) coefficient table. The component-y posterior logit at state
// x is dot(post_coef[y], x) + post_offset[y]; the conditional score is
// -Sigma_t^{-1} x + post_coef[y]. Computed once per evaluation time and
// shared across paths/steps.
struct TimeCoeffs {
  double t = 0.0;
  double decay = 1.0;   // e^{-t}
  double decay2 = 1.0;  // e^{-2t}
  bool identity = false;  // Sigma_t == I (holds for all t iff Sigma == I)
  std::vector<double> sigma_inv;  // row-major d*d; empty when identity
  double log_det_sigma = 0.0;     // log det Sigma_t
  std::vector<Vec> post_coef;     // e^{-t} Sigma_t^{-1} mu_y
  Vec post_offset;                // ln w_y - e^{-2t} <mu_y, Sigma_t^{-1} mu_y> / 2
  std::vector<Vec> comp_mean;     // e^{-t} mu_y
};

class MixtureModel {
 public:
  // Validates: weights nonnegative, summing to 1 within 1e-12, at least one
  // positive; means finite with consistent dimension; covariance symmetric
  // within 1e-12 and positive definite. Throws std::invalid_argument.
  MixtureModel(std::vector<double> weights, std::vector<Vec> means, std::vector<double> covariance);

  static MixtureModel isotropic(std::vector<double> weights, std::vector<Vec> means);

  MixtureModel(const MixtureModel& other);
  MixtureModel& operator=(const MixtureModel& other);
  MixtureModel(MixtureModel&&) noexcept = default;
  MixtureModel& operator=(MixtureModel&&) noexcept = default;

  int dim() const { return dim_; }
  int components() const { return static_cast<int>(weights_.size()); }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<Vec>& means() const { return means_; }
  const std::vector<double>& covariance() const { return cov_; }  // row-major dim*dim
  bool covariance_is_identity() const { return identity_cov_; }
  double sigma_min() const { return sigma_min_; }  // smallest covariance eigenvalue
  double max_mean_sq_norm() const;

  // Cached coefficient table at diffusion time t >= 0. Thread-safe: entries
  // are built under a lock and immutable afterwards; references stay valid
  // for the model's lifetime.
  const TimeCoeffs& coeffs(double t) const;

 private:
  int dim_ = 0;
  std::vector<double> weights_;
  Vec log_weights_;
  std::vector<Vec> means_;
  std::vector<double> cov_;
  bool identity_cov_ = false;
  double sigma_min_ = 1.0;

  mutable std::mutex cache_mutex_;
  mutable std::map<double, std::unique_ptr<TimeCoeffs>> cache_;

  friend std::unique_ptr<TimeCoeffs> build_coeffs(const MixtureModel&, double);
};

// --- allocation-free core used by the integrators -------------------------

// logits[y] = dot(post_coef[y], x) + post_offset[y]
void posterior_logits(const TimeCoeffs& c, const double* x, int d, double* logits);
// in-place softmax with max shift; n >= 1
void softmax_inplace(double* v, int n);
// DDIM drift  x - Sigma_t^{-1} x + (1+eta) e^{-t} Sigma_t^{-1} mu_y
//               - eta e^{-t} sum_y' q[y'] Sigma_t^{-1} mu_y'
// DDPM drift  x - 2 Sigma_t^{-1} x + 2(1+eta)(...) - 2 eta (...)
// q must hold posterior(x, t); out gets the drift.
void drift_into(const TimeCoeffs& c, bool ddpm, const double* x, int d, int y, double eta,
                const double* q, double* out);

// --- public operations -----------------------------------------------------

// Sigma_t = e^{-2t} Sigma + (1 - e^{-2t}) I, row-major dim*dim.
std::vector<double> sigma_t(const MixtureModel& m, double t);

// Component posterior q_t(x, .) via log-sum-exp softmax; sums to 1.
Vec posterior(const MixtureModel& m, const Vec& x, double t);

// grad_x log p_t(x | y) = -Sigma_t^{-1} x + e^{-t} Sigma_t^{-1} mu_y
Vec conditional_score(const MixtureModel& m, const Vec& x, int y, double t);

// grad_x log p_t(y | x) = e^{-t} Sigma_t^{-1} mu_y
//                          - sum_y' q_t(x,y') e^{-t} Sigma_t^{-1} mu_y'
Vec classifier_gradient(const MixtureModel& m, const Vec& x, int y, double t);

// grad_x log p_t(x) = sum_y q_t(x,y) * conditional_score(x, y, t)
Vec marginal_score(const MixtureModel& m, const Vec& x, double t);

// P(x, y) = q_0(x, y): probability that exact reverse dynamics started at x
// would land in component y.
double confidence(const MixtureModel& m, const Vec& x, int y);

// log p_t(x), or log p_t(x | y) when conditional_on is set.
double marginal_log_density(const MixtureModel& m, const Vec& x, double t,
                            std::optional<int> conditional_on = std::nullopt);

struct DriftEval {
  Vec drift;
  Vec posterior;
  Vec guidance;  // the eta-scaled summands of the drift (diagnostic)
};

// Reverse-time guided drifts evaluated at diffusion time tau (the forward
// time remaining). eta >= 0 is the guidance strength.
DriftEval guided_drift_ddim(const MixtureModel& m, const Vec& x, int y, double eta, double tau);
DriftEval guided_drift_ddpm(const MixtureModel& m, const Vec& x, int y, double eta, double tau);

struct Assumption1Report {
  Vec center;
  double epsilon = 0.0;
  double max_cross_inner = 0.0;       // max_{y' != y} |<mu_y - mu0, mu_y' - mu0>|
  double max_cross_inner_incl = 0.0;  // same maximum including y' == y
  double mu_gap_sq = 0.0;             // ||mu_y - mu0||^2
  bool cross_inner_ok = false;        // max_cross_inner <= epsilon
  bool epsilon_ok = false;            // epsilon <= mu_gap_sq / 3
  bool weights_ok = false;            // every weight strictly positive
  bool isotropic_ok = false;          // covariance == I within 1e-12
  bool satisfied() const { return cross_inner_ok && epsilon_ok && weights_ok && isotropic_ok; }
};

// Near-orthogonality check for guided component y around center mu0. When
// epsilon is not supplied it is auto-set to the measured max cross inner
// product (excluding y' == y; the inclusive maximum is also reported).
Assumption1Report check_assumption1(const MixtureModel& m, int y, const Vec& mu0,
                                    std::optional<double> epsilon = std::nullopt);

// Shared validation helpers (throw std::invalid_argument / std::out_of_range
// naming the operation).
void require_state(const MixtureModel& m, const Vec& x, const char* op);
void require_label(const MixtureModel& m, int y, const char* op);
void require_time(double t, const char* op);
void require_eta(double eta, const char* op);

}  // namespace mixguide
