#include "mixguide/mixture.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mixguide/simd/kernels.hpp"

namespace mixguide {

namespace {

constexpr double kSymTol = 1e-12;
constexpr double kLog2Pi = 1.8378770664093454835606594728112;

bool all_finite(const double* v, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(v[i])) return false;
  }
  return true;
}

[[noreturn]] void fail(const char* op, const std::string& what) {
  throw std::invalid_argument(std::string(op) + ": " + what);
}

Eigen::Map<const Eigen::MatrixXd> as_matrix(const std::vector<double>& rowmajor, int d) {
  // Row-major storage of a symmetric matrix; the Eigen map below is
  // column-major, which reads the transpose. Symmetry makes that identical.
  return Eigen::Map<const Eigen::MatrixXd>(rowmajor.data(), d, d);
}

}  // namespace

void require_state(const MixtureModel& m, const Vec& x, const char* op) {
  if (static_cast<int>(x.size()) != m.dim()) fail(op, "state dimension mismatch");
  if (!all_finite(x.data(), x.size())) fail(op, "non-finite input state");
}

void require_label(const MixtureModel& m, int y, const char* op) {
  if (y < 0 || y >= m.components())
    throw std::out_of_range(std::string(op) + ": component label out of range");
}

void require_time(double t, const char* op) {
  if (!std::isfinite(t) || t < 0.0) fail(op, "diffusion time must be finite and >= 0");
}

void require_eta(double eta, const char* op) {
  if (!std::isfinite(eta) || eta < 0.0) fail(op, "guidance strength must be finite and >= 0");
}

MixtureModel::MixtureModel(std::vector<double> weights, std::vector<Vec> means,
                           std::vector<double> covariance) {
  const char* op = "MixtureModel";
  if (means.empty() || weights.size() != means.size()) fail(op, "weights/means size mismatch");
  dim_ = static_cast<int>(means.front().size());
  if (dim_ < 1) fail(op, "dimension must be >= 1");
  for (const Vec& mu : means) {
    if (static_cast<int>(mu.size()) != dim_) fail(op, "inconsistent mean dimensions");
    if (!all_finite(mu.data(), mu.size())) fail(op, "non-finite mean");
  }
  if (covariance.size() != static_cast<std::size_t>(dim_) * dim_)
    fail(op, "covariance must be dim x dim");
  if (!all_finite(covariance.data(), covariance.size())) fail(op, "non-finite covariance");

  double wsum = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) fail(op, "weights must be finite and >= 0");
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > 1e-12) fail(op, "weights must sum to 1 within 1e-12");
  if (*std::max_element(weights.begin(), weights.end()) <= 0.0)
    fail(op, "at least one weight must be positive");

  identity_cov_ = true;
  for (int i = 0; i < dim_ && identity_cov_; ++i) {
    for (int j = 0; j < dim_; ++j) {
      const double want = (i == j) ? 1.0 : 0.0;
      if (std::abs(covariance[i * dim_ + j] - want) > kSymTol) {
        identity_cov_ = false;
        break;
      }
    }
  }
  for (int i = 0; i < dim_; ++i) {
    for (int j = i + 1; j < dim_; ++j) {
      if (std::abs(covariance[i * dim_ + j] - covariance[j * dim_ + i]) > kSymTol)
        fail(op, "covariance must be symmetric within 1e-12");
    }
  }
  if (identity_cov_) {
    sigma_min_ = 1.0;
  } else {
    Eigen::MatrixXd S = as_matrix(covariance, dim_);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    if (es.info() != Eigen::Success) fail(op, "covariance eigendecomposition failed");
    sigma_min_ = es.eigenvalues().minCoeff();
    if (sigma_min_ <= 0.0) fail(op, "covariance must be positive definite");
  }

  weights_ = std::move(weights);
  means_ = std::move(means);
  cov_ = std::move(covariance);
  log_weights_.resize(weights_.size());
  for (std::size_t i = 0; i < weights_.size(); ++i)
    log_weights_[i] = weights_[i] > 0.0 ? std::log(weights_[i])
                                        : -std::numeric_limits<double>::infinity();
}

MixtureModel MixtureModel::isotropic(std::vector<double> weights, std::vector<Vec> means) {
  const int d = means.empty() ? 0 : static_cast<int>(means.front().size());
  std::vector<double> eye(static_cast<std::size_t>(d) * d, 0.0);
  for (int i = 0; i < d; ++i) eye[i * d + i] = 1.0;
  return MixtureModel(std::move(weights), std::move(means), std::move(eye));
}

MixtureModel::MixtureModel(const MixtureModel& other)
    : dim_(other.dim_),
      weights_(other.weights_),
      log_weights_(other.log_weights_),
      means_(other.means_),
      cov_(other.cov_),
      identity_cov_(other.identity_cov_),
      sigma_min_(other.sigma_min_) {}

MixtureModel& MixtureModel::operator=(const MixtureModel& other) {
  if (this == &other) return *this;
  dim_ = other.dim_;
  weights_ = other.weights_;
  log_weights_ = other.log_weights_;
  means_ = other.means_;
  cov_ = other.cov_;
  identity_cov_ = other.identity_cov_;
  sigma_min_ = other.sigma_min_;
  std::lock_guard<std::mutex> lock(cache_mutex_);
  cache_.clear();
  return *this;
}

double MixtureModel::max_mean_sq_norm() const {
  double m = 0.0;
  for (const Vec& mu : means_)
    m = std::max(m, simd::dot(mu.data(), mu.data(), mu.size()));
  return m;
}

std::unique_ptr<TimeCoeffs> build_coeffs(const MixtureModel& m, double t) {
  auto c = std::make_unique<TimeCoeffs>();
  const int d = m.dim_;
  const int C = m.components();
  c->t = t;
  c->decay = std::exp(-t);
  c->decay2 = std::exp(-2.0 * t);
  c->identity = m.identity_cov_;
  c->post_coef.resize(C);
  c->post_offset.resize(C);
  c->comp_mean.resize(C);

  if (c->identity) {
    c->log_det_sigma = 0.0;
    for (int y = 0; y < C; ++y) {
      const Vec& mu = m.means_[y];
      c->comp_mean[y].resize(d);
      c->post_coef[y].resize(d);
      for (int i = 0; i < d; ++i) {
        c->comp_mean[y][i] = c->decay * mu[i];
        c->post_coef[y][i] = c->decay * mu[i];
      }
      const double quad = simd::dot(mu.data(), mu.data(), d);
      c->post_offset[y] = m.log_weights_[y] - 0.5 * c->decay2 * quad;
    }
    return c;
  }

  Eigen::MatrixXd sig = c->decay2 * as_matrix(m.cov_, d).eval();
  for (int i = 0; i < d; ++i) sig(i, i) += 1.0 - c->decay2;
  Eigen::LLT<Eigen::MatrixXd> llt(sig);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("TimeCoeffs: Sigma_t factorization failed");
  Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(d, d));
  c->sigma_inv.resize(static_cast<std::size_t>(d) * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) c->sigma_inv[i * d + j] = 0.5 * (inv(i, j) + inv(j, i));
  double logdet = 0.0;
  for (int i = 0; i < d; ++i) logdet += std::log(llt.matrixL()(i, i));
  c->log_det_sigma = 2.0 * logdet;

  for (int y = 0; y < C; ++y) {
    const Vec& mu = m.means_[y];
    c->comp_mean[y].resize(d);
    c->post_coef[y].resize(d);
    for (int i = 0; i < d; ++i) c->comp_mean[y][i] = c->decay * mu[i];
    for (int i = 0; i < d; ++i)
      c->post_coef[y][i] = c->decay * simd::dot(&c->sigma_inv[i * static_cast<std::size_t>(d)],
                                                mu.data(), d);
    // <mu_y, Sigma_t^{-1} mu_y> = <mu_y, post_coef[y]> / e^{-t}
    const double quad = simd::dot(mu.data(), c->post_coef[y].data(), d) / c->decay;
    c->post_offset[y] = m.log_weights_[y] - 0.5 * c->decay2 * quad;
  }
  return c;
}

const TimeCoeffs& MixtureModel::coeffs(double t) const {
  require_time(t, "MixtureModel::coeffs");
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = cache_.find(t);
    if (it != cache_.end()) return *it->second;
  }
  auto built = build_coeffs(*this, t);
  std::lock_guard<std::mutex> lock(cache_mutex_);
  auto [it, inserted] = cache_.try_emplace(t, std::move(built));
  return *it->second;
}

void posterior_logits(const TimeCoeffs& c, const double* x, int d, double* logits) {
  const int C = static_cast<int>(c.post_coef.size());
  for (int y = 0; y < C; ++y)
    logits[y] = simd::dot(c.post_coef[y].data(), x, d) + c.post_offset[y];
}

void softmax_inplace(double* v, int n) {
  double mx = v[0];
  for (int i = 1; i < n; ++i) mx = std::max(mx, v[i]);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    v[i] = std::exp(v[i] - mx);
    sum += v[i];
  }
  const double inv = 1.0 / sum;
  for (int i = 0; i < n; ++i) v[i] *= inv;
}

namespace {

// out <- Sigma_t^{-1} x (non-identity only)
void sigma_inv_matvec(const TimeCoeffs& c, const double* x, int d, double* out) {
  for (int i = 0; i < d; ++i)
    out[i] = simd::dot(&c.sigma_inv[static_cast<std::size_t>(i) * d], x, d);
}

}  // namespace

void drift_into(const TimeCoeffs& c, bool ddpm, const double* x, int d, int y, double eta,
                const double* q, double* out) {
  const int C = static_cast<int>(c.post_coef.size());
  const double lin = ddpm ? 2.0 : 1.0;  // coefficient on Sigma_t^{-1} x
  if (c.identity) {
    if (ddpm) {
      for (int i = 0; i < d; ++i) out[i] = -x[i];
    } else {
      for (int i = 0; i < d; ++i) out[i] = 0.0;
    }
  } else {
    sigma_inv_matvec(c, x, d, out);
    simd::combine2(out, 1.0, x, -lin, out, d);
  }
  const double gain = lin * (1.0 + eta);
  simd::axpy(out, gain, c.post_coef[y].data(), d);
  if (eta > 0.0) {
    for (int yy = 0; yy < C; ++yy) {
      if (q[yy] != 0.0) simd::axpy(out, -lin * eta * q[yy], c.post_coef[yy].data(), d);
    }
  }
}

std::vector<double> sigma_t(const MixtureModel& m, double t) {
  require_time(t, "sigma_t");
  const int d = m.dim();
  const double decay2 = std::exp(-2.0 * t);
  std::vector<double> out(m.covariance());
  for (auto& v : out) v *= decay2;
  for (int i = 0; i < d; ++i) out[i * d + i] += 1.0 - decay2;
  return out;
}

Vec posterior(const MixtureModel& m, const Vec& x, double t) {
  require_state(m, x, "posterior");
  require_time(t, "posterior");
  const TimeCoeffs& c = m.coeffs(t);
  Vec q(m.components());
  posterior_logits(c, x.data(), m.dim(), q.data());
  softmax_inplace(q.data(), m.components());
  return q;
}

Vec conditional_score(const MixtureModel& m, const Vec& x, int y, double t) {
  require_state(m, x, "conditional_score");
  require_label(m, y, "conditional_score");
  require_time(t, "conditional_score");
  const TimeCoeffs& c = m.coeffs(t);
  const int d = m.dim();
  Vec s(d);
  if (c.identity) {
    for (int i = 0; i < d; ++i) s[i] = -x[i];
  } else {
    sigma_inv_matvec(c, x.data(), d, s.data());
    simd::scale(s.data(), -1.0, d);
  }
  simd::axpy(s.data(), 1.0, c.post_coef[y].data(), d);
  return s;
}

Vec classifier_gradient(const MixtureModel& m, const Vec& x, int y, double t) {
  require_state(m, x, "classifier_gradient");
  require_label(m, y, "classifier_gradient");
  require_time(t, "classifier_gradient");
  const TimeCoeffs& c = m.coeffs(t);
  const int d = m.dim();
  Vec q = posterior(m, x, t);
  Vec g(c.post_coef[y]);
  for (int yy = 0; yy < m.components(); ++yy) {
    if (q[yy] != 0.0) simd::axpy(g.data(), -q[yy], c.post_coef[yy].data(), d);
  }
  return g;
}

Vec marginal_score(const MixtureModel& m, const Vec& x, double t) {
  require_state(m, x, "marginal_score");
  require_time(t, "marginal_score");
  const TimeCoeffs& c = m.coeffs(t);
  const int d = m.dim();
  Vec q = posterior(m, x, t);
  Vec s(d);
  if (c.identity) {
    for (int i = 0; i < d; ++i) s[i] = -x[i];
  } else {
    sigma_inv_matvec(c, x.data(), d, s.data());
    simd::scale(s.data(), -1.0, d);
  }
  for (int yy = 0; yy < m.components(); ++yy) {
    if (q[yy] != 0.0) simd::axpy(s.data(), q[yy], c.post_coef[yy].data(), d);
  }
  return s;
}

double confidence(const MixtureModel& m, const Vec& x, int y) {
  require_state(m, x, "confidence");
  require_label(m, y, "confidence");
  return posterior(m, x, 0.0)[y];
}

double marginal_log_density(const MixtureModel& m, const Vec& x, double t,
                            std::optional<int> conditional_on) {
  require_state(m, x, "marginal_log_density");
  require_time(t, "marginal_log_density");
  const TimeCoeffs& c = m.coeffs(t);
  const int d = m.dim();
  const int C = m.components();
  Vec diff(d), tmp(d);

  auto comp_log_density = [&](int y) {
    for (int i = 0; i < d; ++i) diff[i] = x[i] - c.comp_mean[y][i];
    double quad;
    if (c.identity) {
      quad = simd::dot(diff.data(), diff.data(), d);
    } else {
      sigma_inv_matvec(c, diff.data(), d, tmp.data());
      quad = simd::dot(diff.data(), tmp.data(), d);
    }
    return -0.5 * (d * kLog2Pi + c.log_det_sigma + quad);
  };

  if (conditional_on.has_value()) {
    require_label(m, *conditional_on, "marginal_log_density");
    return comp_log_density(*conditional_on);
  }

  Vec terms(C);
  double mx = -std::numeric_limits<double>::infinity();
  for (int y = 0; y < C; ++y) {
    terms[y] = (m.weights()[y] > 0.0)
                   ? std::log(m.weights()[y]) + comp_log_density(y)
                   : -std::numeric_limits<double>::infinity();
    mx = std::max(mx, terms[y]);
  }
  double sum = 0.0;
  for (int y = 0; y < C; ++y) sum += std::exp(terms[y] - mx);
  return mx + std::log(sum);
}

namespace {

DriftEval guided_drift(const MixtureModel& m, const Vec& x, int y, double eta, double tau,
                       bool ddpm, const char* op) {
  require_state(m, x, op);
  require_label(m, y, op);
  require_time(tau, op);
  require_eta(eta, op);
  const TimeCoeffs& c = m.coeffs(tau);
  const int d = m.dim();
  DriftEval out;
  out.posterior = posterior(m, x, tau);
  out.drift.resize(d);
  drift_into(c, ddpm, x.data(), d, y, eta, out.posterior.data(), out.drift.data());
  // guidance term: eta * (post_coef[y] - sum_y' q_y' post_coef[y']), doubled
  // for the DDPM parameterization.
  const double lin = ddpm ? 2.0 : 1.0;
  out.guidance.assign(d, 0.0);
  simd::axpy(out.guidance.data(), lin * eta, c.post_coef[y].data(), d);
  for (int yy = 0; yy < m.components(); ++yy) {
    if (out.posterior[yy] != 0.0)
      simd::axpy(out.guidance.data(), -lin * eta * out.posterior[yy], c.post_coef[yy].data(), d);
  }
  return out;
}

}  // namespace

DriftEval guided_drift_ddim(const MixtureModel& m, const Vec& x, int y, double eta, double tau) {
  return guided_drift(m, x, y, eta, tau, false, "guided_drift_ddim");
}

DriftEval guided_drift_ddpm(const MixtureModel& m, const Vec& x, int y, double eta, double tau) {
  return guided_drift(m, x, y, eta, tau, true, "guided_drift_ddpm");
}

Assumption1Report check_assumption1(const MixtureModel& m, int y, const Vec& mu0,
                                    std::optional<double> epsilon) {
  const char* op = "check_assumption1";
  require_label(m, y, op);
  if (static_cast<int>(mu0.size()) != m.dim()) fail(op, "center dimension mismatch");
  if (!all_finite(mu0.data(), mu0.size())) fail(op, "non-finite center");
  if (epsilon.has_value() && (!std::isfinite(*epsilon) || *epsilon < 0.0))
    fail(op, "epsilon must be finite and >= 0");

  const int d = m.dim();
  const int C = m.components();
  Vec vy(d);
  for (int i = 0; i < d; ++i) vy[i] = m.means()[y][i] - mu0[i];

  Assumption1Report rep;
  rep.center = mu0;
  rep.mu_gap_sq = simd::dot(vy.data(), vy.data(), d);

  Vec vyp(d);
  double mx_excl = 0.0, mx_incl = 0.0;
  for (int yy = 0; yy < C; ++yy) {
    for (int i = 0; i < d; ++i) vyp[i] = m.means()[yy][i] - mu0[i];
    const double inner = std::abs(simd::dot(vy.data(), vyp.data(), d));
    mx_incl = std::max(mx_incl, inner);
    if (yy != y) mx_excl = std::max(mx_excl, inner);
  }
  rep.max_cross_inner = mx_excl;
  rep.max_cross_inner_incl = mx_incl;
  rep.epsilon = epsilon.value_or(mx_excl);

  rep.cross_inner_ok = mx_excl <= rep.epsilon;
  rep.epsilon_ok = rep.epsilon <= rep.mu_gap_sq / 3.0;
  rep.weights_ok = true;
  for (double w : m.weights()) rep.weights_ok = rep.weights_ok && w > 0.0;
  rep.isotropic_ok = m.covariance_is_identity();
  return rep;
}

}  // namespace mixguide
