#include "mixguide/harness/commands.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include "mixguide/harness/csv.hpp"
#include "mixguide/harness/svg.hpp"
#include "mixguide/simd/kernels.hpp"
#include "mixguide/theory.hpp"

namespace mixguide::harness {

namespace {

std::string out_path(const ExperimentConfig& cfg, const char* name) {
  std::filesystem::create_directories(cfg.out_dir);
  return (std::filesystem::path(cfg.out_dir) / name).string();
}

void note_wrote(const std::string& path) { std::cout << "wrote " << path << "\n"; }

bool run_is_stochastic(const ExperimentConfig& cfg, SamplerKind kind) {
  return sampler_is_stochastic(kind) || cfg.init.kind == InitLaw::Kind::Gaussian;
}

SamplerKind deterministic_twin(SamplerKind k) {
  switch (k) {
    case SamplerKind::DdpmContinuous: return SamplerKind::DdimContinuous;
    case SamplerKind::DdpmDiscrete: return SamplerKind::DdimDiscrete;
    default: return k;
  }
}

SamplerKind stochastic_twin(SamplerKind k) {
  switch (k) {
    case SamplerKind::DdimContinuous: return SamplerKind::DdpmContinuous;
    case SamplerKind::DdimDiscrete: return SamplerKind::DdpmDiscrete;
    default: return k;
  }
}

// sorted linear-interpolation quantile at p (n - 1) (the numpy default)
double quantile_sorted(const std::vector<double>& s, double p) {
  const double h = p * static_cast<double>(s.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(h);
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

std::vector<std::string> sample_header(int d) {
  std::vector<std::string> h = {"eta", "sample_id"};
  for (int i = 1; i <= d; ++i) h.push_back("x" + std::to_string(i));
  return h;
}

void write_samples_csv(const ExperimentConfig& cfg,
                       const std::vector<std::vector<Vec>>& ensembles) {
  CsvFile csv(out_path(cfg, "samples.csv"), sample_header(cfg.model.dim()));
  for (std::size_t e = 0; e < cfg.etas.size(); ++e) {
    for (std::size_t i = 0; i < ensembles[e].size(); ++i) {
      csv.cell(cfg.etas[e]);
      csv.cell(static_cast<int>(i));
      for (double v : ensembles[e][i]) csv.cell(v);
      csv.end_row();
    }
  }
  csv.close();
  note_wrote(csv.path());
}

constexpr std::array<const char*, 10> kPalette = {
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

// Project a state to plot coordinates: (x1, x2), or (x1, band) at d == 1.
std::array<double, 2> plot_point(const Vec& x, std::size_t band) {
  return {x[0], x.size() >= 2 ? x[1] : static_cast<double>(band)};
}

void write_scatter_svg(const ExperimentConfig& cfg,
                       const std::vector<std::vector<Vec>>& ensembles) {
  SvgFigure fig(640, 480);
  for (std::size_t e = 0; e < ensembles.size(); ++e) {
    const std::size_t stride = std::max<std::size_t>(1, ensembles[e].size() / 2000);
    std::vector<std::array<double, 2>> pts;
    for (std::size_t i = 0; i < ensembles[e].size(); i += stride)
      pts.push_back(plot_point(ensembles[e][i], e));
    fig.add_scatter(pts, kPalette[e % kPalette.size()]);
  }
  std::vector<std::array<double, 2>> means;
  for (const Vec& mu : cfg.model.means()) means.push_back(plot_point(mu, 0));
  if (!means.empty()) means.push_back(means.front());
  fig.add_polyline(means, "#000000");
  const std::string path = out_path(cfg, "scatter.svg");
  fig.write(path);
  note_wrote(path);
}

}  // namespace

int cmd_simulate(const ExperimentConfig& cfg) {
  const std::uint64_t seed = resolved_seed(cfg, run_is_stochastic(cfg, cfg.sampler.kind));
  if (!cfg.emit_csv) {
    std::cout << "csv emission disabled; nothing to do\n";
    return 0;
  }
  std::vector<std::vector<Vec>> ensembles;
  ensembles.reserve(cfg.etas.size());
  for (double eta : cfg.etas)
    ensembles.push_back(sample_ensemble(cfg.model, cfg.label, eta, cfg.n_samples, cfg.horizon,
                                        cfg.sampler, cfg.init, seed));
  write_samples_csv(cfg, ensembles);
  return 0;
}

int cmd_confidence_sweep(const ExperimentConfig& cfg) {
  const std::uint64_t seed = resolved_seed(cfg, true);
  SamplerSpec det_spec = cfg.sampler;
  det_spec.kind = deterministic_twin(cfg.sampler.kind);
  SamplerSpec sto_spec = cfg.sampler;
  sto_spec.kind = stochastic_twin(cfg.sampler.kind);

  const int d = cfg.model.dim();
  const int n = cfg.n_samples;
  const NoiseTape tape(seed);
  Vec x0(d, 0.0);
  if (cfg.init.kind == InitLaw::Kind::Point) {
    x0 = cfg.init.x0;
  } else {
    tape.fill_init(0, x0.data(), d);
  }

  CsvFile csv(out_path(cfg, "confidence_sweep.csv"),
              {"eta", "ddim_conf", "ddpm_mean", "ddpm_q025", "ddpm_q975", "n", "seed"});
  for (double eta : cfg.etas) {
    const Trajectory det =
        run_path(cfg.model, cfg.label, eta, x0, cfg.horizon, det_spec, tape, 0);

    const std::vector<Vec> xs = sample_ensemble(cfg.model, cfg.label, eta, n, cfg.horizon,
                                                sto_spec, cfg.init, seed);
    std::vector<double> conf(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i)
      conf[i] = confidence(cfg.model, xs[i], cfg.label);
    const double mean =
        std::accumulate(conf.begin(), conf.end(), 0.0) / static_cast<double>(conf.size());
    std::sort(conf.begin(), conf.end());

    csv.cell(eta);
    csv.cell(det.terminal_confidence());
    csv.cell(mean);
    csv.cell(quantile_sorted(conf, 0.025));
    csv.cell(quantile_sorted(conf, 0.975));
    csv.cell(n);
    csv.cell(seed);
    csv.end_row();
  }
  csv.close();
  note_wrote(csv.path());
  return 0;
}

int cmd_entropy_sweep(const ExperimentConfig& cfg) {
  const std::uint64_t seed = resolved_seed(cfg, true);
  const int d = cfg.model.dim();
  if (cfg.entropy.estimator == EntropyEstimator::Spacing && d != 1)
    throw ConfigError("entropy.estimator: spacing needs a 1d model (use knn or kde-mc)");

  CsvFile csv(out_path(cfg, "entropy_sweep.csv"),
              {"eta", "entropy", "stderr_proxy", "estimator", "n", "seed"});
  for (double eta : cfg.etas) {
    const std::vector<Vec> xs = sample_ensemble(cfg.model, cfg.label, eta, cfg.n_samples,
                                                cfg.horizon, cfg.sampler, cfg.init, seed);
    EntropyEstimate est;
    switch (cfg.entropy.estimator) {
      case EntropyEstimator::Spacing: {
        std::vector<double> v(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) v[i] = xs[i][0];
        est = spacing_entropy_1d(v, cfg.entropy.spacing_m, cfg.entropy.bias_corrected);
        break;
      }
      case EntropyEstimator::Knn:
        est = knn_entropy(xs, cfg.entropy.knn_k);
        break;
      case EntropyEstimator::KdeMc:
        est = kde_mc_entropy(xs);
        break;
      case EntropyEstimator::Gaussian:
        throw ConfigError("entropy.estimator: gaussian is analytic-only");
    }
    if (est.degenerate_warning)
      std::cout << "note: degenerate spacings at eta " << format_double(eta)
                << "; entropy floor applied\n";
    csv.cell(eta);
    csv.cell(est.value);
    csv.cell(est.stderr_proxy);
    csv.cell(std::string(estimator_name(est.estimator)));
    csv.cell(est.n);
    csv.cell(seed);
    csv.end_row();
  }
  csv.close();
  note_wrote(csv.path());
  return 0;
}

int cmd_density_grid(const ExperimentConfig& cfg) {
  const std::uint64_t seed = resolved_seed(cfg, run_is_stochastic(cfg, cfg.sampler.kind));
  const int d = cfg.model.dim();
  const int n = cfg.n_samples;

  std::vector<std::vector<Vec>> ensembles;
  ensembles.reserve(cfg.etas.size());
  for (double eta : cfg.etas)
    ensembles.push_back(
        sample_ensemble(cfg.model, cfg.label, eta, n, cfg.horizon, cfg.sampler, cfg.init, seed));

  if (cfg.emit_csv) write_samples_csv(cfg, ensembles);

  if (d > 3) {
    std::cout << "grid/scatter skipped (dimension " << d << " > 3); samples written\n";
    return 0;
  }

  if (cfg.emit_csv) {
    int ppa = cfg.grid.points_per_axis;
    if (ppa == 0) ppa = d == 1 ? 201 : d == 2 ? 41 : 17;

    Vec lo(d, 0.0), hi(d, 0.0);
    bool first = true;
    for (const auto& ens : ensembles) {
      for (const Vec& x : ens) {
        for (int j = 0; j < d; ++j) {
          if (first || x[j] < lo[j]) lo[j] = x[j];
          if (first || x[j] > hi[j]) hi[j] = x[j];
        }
        first = false;
      }
    }
    for (int j = 0; j < d; ++j) {
      double pad = cfg.grid.pad_fraction * (hi[j] - lo[j]);
      if (pad <= 0.0) pad = 1.0;
      lo[j] -= pad;
      hi[j] += pad;
    }

    std::vector<std::string> header = {"eta"};
    for (int j = 1; j <= d; ++j) header.push_back("g" + std::to_string(j));
    header.push_back("kde_value");
    CsvFile grid(out_path(cfg, "grid.csv"), header);

    const double rate = std::pow(static_cast<double>(n), -1.0 / (d + 4));
    const double kLog2Pi = 1.8378770664093453;
    Vec g(d), inv_h(d);
    std::vector<int> idx(d);
    for (std::size_t e = 0; e < cfg.etas.size(); ++e) {
      // per-axis Scott bandwidths from this ensemble, floored to stay usable
      // when guidance collapses the spread
      Vec mean(d, 0.0);
      for (const Vec& x : ensembles[e])
        for (int j = 0; j < d; ++j) mean[j] += x[j];
      for (int j = 0; j < d; ++j) mean[j] /= n;
      Vec sd(d, 0.0);
      for (const Vec& x : ensembles[e])
        for (int j = 0; j < d; ++j) sd[j] += (x[j] - mean[j]) * (x[j] - mean[j]);
      double log_norm = -0.5 * d * kLog2Pi - std::log(static_cast<double>(n));
      for (int j = 0; j < d; ++j) {
        sd[j] = n > 1 ? std::sqrt(sd[j] / (n - 1)) : 0.0;
        const double h = std::max(sd[j] * rate, 1e-9);
        inv_h[j] = 1.0 / h;
        log_norm += std::log(inv_h[j]);
      }
      const double norm = std::exp(log_norm);

      std::fill(idx.begin(), idx.end(), 0);
      while (true) {
        for (int j = 0; j < d; ++j)
          g[j] = lo[j] + (hi[j] - lo[j]) * idx[j] / static_cast<double>(ppa - 1);
        double acc = 0.0;
        for (const Vec& x : ensembles[e])
          acc += std::exp(-0.5 * simd::sq_dist_scaled(g.data(), x.data(), inv_h.data(), d));
        grid.cell(cfg.etas[e]);
        for (int j = 0; j < d; ++j) grid.cell(g[j]);
        grid.cell(acc * norm);
        grid.end_row();

        int j = d - 1;
        while (j >= 0 && ++idx[j] == ppa) idx[j--] = 0;
        if (j < 0) break;
      }
    }
    grid.close();
    note_wrote(grid.path());
  }

  if (cfg.emit_svg) write_scatter_svg(cfg, ensembles);
  return 0;
}

int cmd_phase_scan(const ExperimentConfig& cfg) {
  const MixtureModel& m = cfg.model;
  const int d = m.dim();
  const char* shape =
      "phase-scan needs the aligned model: weights (1/3, 1/3, 1/3), means {-mu, 0, +mu}, "
      "identity covariance, guided label = the zero-mean component";
  if (m.components() != 3 || !m.covariance_is_identity()) throw ConfigError(shape);
  for (double w : m.weights())
    if (std::abs(w - 1.0 / 3.0) > 1e-9) throw ConfigError(shape);

  int center = -1;
  for (int c = 0; c < 3; ++c) {
    const Vec& mu = m.means()[c];
    if (std::sqrt(simd::dot(mu.data(), mu.data(), d)) <= 1e-9) center = c;
  }
  if (center < 0 || cfg.label != center) throw ConfigError(shape);
  const int s0 = center == 0 ? 1 : 0;
  const int s1 = 3 - center - s0;
  Vec mu = m.means()[s0];
  double align_err = 0.0;
  for (int j = 0; j < d; ++j) align_err = std::max(align_err, std::abs(mu[j] + m.means()[s1][j]));
  const double mu_norm = std::sqrt(simd::dot(mu.data(), mu.data(), d));
  if (align_err > 1e-9 || mu_norm <= 1e-9) throw ConfigError(shape);

  const double radius = cfg.phase.split_radius.value_or(mu_norm / 2.0);
  const std::uint64_t seed = resolved_seed(cfg, cfg.init.kind == InitLaw::Kind::Gaussian);
  const int n = cfg.n_samples;

  CsvFile csv(out_path(cfg, "phase_scan.csv"),
              {"eta", "delta", "phase", "eta0", "eta0_prime", "a", "b", "frac_split",
               "sign_balance", "n", "seed"});
  const double nan = std::nan("");
  for (double delta : cfg.phase.deltas) {
    SamplerSpec spec;
    spec.kind = SamplerKind::DdimDiscrete;
    spec.delta = delta;
    const Schedule sched = Schedule::from_delta(cfg.horizon, delta);
    for (double eta : cfg.etas) {
      const PhaseInputs pin{mu, eta, cfg.horizon, sched};
      const PhaseThresholds th = phase_thresholds(pin);
      const PhaseClass pc = classify_phase(pin);

      const std::vector<Vec> xs =
          sample_ensemble(m, cfg.label, eta, n, cfg.horizon, spec, cfg.init, seed);
      int split = 0, positive = 0;
      for (const Vec& x : xs) {
        const double v = simd::dot(x.data(), mu.data(), d) / mu_norm;
        if (std::abs(v) > radius) {
          ++split;
          if (v > 0.0) ++positive;
        }
      }
      csv.cell(eta);
      csv.cell(delta);
      csv.cell(std::string(phase_name(pc)));
      csv.cell(th.eta0);
      csv.cell(th.eta0_prime);
      csv.cell(th.a.value_or(nan));
      csv.cell(th.b.value_or(nan));
      csv.cell(static_cast<double>(split) / static_cast<double>(n));
      csv.cell(split > 0 ? static_cast<double>(positive) / static_cast<double>(split) : nan);
      csv.cell(n);
      csv.cell(seed);
      csv.end_row();
    }
  }
  csv.close();
  note_wrote(csv.path());
  return 0;
}

}  // namespace mixguide::harness
