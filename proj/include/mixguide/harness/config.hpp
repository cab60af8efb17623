#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mixguide/dynamics.hpp"
#include "mixguide/entropy.hpp"
#include "mixguide/mixture.hpp"

// Experiment configuration: JSON documents merged from an optional named
// preset, an optional config file, and command-line overrides, in that
// order. Labels are one-based on disk and zero-based in memory.
namespace mixguide::harness {

// Malformed configuration; the CLI maps it to exit code 2. Parse failures
// carry file:line:column diagnostics.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct GridOptions {
  int points_per_axis = 0;     // 0 = pick by dimension (201 / 41 / 17)
  double pad_fraction = 0.05;  // bounding-box padding per axis
};

struct EntropyOptions {
  EntropyEstimator estimator = EntropyEstimator::Spacing;
  std::optional<int> spacing_m;  // spacing window; default floor(sqrt(n)+1/2)
  int knn_k = 3;
  bool bias_corrected = false;
};

struct PhaseOptions {
  std::vector<double> deltas = {0.1, 0.04};
  // threshold on |<x_T, mu>| / |mu| separating split from centered paths;
  // default |mu| / 2 (midpoint of the center/side projections)
  std::optional<double> split_radius;
};

struct ExperimentConfig {
  MixtureModel model = MixtureModel::isotropic({1.0}, {{0.0}});
  int label = 0;  // zero-based
  std::vector<double> etas = {0.0};
  SamplerSpec sampler;
  double horizon = 10.0;
  InitLaw init = InitLaw::gaussian();
  int n_samples = 1;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  bool emit_csv = true;
  bool emit_svg = false;
  EntropyOptions entropy;
  PhaseOptions phase;
  GridOptions grid;
};

struct ConfigSources {
  std::string preset;       // empty = none
  std::string config_path;  // empty = none
  std::optional<std::uint64_t> seed_override;
  std::string out_override;  // empty = none
};

// Merge preset <- config file <- overrides; at least one of preset/config
// must be present. Throws ConfigError on any problem.
ExperimentConfig resolve_config(const ConfigSources& src);

// Parse one JSON document. `origin` names the source in diagnostics;
// `base_dir` resolves relative model file references.
ExperimentConfig parse_config_text(const std::string& text, const std::string& origin,
                                   const std::string& base_dir = ".");

// The resolved seed for a run; stochastic runs (gaussian init or stochastic
// sampler) must have one configured, deterministic runs fall back to 0.
std::uint64_t resolved_seed(const ExperimentConfig& cfg, bool stochastic);

}  // namespace mixguide::harness
