#include "mixguide/harness/presets.hpp"

#include "mixguide/harness/config.hpp"

// Preset manifests. Conventions: sqrt(3)/2 = 0.8660254037844386,
// sqrt(3) = 1.7320508075688772; labels are one-based; every preset carries a
// seed so one command reproduces the same bytes.
namespace mixguide::harness {

namespace {

struct Preset {
  const char* name;
  const char* command;
  const char* text;
};

// Three equidistant unit-norm components; guided ensembles tighten around
// the guided mean as eta grows.
constexpr const char* kFig1 = R"json({
  "model": {
    "weights": [0.3333333333333333, 0.3333333333333333, 0.3333333333333333],
    "means": [[0.8660254037844386, 0.5], [-0.8660254037844386, 0.5], [0.0, -1.0]],
    "label": 1
  },
  "guidance": {"etas": [0.0, 1.0, 2.0, 4.0, 8.0]},
  "sampler": {"kind": "ddim-disc", "delta": 0.01, "horizon": 10.0},
  "init": {"kind": "gaussian"},
  "n_samples": 10000,
  "seed": 20240101,
  "outputs": {"directory": "out-fig1"},
  "emit": {"csv": true, "svg": true}
})json";

// Symmetric two-component line: confidence from the origin, deterministic
// sampler plus stochastic quantile band.
constexpr const char* kFig2a = R"json({
  "model": {"weights": [0.5, 0.5], "means": [[1.0], [-1.0]], "label": 1},
  "guidance": {"etas": [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0,
                        5.5, 6.0, 6.5, 7.0, 7.5, 8.0, 8.5, 9.0, 9.5, 10.0]},
  "sampler": {"kind": "ddim-cont", "substeps": 1000, "horizon": 10.0},
  "init": {"kind": "point", "x0": [0.0]},
  "n_samples": 10000,
  "seed": 20240102,
  "outputs": {"directory": "out-fig2a"}
})json";

// Same model, entropy of the output law under a Gaussian start.
constexpr const char* kFig2b = R"json({
  "model": {"weights": [0.5, 0.5], "means": [[1.0], [-1.0]], "label": 1},
  "guidance": {"etas": [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0,
                        5.5, 6.0, 6.5, 7.0, 7.5, 8.0, 8.5, 9.0, 9.5, 10.0]},
  "sampler": {"kind": "ddim-cont", "substeps": 1000, "horizon": 10.0},
  "init": {"kind": "gaussian"},
  "n_samples": 10000,
  "seed": 20240103,
  "outputs": {"directory": "out-fig2b"},
  "entropy": {"estimator": "spacing"}
})json";

// Aligned three-component model guided to the center; strong guidance at
// coarse steps splits the center cluster.
constexpr const char* kFig4 = R"json({
  "model": {
    "weights": [0.3333333333333333, 0.3333333333333333, 0.3333333333333333],
    "means": [[0.0, 0.0], [2.0, 2.0], [-2.0, -2.0]],
    "label": 1
  },
  "guidance": {"etas": [0.0, 1.0, 5.0, 20.0, 100.0, 1000.0, 10000.0, 25000.0]},
  "sampler": {"kind": "ddim-disc", "horizon": 10.0},
  "init": {"kind": "gaussian"},
  "n_samples": 2000,
  "seed": 20240104,
  "outputs": {"directory": "out-fig4"},
  "phase": {"deltas": [0.1, 0.04]}
})json";

constexpr const char* kFigD3 = R"json({
  "model": {
    "weights": [0.3333333333333333, 0.3333333333333333, 0.3333333333333333],
    "means": [[0.0, 0.0, 0.0], [0.0, 1.7320508075688772, 0.0], [0.0, -1.7320508075688772, 0.0]],
    "label": 1
  },
  "guidance": {"etas": [0.0, 1.0, 10.0, 100.0, 1000.0]},
  "sampler": {"kind": "ddpm-disc", "delta": 0.01, "horizon": 10.0},
  "init": {"kind": "gaussian"},
  "n_samples": 4000,
  "seed": 20240105,
  "outputs": {"directory": "out-figD3"},
  "emit": {"csv": true, "svg": true}
})json";

constexpr const char* kFigD4 = R"json({
  "model": {
    "weights": [0.3333333333333333, 0.3333333333333333, 0.3333333333333333],
    "means": [[0.0, 0.0], [3.0, 3.0], [-3.0, -3.0]],
    "label": 1
  },
  "guidance": {"etas": [0.0, 1.0, 10.0, 100.0, 1000.0]},
  "sampler": {"kind": "ddpm-disc", "delta": 0.01, "horizon": 10.0},
  "init": {"kind": "gaussian"},
  "n_samples": 4000,
  "seed": 20240106,
  "outputs": {"directory": "out-figD4"},
  "emit": {"csv": true, "svg": true}
})json";

// Non-symmetric cluster line; the guided middle component distorts under
// large eta.
constexpr const char* kFigD5 = R"json({
  "model": {
    "weights": [0.3333333333333333, 0.3333333333333333, 0.3333333333333333],
    "means": [[0.0, 0.0], [0.5, 0.5], [4.0, 4.0]],
    "label": 2
  },
  "guidance": {"etas": [0.0, 1.0, 10.0, 100.0, 1000.0]},
  "sampler": {"kind": "ddpm-disc", "delta": 0.01, "horizon": 10.0},
  "init": {"kind": "gaussian"},
  "n_samples": 4000,
  "seed": 20240107,
  "outputs": {"directory": "out-figD5"},
  "emit": {"csv": true, "svg": true}
})json";

constexpr const char* kFigD6 = R"json({
  "model": {
    "weights": [0.3333333333333333, 0.3333333333333333, 0.3333333333333333],
    "means": [[0.0, 0.0, 0.0], [0.5, 0.5, 0.0], [5.0, 5.0, 0.0]],
    "label": 2
  },
  "guidance": {"etas": [0.0, 1.0, 10.0, 100.0, 1000.0]},
  "sampler": {"kind": "ddim-disc", "delta": 0.01, "horizon": 10.0},
  "init": {"kind": "gaussian"},
  "n_samples": 4000,
  "seed": 20240108,
  "outputs": {"directory": "out-figD6"},
  "emit": {"csv": true, "svg": true}
})json";

// Orthonormal means: the near-orthogonality premise holds exactly.
constexpr const char* kFigD7 = R"json({
  "model": {
    "weights": [0.3333333333333333, 0.3333333333333333, 0.3333333333333333],
    "means": [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    "label": 1
  },
  "guidance": {"etas": [0.0, 0.5, 1.0, 2.0, 5.0]},
  "sampler": {"kind": "ddim-cont", "substeps": 1000, "horizon": 10.0},
  "init": {"kind": "gaussian"},
  "n_samples": 4000,
  "seed": 20240109,
  "outputs": {"directory": "out-figD7"},
  "emit": {"csv": true, "svg": true}
})json";

// Equidistant 2d mixture, kernel-density entropy (fit/evaluate split).
constexpr const char* kFigD8 = R"json({
  "model": {
    "weights": [0.3333333333333333, 0.3333333333333333, 0.3333333333333333],
    "means": [[0.0, 1.0], [0.8660254037844386, -0.5], [-0.8660254037844386, -0.5]],
    "label": 1
  },
  "guidance": {"etas": [0.0, 0.5, 1.0, 2.0, 4.0, 8.0]},
  "sampler": {"kind": "ddim-cont", "substeps": 1000, "horizon": 10.0},
  "init": {"kind": "gaussian"},
  "n_samples": 10000,
  "seed": 20240110,
  "outputs": {"directory": "out-figD8"},
  "entropy": {"estimator": "kde-mc"}
})json";

constexpr Preset kPresets[] = {
    {"fig1", "density-grid", kFig1},   {"fig2a", "confidence-sweep", kFig2a},
    {"fig2b", "entropy-sweep", kFig2b}, {"fig4", "phase-scan", kFig4},
    {"figD3", "density-grid", kFigD3}, {"figD4", "density-grid", kFigD4},
    {"figD5", "density-grid", kFigD5}, {"figD6", "density-grid", kFigD6},
    {"figD7", "density-grid", kFigD7}, {"figD8", "entropy-sweep", kFigD8},
};

const Preset* find(const std::string& name) {
  for (const Preset& p : kPresets)
    if (name == p.name) return &p;
  return nullptr;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const Preset& p : kPresets) out.emplace_back(p.name);
  return out;
}

bool has_preset(const std::string& name) { return find(name) != nullptr; }

std::string preset_config_text(const std::string& name) {
  const Preset* p = find(name);
  if (!p) {
    std::string msg = "unknown preset \"" + name + "\" (available:";
    for (const Preset& q : kPresets) msg += std::string(" ") + q.name;
    throw ConfigError(msg + ")");
  }
  return p->text;
}

std::string preset_default_command(const std::string& name) {
  const Preset* p = find(name);
  if (!p) throw ConfigError("unknown preset \"" + name + "\"");
  return p->command;
}

}  // namespace mixguide::harness
