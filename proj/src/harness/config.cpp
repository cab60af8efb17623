#include "mixguide/harness/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json_util.hpp"
#include "mixguide/harness/presets.hpp"

namespace mixguide::harness {

namespace {

using detail::check_keys;
using detail::config_fail;
using detail::get_finite;
using detail::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int get_int(const json& v, const std::string& origin, const std::string& where) {
  if (!v.is_number_integer()) config_fail(origin, where + ": expected an integer");
  return v.get<int>();
}

bool get_bool(const json& v, const std::string& origin, const std::string& where) {
  if (!v.is_boolean()) config_fail(origin, where + ": expected a boolean");
  return v.get<bool>();
}

std::string get_string(const json& v, const std::string& origin, const std::string& where) {
  if (!v.is_string()) config_fail(origin, where + ": expected a string");
  return v.get<std::string>();
}

std::vector<double> get_number_array(const json& v, const std::string& origin,
                                     const std::string& where) {
  if (!v.is_array() || v.empty()) config_fail(origin, where + ": expected a non-empty array");
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(get_finite(v[i], origin, where + "[" + std::to_string(i) + "]"));
  return out;
}

ExperimentConfig config_from_json(const json& j, const std::string& origin,
                                  const std::string& base_dir) {
  if (!j.is_object()) config_fail(origin, "top level: expected an object");
  check_keys(j,
             {"model", "guidance", "sampler", "init", "n_samples", "seed", "outputs", "emit",
              "entropy", "phase", "grid"},
             origin, "top level");
  if (!j.contains("model")) config_fail(origin, "missing \"model\" (inline object or file path)");

  ExperimentConfig cfg;

  if (j["model"].is_string()) {
    const std::filesystem::path p(j["model"].get<std::string>());
    const std::filesystem::path full = p.is_absolute() ? p : std::filesystem::path(base_dir) / p;
    ModelSpec spec = load_model_file(full.string());
    cfg.model = std::move(spec.model);
    cfg.label = spec.label;
  } else {
    ModelSpec spec = detail::model_from_json(j["model"], origin);
    cfg.model = std::move(spec.model);
    cfg.label = spec.label;
  }

  if (j.contains("guidance")) {
    const json& g = j["guidance"];
    if (!g.is_object()) config_fail(origin, "guidance: expected an object");
    check_keys(g, {"etas"}, origin, "guidance");
    if (!g.contains("etas")) config_fail(origin, "guidance: missing \"etas\"");
    cfg.etas = get_number_array(g["etas"], origin, "guidance.etas");
    for (double e : cfg.etas)
      if (e < 0.0) config_fail(origin, "guidance.etas: must be non-negative");
  }

  if (j.contains("sampler")) {
    const json& s = j["sampler"];
    if (!s.is_object()) config_fail(origin, "sampler: expected an object");
    check_keys(s, {"kind", "method", "substeps", "delta", "horizon"}, origin, "sampler");
    if (s.contains("kind")) {
      const std::string name = get_string(s["kind"], origin, "sampler.kind");
      const auto kind = sampler_from_name(name);
      if (!kind)
        config_fail(origin, "sampler.kind: unknown \"" + name +
                                "\" (ddim-cont, ddpm-cont, ddim-disc, ddpm-disc)");
      cfg.sampler.kind = *kind;
    }
    if (s.contains("method")) {
      const std::string name = get_string(s["method"], origin, "sampler.method");
      if (name == "euler") {
        cfg.sampler.method = OdeMethod::Euler;
      } else if (name == "rk4") {
        cfg.sampler.method = OdeMethod::Rk4;
      } else {
        config_fail(origin, "sampler.method: unknown \"" + name + "\" (euler, rk4)");
      }
    }
    if (s.contains("substeps")) {
      cfg.sampler.substeps = get_int(s["substeps"], origin, "sampler.substeps");
      if (cfg.sampler.substeps < 1) config_fail(origin, "sampler.substeps: must be >= 1");
    }
    if (s.contains("delta")) {
      cfg.sampler.delta = get_finite(s["delta"], origin, "sampler.delta");
      if (cfg.sampler.delta <= 0.0) config_fail(origin, "sampler.delta: must be > 0");
    }
    if (s.contains("horizon")) {
      cfg.horizon = get_finite(s["horizon"], origin, "sampler.horizon");
      if (cfg.horizon <= 0.0) config_fail(origin, "sampler.horizon: must be > 0");
    }
  }

  if (j.contains("init")) {
    const json& s = j["init"];
    if (!s.is_object()) config_fail(origin, "init: expected an object");
    check_keys(s, {"kind", "x0"}, origin, "init");
    const std::string kind =
        s.contains("kind") ? get_string(s["kind"], origin, "init.kind") : "gaussian";
    if (kind == "gaussian") {
      cfg.init = InitLaw::gaussian();
    } else if (kind == "point") {
      if (!s.contains("x0")) config_fail(origin, "init: point init needs \"x0\"");
      Vec x0 = get_number_array(s["x0"], origin, "init.x0");
      if (static_cast<int>(x0.size()) != cfg.model.dim())
        config_fail(origin, "init.x0: dimension mismatch with model");
      cfg.init = InitLaw::point(std::move(x0));
    } else {
      config_fail(origin, "init.kind: unknown \"" + kind + "\" (point, gaussian)");
    }
  }

  if (j.contains("n_samples")) {
    cfg.n_samples = get_int(j["n_samples"], origin, "n_samples");
    if (cfg.n_samples < 1) config_fail(origin, "n_samples: must be >= 1");
  }

  if (j.contains("seed")) {
    const json& s = j["seed"];
    if (!s.is_number_integer() || (s.is_number_integer() && !s.is_number_unsigned() &&
                                   s.get<std::int64_t>() < 0))
      config_fail(origin, "seed: expected a non-negative integer");
    cfg.seed = s.get<std::uint64_t>();
  }

  if (j.contains("outputs")) {
    const json& s = j["outputs"];
    if (!s.is_object()) config_fail(origin, "outputs: expected an object");
    check_keys(s, {"directory"}, origin, "outputs");
    if (s.contains("directory"))
      cfg.out_dir = get_string(s["directory"], origin, "outputs.directory");
  }

  if (j.contains("emit")) {
    const json& s = j["emit"];
    if (!s.is_object()) config_fail(origin, "emit: expected an object");
    check_keys(s, {"csv", "svg"}, origin, "emit");
    if (s.contains("csv")) cfg.emit_csv = get_bool(s["csv"], origin, "emit.csv");
    if (s.contains("svg")) cfg.emit_svg = get_bool(s["svg"], origin, "emit.svg");
  }

  if (j.contains("entropy")) {
    const json& s = j["entropy"];
    if (!s.is_object()) config_fail(origin, "entropy: expected an object");
    check_keys(s, {"estimator", "m", "k", "bias_corrected"}, origin, "entropy");
    if (s.contains("estimator")) {
      const std::string name = get_string(s["estimator"], origin, "entropy.estimator");
      const auto est = estimator_from_name(name);
      if (!est || *est == EntropyEstimator::Gaussian)
        config_fail(origin,
                    "entropy.estimator: unknown \"" + name + "\" (spacing, knn, kde-mc)");
      cfg.entropy.estimator = *est;
    }
    if (s.contains("m")) {
      const int m = get_int(s["m"], origin, "entropy.m");
      if (m < 0) config_fail(origin, "entropy.m: must be >= 0 (0 = automatic)");
      if (m > 0) cfg.entropy.spacing_m = m;
    }
    if (s.contains("k")) {
      cfg.entropy.knn_k = get_int(s["k"], origin, "entropy.k");
      if (cfg.entropy.knn_k < 1) config_fail(origin, "entropy.k: must be >= 1");
    }
    if (s.contains("bias_corrected"))
      cfg.entropy.bias_corrected = get_bool(s["bias_corrected"], origin, "entropy.bias_corrected");
  }

  if (j.contains("phase")) {
    const json& s = j["phase"];
    if (!s.is_object()) config_fail(origin, "phase: expected an object");
    check_keys(s, {"deltas", "split_radius"}, origin, "phase");
    if (s.contains("deltas")) {
      cfg.phase.deltas = get_number_array(s["deltas"], origin, "phase.deltas");
      for (double d : cfg.phase.deltas)
        if (d <= 0.0) config_fail(origin, "phase.deltas: must be > 0");
    }
    if (s.contains("split_radius")) {
      const double r = get_finite(s["split_radius"], origin, "phase.split_radius");
      if (r <= 0.0) config_fail(origin, "phase.split_radius: must be > 0");
      cfg.phase.split_radius = r;
    }
  }

  if (j.contains("grid")) {
    const json& s = j["grid"];
    if (!s.is_object()) config_fail(origin, "grid: expected an object");
    check_keys(s, {"points_per_axis", "pad_fraction"}, origin, "grid");
    if (s.contains("points_per_axis")) {
      cfg.grid.points_per_axis = get_int(s["points_per_axis"], origin, "grid.points_per_axis");
      if (cfg.grid.points_per_axis != 0 && cfg.grid.points_per_axis < 2)
        config_fail(origin, "grid.points_per_axis: must be 0 (auto) or >= 2");
    }
    if (s.contains("pad_fraction")) {
      cfg.grid.pad_fraction = get_finite(s["pad_fraction"], origin, "grid.pad_fraction");
      if (cfg.grid.pad_fraction < 0.0) config_fail(origin, "grid.pad_fraction: must be >= 0");
    }
  }

  return cfg;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin,
                                   const std::string& base_dir) {
  return config_from_json(detail::parse_json_document(text, origin), origin, base_dir);
}

ExperimentConfig resolve_config(const ConfigSources& src) {
  json merged = json::object();
  std::string origin;
  std::string base_dir = ".";

  if (!src.preset.empty()) {
    merged = detail::parse_json_document(preset_config_text(src.preset),
                                         "preset " + src.preset);
    origin = "preset " + src.preset;
  }
  if (!src.config_path.empty()) {
    const json file = detail::parse_json_document(read_file(src.config_path), src.config_path);
    if (!file.is_object())
      config_fail(src.config_path, "top level: expected an object");
    merged.merge_patch(file);
    origin = src.config_path;
    base_dir = std::filesystem::path(src.config_path).parent_path().string();
    if (base_dir.empty()) base_dir = ".";
  }
  if (origin.empty())
    throw ConfigError("no configuration given: pass --preset NAME and/or --config PATH");

  if (src.seed_override) merged["seed"] = *src.seed_override;
  if (!src.out_override.empty()) merged["outputs"]["directory"] = src.out_override;

  return config_from_json(merged, origin, base_dir);
}

std::uint64_t resolved_seed(const ExperimentConfig& cfg, bool stochastic) {
  if (cfg.seed) return *cfg.seed;
  if (stochastic)
    throw ConfigError("seed required for stochastic runs (set \"seed\" in the config or --seed)");
  return 0;
}

}  // namespace mixguide::harness
