#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mixguide/harness/config.hpp"
#include "mixguide/harness/csv.hpp"
#include "mixguide/harness/model_io.hpp"
#include "mixguide/harness/presets.hpp"
#include "mixguide/harness/svg.hpp"

using namespace mixguide;
using namespace mixguide::harness;
namespace fs = std::filesystem;

namespace {

fs::path temp_root() {
  const fs::path p = fs::temp_directory_path() / "mixguide_harness_test";
  fs::create_directories(p);
  return p;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

template <typename F>
std::string error_of(F&& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

const char* kFullConfig = R"json({
  "model": {
    "weights": [0.5, 0.5],
    "means": [[1.0, 0.0], [-1.0, 0.0]],
    "covariance": [[2.0, 0.0], [0.0, 1.0]],
    "label": 2
  },
  "guidance": {"etas": [0.0, 1.5, 4.0]},
  "sampler": {"kind": "ddpm-disc", "method": "euler", "substeps": 77, "delta": 0.02, "horizon": 6.0},
  "init": {"kind": "point", "x0": [0.25, -0.5]},
  "n_samples": 123,
  "seed": 42,
  "outputs": {"directory": "out-here"},
  "emit": {"csv": true, "svg": true},
  "entropy": {"estimator": "knn", "m": 12, "k": 5, "bias_corrected": true},
  "phase": {"deltas": [0.2, 0.05], "split_radius": 0.75},
  "grid": {"points_per_axis": 33, "pad_fraction": 0.1}
})json";

}  // namespace

TEST_CASE("full config document parses into every field") {
  const ExperimentConfig cfg = parse_config_text(kFullConfig, "inline");
  CHECK(cfg.model.components() == 2);
  CHECK(cfg.model.dim() == 2);
  CHECK(cfg.model.covariance()[0] == 2.0);
  CHECK(cfg.label == 1);  // one-based on disk
  CHECK(cfg.etas == std::vector<double>{0.0, 1.5, 4.0});
  CHECK(cfg.sampler.kind == SamplerKind::DdpmDiscrete);
  CHECK(cfg.sampler.method == OdeMethod::Euler);
  CHECK(cfg.sampler.substeps == 77);
  CHECK(cfg.sampler.delta == 0.02);
  CHECK(cfg.horizon == 6.0);
  CHECK(cfg.init.kind == InitLaw::Kind::Point);
  CHECK(cfg.init.x0 == Vec{0.25, -0.5});
  CHECK(cfg.n_samples == 123);
  REQUIRE(cfg.seed.has_value());
  CHECK(*cfg.seed == 42);
  CHECK(cfg.out_dir == "out-here");
  CHECK(cfg.emit_csv);
  CHECK(cfg.emit_svg);
  CHECK(cfg.entropy.estimator == EntropyEstimator::Knn);
  REQUIRE(cfg.entropy.spacing_m.has_value());
  CHECK(*cfg.entropy.spacing_m == 12);
  CHECK(cfg.entropy.knn_k == 5);
  CHECK(cfg.entropy.bias_corrected);
  CHECK(cfg.phase.deltas == std::vector<double>{0.2, 0.05});
  REQUIRE(cfg.phase.split_radius.has_value());
  CHECK(*cfg.phase.split_radius == 0.75);
  CHECK(cfg.grid.points_per_axis == 33);
  CHECK(cfg.grid.pad_fraction == 0.1);
}

TEST_CASE("defaults apply when sections are omitted") {
  const ExperimentConfig cfg =
      parse_config_text(R"({"model": {"weights": [1.0], "means": [[0.0]]}})", "inline");
  CHECK(cfg.label == 0);  // label defaults to the first component
  CHECK(cfg.etas == std::vector<double>{0.0});
  CHECK(cfg.sampler.kind == SamplerKind::DdimContinuous);
  CHECK(cfg.horizon == 10.0);
  CHECK(cfg.init.kind == InitLaw::Kind::Gaussian);
  CHECK(cfg.n_samples == 1);
  CHECK(!cfg.seed.has_value());
  CHECK(cfg.out_dir == ".");
  CHECK(cfg.emit_csv);
  CHECK(!cfg.emit_svg);
}

TEST_CASE("diagnostics name the origin and the offending key") {
  const std::string unknown = error_of(
      [] { parse_config_text(R"({"model": {"weights": [1.0], "means": [[0.0]]}, "x": 1})", "cfg-a"); });
  CHECK(unknown.find("cfg-a") != std::string::npos);
  CHECK(unknown.find("\"x\"") != std::string::npos);

  // syntax errors carry line:column positions
  const std::string syntax = error_of([] { parse_config_text("{\n  \"model\": }", "cfg-b"); });
  CHECK(syntax.find("cfg-b:2:") != std::string::npos);

  CHECK_THROWS_AS(parse_config_text("[1, 2]", "cfg"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"guidance": {"etas": [1.0]}})", "cfg"), ConfigError);

  auto bad = [](const std::string& body) {
    const std::string doc =
        R"({"model": {"weights": [1.0], "means": [[0.0]]}, )" + body + "}";
    return error_of([&] { parse_config_text(doc, "cfg"); });
  };
  CHECK(bad(R"("guidance": {"etas": []})").find("etas") != std::string::npos);
  CHECK(bad(R"("guidance": {"etas": [-1.0]})").find("non-negative") != std::string::npos);
  CHECK(bad(R"("sampler": {"kind": "leapfrog"})").find("leapfrog") != std::string::npos);
  CHECK(bad(R"("sampler": {"delta": 0.0})").find("delta") != std::string::npos);
  CHECK(bad(R"("init": {"kind": "point"})").find("x0") != std::string::npos);
  CHECK(bad(R"("init": {"kind": "point", "x0": [0.0, 1.0]})").find("dimension") !=
        std::string::npos);
  CHECK(bad(R"("entropy": {"estimator": "gaussian"})").find("gaussian") != std::string::npos);
  CHECK(bad(R"("seed": -3)").find("seed") != std::string::npos);
  CHECK(bad(R"("n_samples": 0)").find("n_samples") != std::string::npos);
  CHECK(bad(R"("grid": {"points_per_axis": 1})").find("points_per_axis") != std::string::npos);

  // label range checking happens inside the model block
  const std::string label = error_of([] {
    parse_config_text(R"({"model": {"weights": [1.0], "means": [[0.0]], "label": 2}})", "cfg");
  });
  CHECK(label.find("label") != std::string::npos);
}

TEST_CASE("model files round-trip and resolve relative to the config") {
  const fs::path root = temp_root();
  const MixtureModel m({0.25, 0.75}, {{1.0, 2.0}, {-1.0, 0.5}}, {1.5, 0.2, 0.2, 1.0});
  const std::string text = model_to_text(m, 1);

  const ModelSpec back = parse_model_text(text, "roundtrip");
  CHECK(back.label == 1);
  CHECK(back.model.weights() == m.weights());
  CHECK(back.model.means() == m.means());
  CHECK(back.model.covariance() == m.covariance());

  write_file(root / "model.json", text);
  const ModelSpec loaded = load_model_file((root / "model.json").string());
  CHECK(loaded.model.means() == m.means());

  // a config referencing the model by relative path
  write_file(root / "cfg.json", R"({"model": "model.json", "guidance": {"etas": [0.0, 2.0]}})");
  ConfigSources src;
  src.config_path = (root / "cfg.json").string();
  const ExperimentConfig cfg = resolve_config(src);
  CHECK(cfg.model.components() == 2);
  CHECK(cfg.label == 1);
  CHECK(cfg.etas == std::vector<double>{0.0, 2.0});

  CHECK_THROWS_AS(load_model_file((root / "missing.json").string()), ConfigError);
  CHECK_THROWS_AS(parse_model_text(R"({"weights": [1.0]})", "m"), ConfigError);  // no means
  CHECK_THROWS_AS(parse_model_text(R"({"weights": [0.9], "means": [[0.0]]})", "m"), ConfigError);
}

TEST_CASE("preset, config file, and flag overrides merge in order") {
  const fs::path root = temp_root();
  write_file(root / "override.json", R"({"guidance": {"etas": [0.0, 9.0]}, "n_samples": 50})");

  ConfigSources src;
  src.preset = "fig2a";
  src.config_path = (root / "override.json").string();
  src.seed_override = 777;
  src.out_override = "elsewhere";
  const ExperimentConfig cfg = resolve_config(src);

  CHECK(cfg.etas == std::vector<double>{0.0, 9.0});  // file beats preset
  CHECK(cfg.n_samples == 50);
  REQUIRE(cfg.seed.has_value());
  CHECK(*cfg.seed == 777);           // flag beats both
  CHECK(cfg.out_dir == "elsewhere");
  CHECK(cfg.model.dim() == 1);       // untouched preset fields survive
  CHECK(cfg.init.kind == InitLaw::Kind::Point);

  CHECK_THROWS_AS(resolve_config(ConfigSources{}), ConfigError);
  ConfigSources missing;
  missing.config_path = (root / "nope.json").string();
  CHECK_THROWS_AS(resolve_config(missing), ConfigError);
  ConfigSources unknown;
  unknown.preset = "fig99";
  CHECK_THROWS_AS(resolve_config(unknown), ConfigError);
}

TEST_CASE("every preset is a complete, parseable experiment") {
  const auto names = preset_names();
  CHECK(names.size() == 10);
  const std::set<std::string> commands = {"simulate", "confidence-sweep", "entropy-sweep",
                                          "density-grid", "phase-scan"};
  for (const auto& name : names) {
    CAPTURE(name);
    CHECK(has_preset(name));
    const ExperimentConfig cfg = parse_config_text(preset_config_text(name), "preset " + name);
    CHECK(cfg.seed.has_value());  // presets pin their seeds
    CHECK(cfg.n_samples > 1);
    CHECK(!cfg.etas.empty());
    CHECK(commands.count(preset_default_command(name)) == 1);
  }
  CHECK(!has_preset("fig99"));
  CHECK_THROWS_AS(preset_config_text("fig99"), ConfigError);

  // spot checks on the flagship preset
  const ExperimentConfig fig1 = parse_config_text(preset_config_text("fig1"), "preset fig1");
  CHECK(fig1.model.components() == 3);
  CHECK(fig1.model.dim() == 2);
  CHECK(fig1.emit_svg);
  CHECK(fig1.sampler.kind == SamplerKind::DdimDiscrete);
}

TEST_CASE("resolved seed policy") {
  ExperimentConfig cfg;
  CHECK(resolved_seed(cfg, false) == 0);
  CHECK_THROWS_AS(resolved_seed(cfg, true), ConfigError);
  cfg.seed = 5;
  CHECK(resolved_seed(cfg, true) == 5);
  CHECK(resolved_seed(cfg, false) == 5);
}

TEST_CASE("csv formatting is byte-stable") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(-2.5) == "-2.5");
  CHECK(format_double(std::nan("")) == "nan");
  // %.17g survives a strtod round trip
  for (double v : {1e300, -1.5e-7, 3.141592653589793, 0.30000000000000004}) {
    CHECK(std::stod(format_double(v)) == v);
  }

  const fs::path root = temp_root();
  const fs::path path = root / "t.csv";
  {
    CsvFile csv(path.string(), {"eta", "value", "n", "tag"});
    csv.cell(0.1);
    csv.cell(std::nan(""));
    csv.cell(7);
    csv.cell(std::string("x"));
    csv.end_row();
    csv.cell(2.0);
    csv.cell(-1.0);
    csv.cell(0);
    csv.cell(std::string("y"));
    csv.end_row();
    csv.close();
  }
  CHECK(read_file(path) ==
        "eta,value,n,tag\n"
        "0.10000000000000001,nan,7,x\n"
        "2,-1,0,y\n");

  CsvFile bad(path.string(), {"a", "b"});
  bad.cell(1.0);
  CHECK_THROWS_AS(bad.end_row(), std::runtime_error);
}

TEST_CASE("svg figures are well-formed") {
  const fs::path root = temp_root();
  const fs::path path = root / "t.svg";
  SvgFigure fig(320, 240);
  fig.add_scatter({{0.0, 0.0}, {1.0, 2.0}, {-1.0, 0.5}}, "#1f77b4");
  fig.add_polyline({{0.0, 0.0}, {1.0, 2.0}}, "#d62728");
  fig.write(path.string());
  const std::string svg = read_file(path);
  CHECK(svg.find("<svg") == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("circle") != std::string::npos);
  CHECK(svg.find("polyline") != std::string::npos);
}
