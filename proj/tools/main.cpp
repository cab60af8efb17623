#include <cstdint>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>

#include "CLI11.hpp"
#include "mixguide/harness/commands.hpp"
#include "mixguide/harness/config.hpp"
#include "mixguide/harness/presets.hpp"
#include "mixguide/harness/verify.hpp"

namespace {

int run(const std::string& cmd, const mixguide::harness::ConfigSources& src) {
  using namespace mixguide::harness;
  const ExperimentConfig cfg = resolve_config(src);
  if (cmd == "simulate") return cmd_simulate(cfg);
  if (cmd == "confidence-sweep") return cmd_confidence_sweep(cfg);
  if (cmd == "entropy-sweep") return cmd_entropy_sweep(cfg);
  if (cmd == "density-grid") return cmd_density_grid(cfg);
  if (cmd == "phase-scan") return cmd_phase_scan(cfg);
  throw std::logic_error("unhandled command " + cmd);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Guided diffusion sampling laboratory for Gaussian mixture models"};
  app.require_subcommand(1);

  std::string config_path, preset, out_dir, mutate;
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "override the config seed");
  app.add_option("--config", config_path, "JSON config file");
  std::string preset_help = "named preset (";
  {
    bool first = true;
    for (const auto& n : mixguide::harness::preset_names()) {
      if (!first) preset_help += ", ";
      preset_help += n;
      first = false;
    }
    preset_help += ")";
  }
  app.add_option("--preset", preset, preset_help);
  app.add_option("--out", out_dir, "override the output directory");

  const char* data_cmds[] = {"simulate", "confidence-sweep", "entropy-sweep", "density-grid",
                             "phase-scan"};
  const char* data_descs[] = {
      "terminal sample ensembles per guidance strength",
      "deterministic confidence plus stochastic mean/quantiles per guidance strength",
      "differential entropy of the output law per guidance strength",
      "sample ensembles plus a kernel-density grid (and optional SVG scatter)",
      "phase classification, thresholds, and split metrics on the aligned model"};
  for (std::size_t i = 0; i < 5; ++i) app.add_subcommand(data_cmds[i], data_descs[i])->fallthrough();
  auto* verify_cmd =
      app.add_subcommand("verify", "run the full property suite; exit 1 on any failure");
  verify_cmd->fallthrough();
  verify_cmd->add_option("--mutate", mutate, "fault-injection fixture (classifier-gradient-sign)");

  CLI11_PARSE(app, argc, argv);

  try {
    CLI::App* sub = app.get_subcommands().front();
    if (sub == verify_cmd) {
      mixguide::harness::VerifyOptions opt;
      opt.mutate = mutate;
      if (seed_opt->count() > 0) opt.seed = seed_value;
      return mixguide::harness::cmd_verify(opt, std::cout);
    }
    mixguide::harness::ConfigSources src;
    src.preset = preset;
    src.config_path = config_path;
    if (seed_opt->count() > 0) src.seed_override = seed_value;
    src.out_override = out_dir;
    return run(sub->get_name(), src);
  } catch (const mixguide::harness::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
