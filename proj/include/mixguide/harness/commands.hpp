#pragma once

#include "mixguide/harness/config.hpp"

// Data commands. Each writes CSV (and optionally SVG) files under
// cfg.out_dir and prints one "wrote <path>" line per file. All output is
// byte-deterministic for fixed (config, seed). Return value is the process
// exit code (0; config problems throw ConfigError).
namespace mixguide::harness {

// samples.csv: eta,sample_id,x1..xd (terminal states per eta)
int cmd_simulate(const ExperimentConfig& cfg);

// confidence_sweep.csv: eta,ddim_conf,ddpm_mean,ddpm_q025,ddpm_q975,n,seed
// The deterministic column uses the configured sampler's deterministic twin,
// the ensemble columns its stochastic twin with a tape shared across etas.
int cmd_confidence_sweep(const ExperimentConfig& cfg);

// entropy_sweep.csv: eta,entropy,stderr_proxy,estimator,n,seed
int cmd_entropy_sweep(const ExperimentConfig& cfg);

// samples.csv (as simulate) + grid.csv: eta,g1..gd,kde_value; optional
// scatter.svg when emit.svg and d <= 3. Grids are emitted for d <= 3 only.
int cmd_density_grid(const ExperimentConfig& cfg);

// phase_scan.csv:
// eta,delta,phase,eta0,eta0_prime,a,b,frac_split,sign_balance,n,seed
// Requires the aligned model (1/3)N(-mu,I)+(1/3)N(0,I)+(1/3)N(mu,I) guided
// to the center component; paths use the deterministic discrete sampler.
int cmd_phase_scan(const ExperimentConfig& cfg);

}  // namespace mixguide::harness
