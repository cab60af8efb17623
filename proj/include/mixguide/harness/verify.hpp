#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

// End-to-end property suite: re-derives every guarantee the library encodes
// (gradient oracles, confidence dominance, quantitative bounds, entropy
// reduction, step conditions, phase thresholds) on small fixed scenarios and
// prints one line per property with its theorem id. Exit code 1 when any
// property fails.
namespace mixguide::harness {

struct VerifyOptions {
  // Fault-injection fixture. "classifier-gradient-sign" flips the sign of
  // the classifier gradient inside the suite's oracle property, which must
  // turn the exit code to 1. Unknown names are a config error.
  std::string mutate;
  std::uint64_t seed = 20240901;
};

int cmd_verify(const VerifyOptions& opt, std::ostream& os);

}  // namespace mixguide::harness
