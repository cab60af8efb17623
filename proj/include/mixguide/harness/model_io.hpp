#pragma once

#include <string>
#include <utility>

#include "mixguide/mixture.hpp"

// Mixture model files: JSON with keys `weights` (array), `means` (array of
// arrays), `covariance` (row-major array of arrays, optional, identity when
// absent), `label` (one-based guided component, optional, defaults to 1).
namespace mixguide::harness {

struct ModelSpec {
  MixtureModel model;
  int label = 0;  // zero-based

  ModelSpec(MixtureModel m, int y) : model(std::move(m)), label(y) {}
};

ModelSpec load_model_file(const std::string& path);
ModelSpec parse_model_text(const std::string& text, const std::string& origin);

// Round-trippable document for the given model; label is written one-based.
std::string model_to_text(const MixtureModel& m, int label);

}  // namespace mixguide::harness
