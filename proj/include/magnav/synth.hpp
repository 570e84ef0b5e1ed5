#pragma once

#include <cstdint>
#include <string>

#include "magnav/scenario.hpp"

namespace magnav {

struct SynthOptions {
  int width = 20;
  int height = 20;
  double resolution = 0.25;
  int walls = 4;           // interior wall segments
  int distractors_max = 2; // same-class decoys, at least 1
  int clutter_max = 2;     // unrelated objects
  double min_start_cells = 8.0;
  double sense_range = 2.5;
  double fov = kPi / 2;
  int feature_dim = 8;
};

// Random room with a target next to a landmark, same-class decoys and clutter.
// The target is always reachable from the start. Deterministic in `seed`.
EpisodeSpec generate_scenario(std::uint64_t seed, const std::string& name, const SynthOptions& opts = {});

}  // namespace magnav
