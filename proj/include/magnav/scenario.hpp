#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "magnav/controller.hpp"
#include "magnav/gridworld.hpp"
#include "magnav/instruction.hpp"
#include "magnav/oracle.hpp"
#include "magnav/viewplan.hpp"

namespace magnav {

struct EpisodeSpec {
  std::string name;
  World world{OccupancyGrid(1, 1, 1.0), {}};
  OccupancyGrid initial_known{1, 1, 1.0};  // the agent's map at step 0
  Instruction instruction;
  AgentPose start;
  std::string truth_target_id;
  std::uint64_t seed = 0;

  // Per-scenario overrides.
  double delta_sim = 0.75;
  ViewplanConfig viewplan;
  int max_steps = 500;
  int explore_budget = 500;
  std::optional<OracleConfig> oracle;
  std::optional<AblationFlags> ablation;
};

// Checks the structural invariants; throws LoadError naming the scenario.
void validate(const EpisodeSpec& spec);

// JSON scenario documents. Grid rows are strings with '.' Free, '#' Obstacle
// and '?' Free but unknown to the agent; row 0 is y = 0. With "hidden": true
// (the default) the agent starts knowing nothing. Object footprints are
// forced to Obstacle. Relative scripted playback paths resolve against
// `base_dir`.
EpisodeSpec parse_episode(const std::string& text, const std::string& base_dir = ".");
EpisodeSpec load_episode(const std::string& path);
std::string episode_to_json(const EpisodeSpec& spec);

// Every *.json under `dir`, sorted by file name.
std::vector<EpisodeSpec> load_episode_dir(const std::string& dir);

// Deterministic unit vector for objects given without a feature.
std::vector<double> synthetic_feature(const std::string& key, int dim = 8);

}  // namespace magnav
