#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "magnav/gridworld.hpp"
#include "magnav/instruction.hpp"
#include "magnav/memory.hpp"
#include "magnav/nav.hpp"
#include "magnav/oracle.hpp"
#include "magnav/viewplan.hpp"

namespace magnav {

struct AblationFlags {
  bool active = true;       // re-check from an optimized viewpoint
  bool reserved = true;     // query stored keyframes after exploration
  bool raw_context = true;  // pass unannotated detections to the oracle
  friend bool operator==(const AblationFlags&, const AblationFlags&) = default;
};

struct ControllerConfig {
  int max_steps = 500;       // action budget, STOP included
  int explore_budget = 500;  // exploration ends at this many actions
  double stop_radius = 0.3;  // meters
  double unknown_speed = 0.5;
  double align_tolerance = kPi / 12;
  int max_replans = 3;
  int m_max = 13;
  int n_samples = 13;
  ViewplanConfig viewplan;
  FrontierWeights frontier;
  AblationFlags ablation;
  std::uint64_t seed = 0;
};

struct QueryRecord {
  int step = 0;
  GroundingQuery query;
  GroundingResult result;
  std::optional<int> entry_key;  // memory entry the answer resolved to
  bool accepted = false;
  std::string note;
};

struct ViewpointRecord {
  int step = 0;
  int entry_key = 0;
  Cell cell;
  ViewpointScore score;
};

struct ControllerTrace {
  std::vector<QueryRecord> queries;
  std::vector<ViewpointRecord> viewpoints;
  std::vector<Action> actions;
  std::vector<Cell> path;  // start position, then one entry per action
  std::vector<std::string> log;
};

struct ControllerOutcome {
  std::optional<Cell> goal;  // P_goal
  std::optional<int> goal_entry;
  std::optional<Phase> goal_phase;     // stage whose answer set P_goal
  std::optional<Phase> phase_reached;  // latest stage that issued a query
  bool stopped = false;
  AgentPose final_pose;
  int steps = 0;
  double path_length = 0.0;  // meters actually moved
  ControllerTrace trace;
};

// Runs the three-stage grounding loop in `world` from `start`. `known` is the
// agent's initial map. `truth_target_id` only ever reaches the oracle through
// GroundingTruth.
ControllerOutcome run_controller(const World& world, const AgentPose& start, const Instruction& instruction,
                                 MemoryStore& memory, OccupancyGrid known, const ControllerConfig& cfg,
                                 GroundingOracle& oracle, const std::string& truth_target_id);

struct ReservedOutcome {
  std::optional<Cell> goal;
  std::optional<int> entry_key;
  std::optional<QueryRecord> record;  // absent when memory held no keyframes
  std::string note;
};

// One Reserved query over sample_keyframes(memory, n_samples). An answer that
// does not resolve to a stored entry counts as failure.
ReservedOutcome reserved_grounding(const MemoryStore& memory, const Instruction& instruction,
                                   GroundingOracle& oracle, int n_samples, const World& world,
                                   const std::string& truth_target_id, bool with_raw_context, int step);

// Summaries handed to the oracle for one observation.
std::vector<CandidateSummary> summarize(const std::vector<Detection>& dets, const World& world,
                                        const Instruction& instruction);

}  // namespace magnav
