#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "magnav/controller.hpp"
#include "magnav/memory.hpp"
#include "magnav/oracle.hpp"
#include "magnav/scenario.hpp"

namespace magnav {

struct Arm {
  std::string name;
  AblationFlags flags;
};

// full, no-ag, no-mg, no-amg, no-amg-noraw. Throws InputError otherwise.
Arm arm_by_name(const std::string& name);
std::vector<Arm> parse_arms(const std::string& comma_list);
std::vector<Arm> ablation_arms();

struct RunOptions {
  std::optional<OracleConfig> oracle;  // overrides the scenario's choice
  std::uint64_t suite_seed = 0;
  bool keep_trace = false;
  int threads = 0;  // 0: hardware concurrency
};

struct EpisodeResult {
  std::string scenario;
  std::string arm;
  bool success = false;
  int steps = 0;
  double p = 0.0;
  double l = 0.0;
  double spl = 0.0;
  double dtg = 0.0;
  std::string phase = "None";
  bool l_finite = true;
  ControllerOutcome outcome;
  std::shared_ptr<const MemoryStore> memory;  // only with keep_trace
};

// Seed shared by every arm of a scenario.
std::uint64_t episode_seed(std::uint64_t suite_seed, const EpisodeSpec& spec);

ControllerConfig controller_config(const EpisodeSpec& spec, const Arm& arm, std::uint64_t seed);

EpisodeResult run_episode(const EpisodeSpec& spec, const Arm& arm, const RunOptions& opts = {});

struct ArmSummary {
  std::string arm;
  int episodes = 0;
  int successes = 0;
  double sr = 0.0;
  double spl = 0.0;
  double dtg = 0.0;
};

struct SuiteReport {
  std::vector<EpisodeResult> rows;  // scenario-major, arms in the order given
  std::vector<ArmSummary> arms;
  const ArmSummary& arm(const std::string& name) const;
};

SuiteReport run_suite(std::span<const EpisodeSpec> specs, std::span<const Arm> arms, const RunOptions& opts = {});

std::string report_csv(const SuiteReport& report);
std::string summary_table(const SuiteReport& report);
std::string trace_json(const EpisodeResult& result);

}  // namespace magnav
