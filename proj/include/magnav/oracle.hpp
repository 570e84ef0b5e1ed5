#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "magnav/instruction.hpp"

namespace magnav {

enum class Phase { Initial, Active, Reserved };
std::string to_string(Phase p);
Phase phase_from_string(std::string_view s);

// What the grounding model gets to see about one candidate.
struct CandidateSummary {
  int identifier = 0;
  std::string class_name;
  std::vector<std::string> attributes;
  double visible_fraction = 0.0;
  double distance = 0.0;  // meters
  std::vector<std::string> co_visible_landmarks;
};

struct KeyframeSummary {
  int index = 0;  // 1-based sequence number j
  int step = 0;
  std::vector<CandidateSummary> annotated;
  std::vector<CandidateSummary> raw_context;
};

// Never carries the ground-truth target; see GroundingTruth.
struct GroundingQuery {
  Phase phase = Phase::Initial;
  int step = 0;
  Instruction instruction;
  std::vector<CandidateSummary> annotated;
  std::vector<CandidateSummary> raw_context;
  std::vector<KeyframeSummary> keyframes;  // Reserved only
};

struct GroundingResult {
  bool success = false;
  std::optional<int> identifier;
  std::optional<int> keyframe_index;
  double confidence = 0.0;
};

// Side channel for simulated oracles. Initial/Active: the annotated identifier
// of the true target, if it is in view. Reserved: every (j, i) showing it.
struct GroundingTruth {
  std::optional<int> target_identifier;
  std::vector<std::pair<int, int>> reserved_hits;
};

class GroundingOracle {
 public:
  virtual ~GroundingOracle() = default;
  virtual std::string name() const = 0;
  virtual GroundingResult ground(const GroundingQuery& query, const GroundingTruth& truth) = 0;
};

class PerfectOracle final : public GroundingOracle {
 public:
  std::string name() const override { return "perfect"; }
  GroundingResult ground(const GroundingQuery& query, const GroundingTruth& truth) override;
};

struct QualityParams {
  double a = -1.0;
  double b = 3.0;
  double c = 1.0;
  double e = 1.0;  // weight of landmark co-visibility from raw context
  double d_desired = 1.0;
  std::uint64_t seed = 0;
};

// Fraction of the instruction's landmark classes present among `raw`.
double landmark_context(const Instruction& ins, const std::vector<CandidateSummary>& raw);

// sigma(a + b*vf + c*(1 - |d - d_desired| / d_desired) + e*landmark_ctx)
double correctness_probability(const QualityParams& p, double visible_fraction, double distance,
                               double landmark_ctx);

// Answers correctly with the probability above, otherwise names a same-class
// distractor (lowest identifier) or says false. The draw depends only on
// (seed, step, phase).
class QualityDependentOracle final : public GroundingOracle {
 public:
  explicit QualityDependentOracle(QualityParams params) : params_(params) {}
  std::string name() const override { return "quality"; }
  GroundingResult ground(const GroundingQuery& query, const GroundingTruth& truth) override;
  const QualityParams& params() const { return params_; }

 private:
  QualityParams params_;
};

// Replays a fixed list of answers; running out throws FixtureError.
class ScriptedOracle final : public GroundingOracle {
 public:
  explicit ScriptedOracle(std::vector<GroundingResult> playback) : playback_(std::move(playback)) {}
  static ScriptedOracle from_file(const std::string& path);
  std::string name() const override { return "scripted"; }
  GroundingResult ground(const GroundingQuery& query, const GroundingTruth& truth) override;
  std::size_t consumed() const { return next_; }

 private:
  std::vector<GroundingResult> playback_;
  std::size_t next_ = 0;
};

// POSTs the wire document to an HTTP endpoint. Transport or protocol failures
// throw OracleUnavailable.
class RemoteOracle final : public GroundingOracle {
 public:
  explicit RemoteOracle(std::string url, double timeout_s = 30.0);
  std::string name() const override { return "remote"; }
  GroundingResult ground(const GroundingQuery& query, const GroundingTruth& truth) override;

 private:
  std::string base_;
  std::string path_;
  double timeout_s_;
};

std::string query_to_wire(const GroundingQuery& query);
GroundingQuery query_from_wire(std::string_view text);
std::string result_to_wire(const GroundingResult& result);
// Throws OracleUnavailable on malformed documents.
GroundingResult result_from_wire(std::string_view text);
std::vector<GroundingResult> playback_from_json(std::string_view text);

enum class OracleKind { Perfect, Quality, Scripted, Remote };

struct OracleConfig {
  OracleKind kind = OracleKind::Perfect;
  QualityParams quality;
  std::string scripted_path;
  std::vector<GroundingResult> scripted;  // used when scripted_path is empty
  std::string remote_url;                 // falls back to MAGNAV_ORACLE_URL
  double remote_timeout_s = 30.0;
};

// "perfect", "quality", "scripted:FILE" or "remote".
OracleConfig parse_oracle_spec(std::string_view spec);

// `episode_seed` reseeds the quality oracle so each episode has its own stream.
std::unique_ptr<GroundingOracle> make_oracle(const OracleConfig& cfg, std::uint64_t episode_seed);

}  // namespace magnav
