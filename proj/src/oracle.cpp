#include "magnav/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "magnav/common.hpp"
#include "magnav/rng.hpp"

namespace magnav {

using nlohmann::json;

std::string to_string(Phase p) {
  switch (p) {
    case Phase::Initial: return "Initial";
    case Phase::Active: return "Active";
    case Phase::Reserved: return "Reserved";
  }
  return "?";
}

Phase phase_from_string(std::string_view s) {
  if (s == "Initial") return Phase::Initial;
  if (s == "Active") return Phase::Active;
  if (s == "Reserved") return Phase::Reserved;
  throw InputError("unknown phase '" + std::string(s) + "'");
}

GroundingResult PerfectOracle::ground(const GroundingQuery& query, const GroundingTruth& truth) {
  GroundingResult r;
  r.confidence = 1.0;
  if (query.phase != Phase::Reserved) {
    if (truth.target_identifier) {
      r.success = true;
      r.identifier = truth.target_identifier;
    }
    return r;
  }
  // Best view of the target: most of it visible, then closest, then earliest.
  const CandidateSummary* best = nullptr;
  std::pair<int, int> best_hit{};
  for (const auto& [j, i] : truth.reserved_hits) {
    for (const auto& kf : query.keyframes) {
      if (kf.index != j) continue;
      for (const auto& c : kf.annotated) {
        if (c.identifier != i) continue;
        const bool take = !best || c.visible_fraction > best->visible_fraction ||
                          (c.visible_fraction == best->visible_fraction && c.distance < best->distance);
        if (take) {
          best = &c;
          best_hit = {j, i};
        }
      }
    }
  }
  if (best) {
    r.success = true;
    r.keyframe_index = best_hit.first;
    r.identifier = best_hit.second;
  }
  return r;
}

double landmark_context(const Instruction& ins, const std::vector<CandidateSummary>& raw) {
  if (ins.landmark_classes.empty()) return 0.0;
  int present = 0;
  for (const auto& l : ins.landmark_classes) {
    if (std::any_of(raw.begin(), raw.end(), [&](const CandidateSummary& c) { return c.class_name == l; }))
      ++present;
  }
  return static_cast<double>(present) / static_cast<double>(ins.landmark_classes.size());
}

double correctness_probability(const QualityParams& p, double visible_fraction, double distance,
                               double landmark_ctx) {
  const double closeness = 1.0 - std::abs(distance - p.d_desired) / p.d_desired;
  const double z = p.a + p.b * visible_fraction + p.c * closeness + p.e * landmark_ctx;
  return 1.0 / (1.0 + std::exp(-z));
}

namespace {

const CandidateSummary* find_candidate(const std::vector<CandidateSummary>& list, int id) {
  for (const auto& c : list)
    if (c.identifier == id) return &c;
  return nullptr;
}

double draw(std::uint64_t seed, int step, Phase phase) {
  Rng rng(combine_seed(combine_seed(seed, static_cast<std::uint64_t>(step)), static_cast<std::uint64_t>(phase)));
  return rng.uniform01();
}

}  // namespace

GroundingResult QualityDependentOracle::ground(const GroundingQuery& query, const GroundingTruth& truth) {
  const std::string& cls = query.instruction.target_class;
  GroundingResult r;

  if (query.phase != Phase::Reserved) {
    const double ctx = landmark_context(query.instruction, query.raw_context);
    auto prob = [&](const CandidateSummary& c) {
      return correctness_probability(params_, c.visible_fraction, c.distance, ctx);
    };
    const CandidateSummary* target =
        truth.target_identifier ? find_candidate(query.annotated, *truth.target_identifier) : nullptr;
    const CandidateSummary* distractor = nullptr;
    double p = -1.0;
    for (const auto& c : query.annotated) {
      if (c.class_name != cls || &c == target) continue;
      if (!distractor) distractor = &c;
      if (!target) p = std::max(p, prob(c));
    }
    if (target) p = prob(*target);
    if (p < 0) return r;  // nothing of the target class in view

    const bool correct = draw(params_.seed, query.step, query.phase) < p;
    r.confidence = p;
    if (correct && target) {
      r.success = true;
      r.identifier = target->identifier;
    } else if (!correct && distractor) {
      r.success = true;
      r.identifier = distractor->identifier;
    }
    return r;
  }

  struct Option {
    int j, i;
    double p;
  };
  std::vector<Option> hits, others;
  for (const auto& kf : query.keyframes) {
    const double ctx = landmark_context(query.instruction, kf.raw_context);
    for (const auto& c : kf.annotated) {
      if (c.class_name != cls) continue;
      const Option o{kf.index, c.identifier, correctness_probability(params_, c.visible_fraction, c.distance, ctx)};
      const bool is_hit = std::find(truth.reserved_hits.begin(), truth.reserved_hits.end(),
                                    std::pair<int, int>{o.j, o.i}) != truth.reserved_hits.end();
      (is_hit ? hits : others).push_back(o);
    }
  }
  auto best_of = [](const std::vector<Option>& v) {
    const Option* b = nullptr;
    for (const auto& o : v)
      if (!b || o.p > b->p) b = &o;
    return b;
  };
  const Option* hit = best_of(hits);
  const Option* wrong = others.empty() ? nullptr : &others.front();
  const double p = hit ? hit->p : (wrong ? best_of(others)->p : -1.0);
  if (p < 0) return r;

  const bool correct = draw(params_.seed, query.step, query.phase) < p;
  r.confidence = p;
  const Option* pick = correct ? hit : wrong;
  if (pick) {
    r.success = true;
    r.keyframe_index = pick->j;
    r.identifier = pick->i;
  }
  return r;
}

GroundingResult ScriptedOracle::ground(const GroundingQuery&, const GroundingTruth&) {
  if (next_ >= playback_.size())
    throw FixtureError("scripted oracle exhausted after " + std::to_string(playback_.size()) + " answers");
  return playback_[next_++];
}

namespace {

json candidate_json(const CandidateSummary& c) {
  return {{"identifier", c.identifier},
          {"class", c.class_name},
          {"attributes", c.attributes},
          {"visible_fraction", c.visible_fraction},
          {"distance_m", c.distance},
          {"co_visible_landmarks", c.co_visible_landmarks}};
}

json candidates_json(const std::vector<CandidateSummary>& v) {
  json out = json::array();
  for (const auto& c : v) out.push_back(candidate_json(c));
  return out;
}

CandidateSummary candidate_from(const json& j) {
  CandidateSummary c;
  c.identifier = j.at("identifier").get<int>();
  c.class_name = j.at("class").get<std::string>();
  c.attributes = j.value("attributes", std::vector<std::string>{});
  c.visible_fraction = j.value("visible_fraction", 0.0);
  c.distance = j.value("distance_m", 0.0);
  c.co_visible_landmarks = j.value("co_visible_landmarks", std::vector<std::string>{});
  return c;
}

std::vector<CandidateSummary> candidates_from(const json& j) {
  std::vector<CandidateSummary> out;
  for (const auto& e : j) out.push_back(candidate_from(e));
  return out;
}

GroundingResult result_from(const json& j) {
  GroundingResult r;
  r.success = j.at("success").get<bool>();
  if (j.contains("identifier") && !j["identifier"].is_null()) r.identifier = j["identifier"].get<int>();
  if (j.contains("keyframe_index") && !j["keyframe_index"].is_null())
    r.keyframe_index = j["keyframe_index"].get<int>();
  r.confidence = j.value("confidence", r.success ? 1.0 : 0.0);
  return r;
}

}  // namespace

std::string query_to_wire(const GroundingQuery& q) {
  json j = {{"phase", to_string(q.phase)},
            {"step", q.step},
            {"instruction_text", q.instruction.raw_text},
            {"target_class", q.instruction.target_class},
            {"landmark_classes", q.instruction.landmark_classes},
            {"candidates", candidates_json(q.annotated)},
            {"raw_context", candidates_json(q.raw_context)}};
  if (q.phase == Phase::Reserved) {
    json kfs = json::array();
    for (const auto& kf : q.keyframes)
      kfs.push_back({{"keyframe_index", kf.index},
                     {"step", kf.step},
                     {"candidates", candidates_json(kf.annotated)},
                     {"raw_context", candidates_json(kf.raw_context)}});
    j["keyframes"] = std::move(kfs);
  }
  return j.dump();
}

GroundingQuery query_from_wire(std::string_view text) {
  try {
    const json j = json::parse(text);
    GroundingQuery q;
    q.phase = phase_from_string(j.at("phase").get<std::string>());
    q.step = j.value("step", 0);
    q.instruction.raw_text = j.value("instruction_text", "");
    q.instruction.target_class = j.value("target_class", "");
    q.instruction.landmark_classes = j.value("landmark_classes", std::vector<std::string>{});
    q.annotated = candidates_from(j.at("candidates"));
    q.raw_context = candidates_from(j.value("raw_context", json::array()));
    if (j.contains("keyframes")) {
      for (const auto& k : j["keyframes"]) {
        KeyframeSummary kf;
        kf.index = k.at("keyframe_index").get<int>();
        kf.step = k.value("step", 0);
        kf.annotated = candidates_from(k.at("candidates"));
        kf.raw_context = candidates_from(k.value("raw_context", json::array()));
        q.keyframes.push_back(std::move(kf));
      }
    }
    return q;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed grounding query: ") + e.what());
  }
}

std::string result_to_wire(const GroundingResult& r) {
  json j = {{"success", r.success}, {"confidence", r.confidence}};
  if (r.identifier) j["identifier"] = *r.identifier;
  if (r.keyframe_index) j["keyframe_index"] = *r.keyframe_index;
  return j.dump();
}

GroundingResult result_from_wire(std::string_view text) {
  try {
    return result_from(json::parse(text));
  } catch (const json::exception& e) {
    throw OracleUnavailable(std::string("malformed grounding response: ") + e.what());
  }
}

std::vector<GroundingResult> playback_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    if (!j.is_array()) throw FixtureError("scripted playback must be a JSON array");
    std::vector<GroundingResult> out;
    for (const auto& e : j) out.push_back(result_from(e));
    return out;
  } catch (const json::exception& e) {
    throw FixtureError(std::string("bad scripted playback: ") + e.what());
  }
}

ScriptedOracle ScriptedOracle::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FixtureError("cannot open scripted playback " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ScriptedOracle(playback_from_json(ss.str()));
}

RemoteOracle::RemoteOracle(std::string url, double timeout_s) : timeout_s_(timeout_s) {
  if (url.empty()) throw InputError("remote oracle needs oracle.remote_url or MAGNAV_ORACLE_URL");
  const auto scheme = url.find("://");
  const auto slash = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  base_ = slash == std::string::npos ? url : url.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : url.substr(slash);
}

GroundingResult RemoteOracle::ground(const GroundingQuery& query, const GroundingTruth&) {
  httplib::Client cli(base_);
  const auto secs = static_cast<time_t>(timeout_s_);
  const auto usecs = static_cast<time_t>((timeout_s_ - static_cast<double>(secs)) * 1e6);
  cli.set_connection_timeout(secs, usecs);
  cli.set_read_timeout(secs, usecs);
  cli.set_write_timeout(secs, usecs);
  auto res = cli.Post(path_, query_to_wire(query), "application/json");
  if (!res) throw OracleUnavailable("remote oracle: " + httplib::to_string(res.error()));
  if (res->status != 200) throw OracleUnavailable("remote oracle: HTTP " + std::to_string(res->status));
  return result_from_wire(res->body);
}

OracleConfig parse_oracle_spec(std::string_view spec) {
  OracleConfig cfg;
  if (spec == "perfect") {
    cfg.kind = OracleKind::Perfect;
  } else if (spec == "quality") {
    cfg.kind = OracleKind::Quality;
  } else if (spec.rfind("scripted:", 0) == 0) {
    cfg.kind = OracleKind::Scripted;
    cfg.scripted_path = std::string(spec.substr(9));
  } else if (spec == "remote") {
    cfg.kind = OracleKind::Remote;
  } else {
    throw InputError("unknown oracle '" + std::string(spec) + "' (perfect|quality|scripted:FILE|remote)");
  }
  return cfg;
}

std::unique_ptr<GroundingOracle> make_oracle(const OracleConfig& cfg, std::uint64_t episode_seed) {
  switch (cfg.kind) {
    case OracleKind::Perfect: return std::make_unique<PerfectOracle>();
    case OracleKind::Quality: {
      QualityParams p = cfg.quality;
      p.seed = combine_seed(p.seed, episode_seed);
      return std::make_unique<QualityDependentOracle>(p);
    }
    case OracleKind::Scripted:
      if (!cfg.scripted_path.empty())
        return std::make_unique<ScriptedOracle>(ScriptedOracle::from_file(cfg.scripted_path));
      return std::make_unique<ScriptedOracle>(cfg.scripted);
    case OracleKind::Remote: {
      std::string url = cfg.remote_url;
      if (url.empty())
        if (const char* env = std::getenv("MAGNAV_ORACLE_URL")) url = env;
      return std::make_unique<RemoteOracle>(url, cfg.remote_timeout_s);
    }
  }
  throw InputError("unknown oracle kind");
}

}  // namespace magnav
