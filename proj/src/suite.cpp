#include "magnav/suite.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "magnav/metrics.hpp"
#include "magnav/rng.hpp"

namespace magnav {

using nlohmann::json;

Arm arm_by_name(const std::string& name) {
  if (name == "full") return {name, {true, true, true}};
  if (name == "no-ag") return {name, {false, true, true}};
  if (name == "no-mg") return {name, {true, false, true}};
  if (name == "no-amg") return {name, {false, false, true}};
  if (name == "no-amg-noraw") return {name, {false, false, false}};
  throw InputError("unknown arm '" + name + "' (full|no-ag|no-mg|no-amg|no-amg-noraw)");
}

std::vector<Arm> parse_arms(const std::string& comma_list) {
  std::vector<Arm> out;
  std::stringstream ss(comma_list);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(arm_by_name(item));
  if (out.empty()) throw InputError("no arms given");
  return out;
}

std::vector<Arm> ablation_arms() { return parse_arms("full,no-ag,no-mg,no-amg,no-amg-noraw"); }

std::uint64_t episode_seed(std::uint64_t suite_seed, const EpisodeSpec& spec) {
  return combine_seed(combine_seed(suite_seed, spec.seed), hash_string(spec.name));
}

ControllerConfig controller_config(const EpisodeSpec& spec, const Arm& arm, std::uint64_t seed) {
  ControllerConfig cfg;
  cfg.max_steps = spec.max_steps;
  cfg.explore_budget = spec.explore_budget;
  cfg.viewplan = spec.viewplan;
  cfg.ablation = arm.flags;
  cfg.seed = seed;
  return cfg;
}

EpisodeResult run_episode(const EpisodeSpec& spec, const Arm& arm, const RunOptions& opts) {
  const std::uint64_t seed = episode_seed(opts.suite_seed, spec);
  const OracleConfig oc = opts.oracle ? *opts.oracle : spec.oracle.value_or(OracleConfig{});
  auto oracle = make_oracle(oc, seed);
  auto memory = std::make_shared<MemoryStore>(spec.delta_sim);
  const ControllerConfig cfg = controller_config(spec, arm, seed);

  EpisodeResult r;
  r.scenario = spec.name;
  r.arm = arm.name;
  r.outcome = run_controller(spec.world, spec.start, spec.instruction, *memory, spec.initial_known, cfg, *oracle,
                             spec.truth_target_id);

  const SceneObject* target = spec.world.find(spec.truth_target_id);
  const OccupancyGrid& g = spec.world.grid;
  r.steps = r.outcome.steps;
  r.p = r.outcome.path_length;
  r.dtg = compute_dtg(r.outcome.final_pose.position, target->footprint, g.resolution());
  const auto goals = goal_cells(g, target->footprint);
  r.l = goals.empty() ? kInfinity : shortest_path_length(g, spec.start.position, goals);
  r.l_finite = r.l < kInfinity;
  r.success = is_success(r.outcome.stopped, r.steps, r.dtg);
  r.spl = episode_spl(r.success, r.p, r.l);
  r.phase = r.outcome.phase_reached ? to_string(*r.outcome.phase_reached) : "None";
  if (opts.keep_trace) r.memory = std::move(memory);
  return r;
}

const ArmSummary& SuiteReport::arm(const std::string& name) const {
  for (const auto& a : arms)
    if (a.arm == name) return a;
  throw InputError("arm '" + name + "' not in report");
}

SuiteReport run_suite(std::span<const EpisodeSpec> specs, std::span<const Arm> arms, const RunOptions& opts) {
  if (specs.empty()) throw InputError("suite needs at least one scenario");
  SuiteReport report;
  const std::size_t n = specs.size() * arms.size();
  report.rows.resize(n);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&]() {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        report.rows[i] = run_episode(specs[i / arms.size()], arms[i % arms.size()], opts);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  unsigned threads = opts.threads > 0 ? static_cast<unsigned>(opts.threads) : std::thread::hardware_concurrency();
  threads = std::clamp<unsigned>(threads, 1, static_cast<unsigned>(n));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  for (const Arm& a : arms) {
    ArmSummary s;
    s.arm = a.name;
    for (const auto& r : report.rows) {
      if (r.arm != a.name) continue;
      ++s.episodes;
      s.successes += r.success ? 1 : 0;
      s.spl += r.spl;
      s.dtg += r.dtg;
    }
    if (s.episodes > 0) {
      s.sr = static_cast<double>(s.successes) / s.episodes;
      s.spl /= s.episodes;
      s.dtg /= s.episodes;
    }
    report.arms.push_back(s);
  }
  return report;
}

namespace {

std::string fixed(double v) {
  if (!(v < kInfinity)) return "inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

std::string report_csv(const SuiteReport& report) {
  std::string out = "scenario,arm,success,steps,p,l,spl,dtg,phase\n";
  for (const auto& r : report.rows) {
    out += r.scenario + ',' + r.arm + ',' + (r.success ? "1" : "0") + ',' + std::to_string(r.steps) + ',' +
           fixed(r.p) + ',' + fixed(r.l) + ',' + fixed(r.spl) + ',' + fixed(r.dtg) + ',' + r.phase + '\n';
  }
  return out;
}

std::string summary_table(const SuiteReport& report) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-14s %8s %8s %8s %8s\n", "arm", "episodes", "SR", "SPL", "DTG");
  out += buf;
  for (const auto& a : report.arms) {
    std::snprintf(buf, sizeof buf, "%-14s %8d %8.3f %8.3f %8.3f\n", a.arm.c_str(), a.episodes, a.sr, a.spl, a.dtg);
    out += buf;
  }
  return out;
}

std::string trace_json(const EpisodeResult& r) {
  const ControllerOutcome& o = r.outcome;
  json queries = json::array();
  for (const auto& q : o.trace.queries) {
    json jq = json::parse(query_to_wire(q.query));
    queries.push_back({{"step", q.step},
                       {"phase", to_string(q.query.phase)},
                       {"query", jq},
                       {"result", json::parse(result_to_wire(q.result))},
                       {"entry_key", q.entry_key ? json(*q.entry_key) : json()},
                       {"accepted", q.accepted},
                       {"note", q.note}});
  }
  json viewpoints = json::array();
  for (const auto& v : o.trace.viewpoints)
    viewpoints.push_back({{"step", v.step},
                          {"entry_key", v.entry_key},
                          {"cell", {v.cell.x, v.cell.y}},
                          {"r_visible", v.score.r_visible},
                          {"r_fov", v.score.r_fov},
                          {"p_distance", v.score.p_distance},
                          {"p_feasibility", v.score.p_feasibility},
                          {"total", v.score.total}});
  json actions = json::array();
  for (Action a : o.trace.actions) actions.push_back(to_string(a));
  json path = json::array();
  for (const Cell& c : o.trace.path) path.push_back({c.x, c.y});

  json j = {{"scenario", r.scenario},
            {"arm", r.arm},
            {"success", r.success},
            {"steps", r.steps},
            {"p", r.p},
            {"l", r.l_finite ? json(r.l) : json()},
            {"spl", r.spl},
            {"dtg", r.dtg},
            {"phase", r.phase},
            {"goal", o.goal ? json({o.goal->x, o.goal->y}) : json()},
            {"goal_entry", o.goal_entry ? json(*o.goal_entry) : json()},
            {"goal_phase", o.goal_phase ? json(to_string(*o.goal_phase)) : json()},
            {"queries", queries},
            {"viewpoints", viewpoints},
            {"actions", actions},
            {"path", path},
            {"log", o.trace.log}};

  if (r.memory) {
    json entries = json::array();
    for (const auto& [key, e] : r.memory->objects()) {
      const Cell c = e.centroid();
      entries.push_back(
          {{"key", key}, {"class", e.class_name}, {"centroid", {c.x, c.y}}, {"observations", e.observations}});
    }
    json keyframes = json::array();
    for (const auto& k : r.memory->keyframes()) {
      json ids = json::array();
      for (const auto& d : k.annotated) ids.push_back(d.identifier);
      keyframes.push_back({{"step", k.step},
                           {"pose", {{"x", k.pose.position.x}, {"y", k.pose.position.y}, {"heading", k.pose.heading}}},
                           {"identifiers", ids}});
    }
    j["memory"] = {{"entries", entries}, {"keyframes", keyframes}};
  }
  return j.dump(1);
}

}  // namespace magnav
