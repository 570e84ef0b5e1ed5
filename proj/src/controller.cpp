#include "magnav/controller.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>

#include "magnav/rng.hpp"

namespace magnav {

std::vector<CandidateSummary> summarize(const std::vector<Detection>& dets, const World& world,
                                        const Instruction& instruction) {
  std::vector<CandidateSummary> out;
  out.reserve(dets.size());
  for (const Detection& d : dets) {
    CandidateSummary c;
    c.identifier = d.identifier;
    c.class_name = d.class_name;
    if (const SceneObject* obj = world.find(d.object_id)) c.attributes = obj->attributes;
    c.visible_fraction = d.visible_fraction;
    c.distance = d.distance;
    for (const Detection& o : dets) {
      if (&o == &d) continue;
      const auto& lm = instruction.landmark_classes;
      if (std::find(lm.begin(), lm.end(), o.class_name) == lm.end()) continue;
      if (std::find(c.co_visible_landmarks.begin(), c.co_visible_landmarks.end(), o.class_name) ==
          c.co_visible_landmarks.end())
        c.co_visible_landmarks.push_back(o.class_name);
    }
    out.push_back(std::move(c));
  }
  return out;
}

ReservedOutcome reserved_grounding(const MemoryStore& memory, const Instruction& instruction,
                                   GroundingOracle& oracle, int n_samples, const World& world,
                                   const std::string& truth_target_id, bool with_raw_context, int step) {
  ReservedOutcome out;
  if (memory.keyframes().empty()) {
    out.note = "reserved: visual memory empty";
    return out;
  }
  const auto sampled = sample_keyframes(memory.keyframes(), n_samples);

  QueryRecord rec;
  rec.step = step;
  rec.query.phase = Phase::Reserved;
  rec.query.step = step;
  rec.query.instruction = instruction;
  GroundingTruth truth;
  for (std::size_t k = 0; k < sampled.size(); ++k) {
    const VisualMemoryUnit& unit = sampled[k];
    KeyframeSummary kf;
    kf.index = static_cast<int>(k) + 1;
    kf.step = unit.step;
    kf.annotated = summarize(unit.annotated, world, instruction);
    if (with_raw_context) kf.raw_context = summarize(unit.raw_context, world, instruction);
    for (const Detection& d : unit.annotated)
      if (d.object_id == truth_target_id) truth.reserved_hits.emplace_back(kf.index, d.identifier);
    rec.query.keyframes.push_back(std::move(kf));
  }

  try {
    rec.result = oracle.ground(rec.query, truth);
  } catch (const OracleUnavailable& e) {
    rec.result = {};
    rec.note = e.what();
  }

  if (rec.result.success) {
    try {
      if (!rec.result.identifier || !rec.result.keyframe_index)
        throw GroundingIntegrityError("reserved answer lacks keyframe index or identifier");
      const int j = *rec.result.keyframe_index;
      if (j < 1 || j > static_cast<int>(sampled.size()))
        throw GroundingIntegrityError("keyframe index " + std::to_string(j) + " out of range");
      const VisualMemoryUnit& unit = sampled[static_cast<std::size_t>(j - 1)];
      const Cell c = index_position(unit, *rec.result.identifier, memory);
      out.goal = c;
      out.entry_key = unit.entry_keys.at(*rec.result.identifier);
      rec.entry_key = out.entry_key;
      rec.accepted = true;
    } catch (const GroundingIntegrityError& e) {
      rec.note = e.what();
    }
  }
  out.note = rec.note;
  out.record = std::move(rec);
  return out;
}

namespace {

enum class Mode { Exploring, Approaching, Navigating, Finished };

double bearing_from(const AgentPose& pose, Cell to) {
  const double angle = std::atan2(to.y - pose.position.y, to.x - pose.position.x);
  return normalize_angle(angle - pose.heading);
}

Action turn_toward(double bearing) { return bearing > 0 ? Action::TurnLeft : Action::TurnRight; }

class Episode {
 public:
  Episode(const World& world, const AgentPose& start, const Instruction& ins, MemoryStore& memory,
          OccupancyGrid known, const ControllerConfig& cfg, GroundingOracle& oracle, const std::string& truth)
      : world_(world), ins_(ins), memory_(memory), known_(std::move(known)), cfg_(cfg), oracle_(oracle),
        truth_(truth), classes_(ins.classes()) {
    out_.final_pose = start;
    pose_ = start;
    out_.trace.path.push_back(start.position);
  }

  ControllerOutcome run() {
    while (mode_ != Mode::Finished && out_.steps < cfg_.max_steps) {
      const int t = out_.steps;
      reveal(world_.grid, pose_, known_);
      obs_ = observe(world_, pose_, classes_, t);
      assoc_ = associate_and_update(memory_, obs_);
      const bool keyframe = is_keyframe(assoc_.new_keys, memory_, ins_.target_class);
      if (keyframe) memory_.add_keyframe(make_visual_unit(obs_, assoc_));

      if (mode_ == Mode::Exploring && keyframe) initial_grounding(t);

      std::optional<Action> action;
      // A decision can switch mode (e.g. Active rejects), so re-decide a few times.
      for (int guard = 0; guard < 4 && !action && mode_ != Mode::Finished; ++guard) action = decide(t);
      if (!action) {
        if (mode_ != Mode::Finished) log(t, "no action decided");
        break;
      }
      execute(*action);
    }
    if (mode_ != Mode::Finished && out_.steps >= cfg_.max_steps) log(out_.steps, "action budget exhausted");
    out_.final_pose = pose_;
    return std::move(out_);
  }

 private:
  void log(int t, const std::string& msg) { out_.trace.log.push_back("step " + std::to_string(t) + ": " + msg); }

  void reach(Phase p) {
    if (!out_.phase_reached || static_cast<int>(p) > static_cast<int>(*out_.phase_reached)) out_.phase_reached = p;
  }

  GroundingTruth truth_for(const Observation& obs) const {
    GroundingTruth truth;
    for (const Detection& d : obs.annotated)
      if (d.object_id == truth_) truth.target_identifier = d.identifier;
    return truth;
  }

  QueryRecord query_current(Phase phase, int t) {
    QueryRecord rec;
    rec.step = t;
    rec.query.phase = phase;
    rec.query.step = t;
    rec.query.instruction = ins_;
    rec.query.annotated = summarize(obs_.annotated, world_, ins_);
    if (cfg_.ablation.raw_context) rec.query.raw_context = summarize(obs_.raw_context, world_, ins_);
    reach(phase);
    try {
      rec.result = oracle_.ground(rec.query, truth_for(obs_));
    } catch (const OracleUnavailable& e) {
      rec.result = {};
      rec.note = e.what();
      log(t, std::string("oracle unavailable: ") + e.what());
    }
    if (rec.result.success) {
      const auto it = rec.result.identifier ? assoc_.identifier_to_key.find(*rec.result.identifier)
                                            : assoc_.identifier_to_key.end();
      if (it == assoc_.identifier_to_key.end()) {
        rec.note = "answer does not name an annotated candidate";
        log(t, to_string(phase) + " " + rec.note);
      } else {
        rec.entry_key = it->second;
      }
    }
    return rec;
  }

  void initial_grounding(int t) {
    QueryRecord rec = query_current(Phase::Initial, t);
    if (!rec.entry_key) {
      out_.trace.queries.push_back(std::move(rec));
      return;
    }
    rec.accepted = true;
    const int key = *rec.entry_key;
    out_.trace.queries.push_back(std::move(rec));
    if (!cfg_.ablation.active) {
      set_goal(key, Phase::Initial);
      return;
    }
    candidate_ = key;
    replans_ = 0;
    if (plan_viewpoint(t)) mode_ = Mode::Approaching;
  }

  void set_goal(int key, Phase phase) {
    goal_entry_ = key;
    out_.goal = memory_.find(key)->centroid();
    out_.goal_entry = key;
    out_.goal_phase = phase;
    mode_ = Mode::Navigating;
  }

  // Known map with every known-Free cell the agent cannot reach through
  // known-Free cells marked Unknown, so the optimizer treats it as infeasible.
  OccupancyGrid reachable_map() const {
    OccupancyGrid m = known_;
    std::vector<bool> seen(m.size(), false);
    std::queue<Cell> q;
    q.push(pose_.position);
    seen[m.index(pose_.position)] = true;
    while (!q.empty()) {
      const Cell c = q.front();
      q.pop();
      for (const Cell& off : kCompass) {
        const Cell n = c + off;
        if (!known_.is(n, CellState::Free) || seen[m.index(n)] || !move_allowed(known_, c, off)) continue;
        seen[m.index(n)] = true;
        q.push(n);
      }
    }
    for (std::size_t i = 0; i < m.size(); ++i)
      if (m.raw(i) == CellState::Free && !seen[i]) m.set(m.cell_at(i), CellState::Unknown);
    return m;
  }

  BoundarySet candidate_boundary() const {
    const auto& pts = memory_.find(candidate_)->points;
    const std::vector<Cell> v(pts.begin(), pts.end());
    return boundary_points(v);
  }

  bool plan_viewpoint(int t) {
    ViewplanConfig vc = cfg_.viewplan;
    vc.fov = pose_.fov;
    vc.ga.seed = combine_seed(cfg_.seed, static_cast<std::uint64_t>(t));
    const OccupancyGrid feasible = reachable_map();
    const BoundarySet g = candidate_boundary();
    try {
      const Cell here = pose_.position;
      ViewpointSolution s = optimize_ga(feasible, g, vc, std::span<const Cell>(&here, 1));
      if (s.score.p_feasibility > 0) throw NoFeasibleViewpoint("optimizer found no reachable free cell");
      view_ = s;
      out_.trace.viewpoints.push_back({t, candidate_, s.cell, s.score});
      return true;
    } catch (const NoFeasibleViewpoint& e) {
      log(t, std::string("no viewpoint, skipping active phase: ") + e.what());
      mode_ = Mode::Exploring;
      return false;
    }
  }

  std::optional<Action> decide(int t) {
    switch (mode_) {
      case Mode::Exploring: return explore(t);
      case Mode::Approaching: return approach(t);
      case Mode::Navigating: return navigate(t);
      case Mode::Finished: return std::nullopt;
    }
    return std::nullopt;
  }

  std::optional<Action> approach(int t) {
    const OccupancyGrid feasible = reachable_map();
    const BoundarySet g = candidate_boundary();
    const ViewpointScore now = objective(feasible, view_.cell, g, cfg_.viewplan);
    if (now.total > view_.score.total + 1e-9) {
      if (replans_ < cfg_.max_replans) {
        ++replans_;
        log(t, "viewpoint degraded, re-planning");
        if (!plan_viewpoint(t)) return std::nullopt;
      } else if (now.p_feasibility > 0) {
        log(t, "viewpoint unreachable, skipping active phase");
        mode_ = Mode::Exploring;
        return std::nullopt;
      }
    }

    if (pose_.position == view_.cell) {
      const Cell obj = memory_.find(candidate_)->centroid();
      if (obj != pose_.position) {
        const double b = bearing_from(pose_, obj);
        if (std::abs(b) > cfg_.align_tolerance + 1e-9) return turn_toward(b);
      }
      return active_grounding(t);
    }

    const auto field = fmm_field(known_, view_.cell, FmmOptions{0.0});
    auto a = greedy_action(field, pose_, 0.0);
    if (!a || *a == Action::Stop) {
      log(t, "viewpoint unreachable, skipping active phase");
      mode_ = Mode::Exploring;
      return std::nullopt;
    }
    return a;
  }

  std::optional<Action> active_grounding(int t) {
    QueryRecord rec = query_current(Phase::Active, t);
    const bool same = rec.entry_key && *rec.entry_key == candidate_;
    if (rec.result.success && rec.entry_key && !same) rec.note = "active answer names a different entry";
    rec.accepted = same;
    out_.trace.queries.push_back(std::move(rec));
    if (same) {
      set_goal(candidate_, Phase::Active);
    } else {
      log(t, "active grounding rejected candidate, resuming exploration");
      mode_ = Mode::Exploring;
    }
    return std::nullopt;
  }

  std::vector<FieldSeed> goal_seeds() const {
    std::vector<FieldSeed> seeds;
    const auto& pts = memory_.find(goal_entry_)->points;
    std::set<Cell> around;
    for (const Cell& p : pts)
      for (const Cell& off : kCompass) around.insert(p + off);
    const double res = known_.resolution();
    for (const Cell& c : around) {
      if (!known_.in_bounds(c) || known_.at(c) == CellState::Obstacle || pts.count(c)) continue;
      double d = kInfinity;
      for (const Cell& p : pts) d = std::min(d, cell_distance(c, p) * res);
      seeds.push_back({c, d});
    }
    return seeds;
  }

  std::optional<Action> navigate(int t) {
    const auto seeds = goal_seeds();
    if (seeds.empty()) {
      log(t, "goal has no approachable cell");
      return finish_failed(t);
    }
    const auto field = fmm_field(known_, seeds, FmmOptions{cfg_.unknown_speed});
    const auto a = greedy_action(field, pose_, cfg_.stop_radius);
    if (!a) {
      log(t, "goal unreachable");
      return finish_failed(t);
    }
    return a;
  }

  std::optional<Action> finish_failed(int) {
    mode_ = Mode::Finished;
    return std::nullopt;
  }

  bool is_frontier(Cell c) const {
    if (!known_.is(c, CellState::Free)) return false;
    for (const Cell& off : kCompass)
      if (known_.is(c + off, CellState::Unknown)) return true;
    return false;
  }

  std::optional<Action> explore(int t) {
    if (out_.steps >= cfg_.explore_budget) return end_exploration(t, "exploration budget spent");

    if (frontier_ && !is_frontier(*frontier_)) {
      frontier_.reset();
      faced_.clear();
    }
    for (int attempt = 0; attempt < 64; ++attempt) {
      if (!frontier_) {
        const auto agent_field = fmm_field(known_, pose_.position, FmmOptions{cfg_.unknown_speed});
        std::vector<Frontier> fs;
        for (const Frontier& f : detect_frontiers(known_))
          if (!blacklist_.count(f.cell)) fs.push_back(f);
        const auto pick = select_frontier(fs, memory_, ins_.landmark_classes, agent_field, cfg_.frontier);
        if (!pick) return end_exploration(t, "no reachable frontier left");
        frontier_ = pick->cell;
        faced_.clear();
      }

      if (pose_.position == *frontier_) {
        // Look at each unknown neighbour once, then give up on this cell.
        for (int k = 0; k < 8; ++k) {
          const Cell n = pose_.position + kCompass[static_cast<std::size_t>(k)];
          if (!known_.is(n, CellState::Unknown) || faced_.count(k)) continue;
          const double b = normalize_angle(k * (kPi / 4) - pose_.heading);
          if (std::abs(b) <= pose_.fov / 2 - 1e-9) {
            faced_.insert(k);
            continue;
          }
          return turn_toward(b);
        }
        blacklist_.insert(*frontier_);
        frontier_.reset();
        continue;
      }

      const auto field = fmm_field(known_, *frontier_, FmmOptions{cfg_.unknown_speed});
      const auto a = greedy_action(field, pose_, 0.0);
      if (a && *a != Action::Stop) return a;
      blacklist_.insert(*frontier_);
      frontier_.reset();
    }
    return end_exploration(t, "frontier selection did not settle");
  }

  std::optional<Action> end_exploration(int t, const std::string& why) {
    log(t, why);
    if (reserved_done_ || !cfg_.ablation.reserved) {
      if (!cfg_.ablation.reserved) log(t, "reserved grounding disabled");
      return finish_failed(t);
    }
    reserved_done_ = true;
    reach(Phase::Reserved);
    ReservedOutcome r = reserved_grounding(memory_, ins_, oracle_, cfg_.n_samples, world_, truth_,
                                           cfg_.ablation.raw_context, t);
    if (r.record) out_.trace.queries.push_back(std::move(*r.record));
    if (!r.note.empty()) log(t, r.note);
    if (!r.entry_key) return finish_failed(t);
    set_goal(*r.entry_key, Phase::Reserved);
    return std::nullopt;
  }

  void execute(Action a) {
    const StepResult r = step_agent(pose_, a, world_.grid);
    if (r.blocked) {
      // Contact: the cells the move would have touched become known, even
      // when the side cells of a diagonal move are outside the camera view.
      const Cell off = kCompass[static_cast<std::size_t>(compass_index(pose_.heading))];
      for (const Cell& c : {pose_.position + off, Cell{pose_.position.x + off.x, pose_.position.y},
                            Cell{pose_.position.x, pose_.position.y + off.y}})
        if (world_.grid.in_bounds(c)) known_.set(c, world_.grid.at(c));
      log(out_.steps, "move blocked");
    }
    pose_ = r.pose;
    out_.path_length += r.distance_moved;
    ++out_.steps;
    out_.trace.actions.push_back(a);
    out_.trace.path.push_back(pose_.position);
    if (a == Action::Stop) {
      out_.stopped = true;
      mode_ = Mode::Finished;
    }
  }

  const World& world_;
  const Instruction& ins_;
  MemoryStore& memory_;
  OccupancyGrid known_;
  const ControllerConfig& cfg_;
  GroundingOracle& oracle_;
  const std::string& truth_;
  const std::vector<std::string> classes_;

  ControllerOutcome out_;
  AgentPose pose_;
  Mode mode_ = Mode::Exploring;
  Observation obs_;
  Association assoc_;

  int candidate_ = -1;
  ViewpointSolution view_{};
  int replans_ = 0;
  int goal_entry_ = -1;
  bool reserved_done_ = false;

  std::optional<Cell> frontier_;
  std::set<int> faced_;
  std::set<Cell> blacklist_;
};

}  // namespace

ControllerOutcome run_controller(const World& world, const AgentPose& start, const Instruction& instruction,
                                 MemoryStore& memory, OccupancyGrid known, const ControllerConfig& cfg,
                                 GroundingOracle& oracle, const std::string& truth_target_id) {
  if (!world.grid.is(start.position, CellState::Free))
    throw InputError("start pose is not on a free cell " + to_string(start.position));
  if (known.width() != world.grid.width() || known.height() != world.grid.height())
    throw InputError("known map size differs from the world");
  if (instruction.target_class.empty()) throw InputError("instruction has no target class");
  Episode ep(world, start, instruction, memory, std::move(known), cfg, oracle, truth_target_id);
  return ep.run();
}

}  // namespace magnav
