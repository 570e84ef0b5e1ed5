#include "magnav/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "magnav/rng.hpp"

namespace magnav {

using nlohmann::json;
namespace fs = std::filesystem;

std::vector<double> synthetic_feature(const std::string& key, int dim) {
  Rng rng(hash_string(key));
  std::vector<double> f(static_cast<std::size_t>(dim));
  double norm = 0.0;
  while (norm < 1e-6) {
    norm = 0.0;
    for (double& v : f) {
      v = 2.0 * rng.uniform01() - 1.0;
      norm += v * v;
    }
  }
  norm = std::sqrt(norm);
  for (double& v : f) v /= norm;
  return f;
}

void validate(const EpisodeSpec& spec) {
  auto fail = [&](const std::string& msg) { throw LoadError("scenario '" + spec.name + "': " + msg); };
  const OccupancyGrid& g = spec.world.grid;
  if (spec.initial_known.width() != g.width() || spec.initial_known.height() != g.height())
    fail("initial map size differs from the grid");
  if (!g.is(spec.start.position, CellState::Free)) fail("start " + to_string(spec.start.position) + " is not Free");
  if (!(spec.start.fov > 0 && spec.start.fov < kTwoPi)) fail("fov must be in (0, 2pi)");
  if (!(spec.start.sense_range > 0)) fail("sense_range must be > 0");
  if (spec.instruction.target_class.empty()) fail("instruction has no target class");
  if (!(spec.delta_sim > 0 && spec.delta_sim < 1)) fail("delta_sim must be in (0, 1)");
  if (spec.max_steps < 1) fail("max_steps must be >= 1");
  std::vector<std::string> ids;
  for (const SceneObject& o : spec.world.objects) {
    if (o.id.empty()) fail("object without id");
    if (std::find(ids.begin(), ids.end(), o.id) != ids.end()) fail("duplicate object id '" + o.id + "'");
    ids.push_back(o.id);
    if (o.footprint.empty()) fail("object '" + o.id + "' has an empty footprint");
    for (const Cell& c : o.footprint) {
      if (!g.in_bounds(c)) fail("object '" + o.id + "' footprint out of bounds " + to_string(c));
      if (g.at(c) != CellState::Obstacle) fail("object '" + o.id + "' footprint cell not Obstacle");
    }
    double n = 0;
    for (double v : o.feature) n += v * v;
    if (std::abs(std::sqrt(n) - 1.0) > 1e-6) fail("object '" + o.id + "' feature is not unit norm");
  }
  if (!spec.world.find(spec.truth_target_id)) fail("truth target '" + spec.truth_target_id + "' not among objects");
  try {
    spec.viewplan.validate();
  } catch (const InputError& e) {
    fail(e.what());
  }
}

namespace {

Cell cell_from(const json& j) {
  if (j.is_array() && j.size() == 2) return {j[0].get<int>(), j[1].get<int>()};
  return {j.at("x").get<int>(), j.at("y").get<int>()};
}

AblationFlags ablation_from(const json& j) {
  AblationFlags f;
  f.active = j.value("active", true);
  f.reserved = j.value("reserved", true);
  f.raw_context = j.value("raw_context", true);
  return f;
}

OracleConfig oracle_from(const json& j, const std::string& base_dir) {
  if (j.is_string()) {
    OracleConfig cfg = parse_oracle_spec(j.get<std::string>());
    if (!cfg.scripted_path.empty() && fs::path(cfg.scripted_path).is_relative())
      cfg.scripted_path = (fs::path(base_dir) / cfg.scripted_path).string();
    return cfg;
  }
  const std::string kind = j.at("kind").get<std::string>();
  OracleConfig cfg = parse_oracle_spec(kind == "scripted" ? "scripted:" + j.value("file", std::string()) : kind);
  if (cfg.kind == OracleKind::Scripted) {
    if (j.contains("playback")) cfg.scripted = playback_from_json(j["playback"].dump());
    if (!cfg.scripted_path.empty() && fs::path(cfg.scripted_path).is_relative())
      cfg.scripted_path = (fs::path(base_dir) / cfg.scripted_path).string();
  }
  if (cfg.kind == OracleKind::Quality) {
    cfg.quality.a = j.value("a", cfg.quality.a);
    cfg.quality.b = j.value("b", cfg.quality.b);
    cfg.quality.c = j.value("c", cfg.quality.c);
    cfg.quality.e = j.value("e", cfg.quality.e);
    cfg.quality.seed = j.value("seed", cfg.quality.seed);
  }
  if (cfg.kind == OracleKind::Remote) {
    cfg.remote_url = j.value("remote_url", std::string());
    cfg.remote_timeout_s = j.value("timeout_s", cfg.remote_timeout_s);
  }
  return cfg;
}

}  // namespace

EpisodeSpec parse_episode(const std::string& text, const std::string& base_dir) {
  EpisodeSpec spec;
  try {
    const json j = json::parse(text);
    spec.name = j.at("name").get<std::string>();

    const json& gj = j.at("grid");
    const double res = gj.value("resolution", 0.25);
    const auto rows = gj.at("rows").get<std::vector<std::string>>();
    if (rows.empty() || rows.front().empty()) throw LoadError("scenario '" + spec.name + "': empty grid");
    const int h = static_cast<int>(rows.size());
    const int w = static_cast<int>(rows.front().size());
    if (!(res > 0)) throw LoadError("scenario '" + spec.name + "': resolution must be > 0");
    OccupancyGrid truth(w, h, res, CellState::Free);
    OccupancyGrid known(w, h, res, CellState::Free);
    for (int y = 0; y < h; ++y) {
      if (static_cast<int>(rows[static_cast<std::size_t>(y)].size()) != w)
        throw LoadError("scenario '" + spec.name + "': ragged grid row " + std::to_string(y));
      for (int x = 0; x < w; ++x) {
        const char ch = rows[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)];
        switch (ch) {
          case '.': break;
          case '#':
            truth.set({x, y}, CellState::Obstacle);
            known.set({x, y}, CellState::Obstacle);
            break;
          case '?': known.set({x, y}, CellState::Unknown); break;
          default:
            throw LoadError("scenario '" + spec.name + "': bad grid character '" + std::string(1, ch) + "'");
        }
      }
    }

    for (const json& oj : j.at("objects")) {
      SceneObject o;
      o.id = oj.at("id").get<std::string>();
      o.class_name = oj.at("class").get<std::string>();
      o.attributes = oj.value("attributes", std::vector<std::string>{});
      for (const json& c : oj.at("footprint")) o.footprint.push_back(cell_from(c));
      o.feature = oj.contains("feature") ? oj["feature"].get<std::vector<double>>() : synthetic_feature(o.id);
      for (const Cell& c : o.footprint) {
        if (!truth.in_bounds(c)) continue;  // reported by validate()
        truth.set(c, CellState::Obstacle);
        known.set(c, CellState::Obstacle);
      }
      spec.world.objects.push_back(std::move(o));
    }
    if (gj.value("hidden", true)) known = OccupancyGrid(w, h, res, CellState::Unknown);
    spec.world.grid = std::move(truth);
    spec.initial_known = std::move(known);

    const json& ij = j.at("instruction");
    if (ij.is_string()) {
      spec.instruction = parse_instruction(ij.get<std::string>());
    } else {
      spec.instruction.raw_text = ij.value("text", std::string());
      spec.instruction.target_class = ij.at("target").get<std::string>();
      spec.instruction.landmark_classes = ij.value("landmarks", std::vector<std::string>{});
      spec.instruction.target_attributes = ij.value("target_attributes", std::vector<std::string>{});
      spec.instruction.attributes = ij.value("attributes", spec.instruction.target_attributes);
    }

    const json& sj = j.at("start");
    spec.start.position = {sj.at("x").get<int>(), sj.at("y").get<int>()};
    spec.start.heading = wrap_heading(sj.value("heading", 0.0));
    spec.start.fov = sj.value("fov", kPi / 2);
    spec.start.sense_range = sj.value("sense_range", 3.0);

    spec.truth_target_id = j.at("truth_target_id").get<std::string>();
    spec.seed = j.value("seed", std::uint64_t{0});

    if (j.contains("config")) {
      const json& cj = j["config"];
      spec.delta_sim = cj.value("delta_sim", spec.delta_sim);
      spec.max_steps = cj.value("max_steps", spec.max_steps);
      spec.explore_budget = cj.value("explore_budget", spec.explore_budget);
      if (cj.contains("viewplan")) {
        const json& vj = cj["viewplan"];
        ViewplanConfig& v = spec.viewplan;
        v.w_visible = vj.value("w_visible", v.w_visible);
        v.w_fov = vj.value("w_fov", v.w_fov);
        v.w_distance = vj.value("w_distance", v.w_distance);
        v.c_infeasible = vj.value("c_infeasible", v.c_infeasible);
        v.d_desired = vj.value("d_desired", v.d_desired);
        v.ga.population = vj.value("population", v.ga.population);
        v.ga.generations = vj.value("generations", v.ga.generations);
      }
      if (cj.contains("oracle")) spec.oracle = oracle_from(cj["oracle"], base_dir);
      if (cj.contains("ablation")) spec.ablation = ablation_from(cj["ablation"]);
    }
  } catch (const json::exception& e) {
    throw LoadError("scenario '" + spec.name + "': " + e.what());
  } catch (const InputError& e) {
    throw LoadError("scenario '" + spec.name + "': " + e.what());
  }
  validate(spec);
  return spec;
}

EpisodeSpec load_episode(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open scenario " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_episode(ss.str(), fs::path(path).parent_path().string());
  } catch (const LoadError& e) {
    throw LoadError(path + ": " + e.what());
  }
}

std::string episode_to_json(const EpisodeSpec& spec) {
  const OccupancyGrid& g = spec.world.grid;
  const bool hidden = spec.initial_known.count(CellState::Unknown) == spec.initial_known.size();
  std::vector<std::string> rows;
  for (int y = 0; y < g.height(); ++y) {
    std::string row;
    for (int x = 0; x < g.width(); ++x) {
      const Cell c{x, y};
      if (g.at(c) == CellState::Obstacle)
        row += '#';
      else if (!hidden && spec.initial_known.at(c) == CellState::Unknown)
        row += '?';
      else
        row += '.';
    }
    rows.push_back(std::move(row));
  }
  json objects = json::array();
  for (const SceneObject& o : spec.world.objects) {
    json fp = json::array();
    for (const Cell& c : o.footprint) fp.push_back({c.x, c.y});
    objects.push_back(
        {{"id", o.id}, {"class", o.class_name}, {"attributes", o.attributes}, {"feature", o.feature}, {"footprint", fp}});
  }
  json ins = {{"text", spec.instruction.raw_text},
              {"target", spec.instruction.target_class},
              {"landmarks", spec.instruction.landmark_classes},
              {"target_attributes", spec.instruction.target_attributes},
              {"attributes", spec.instruction.attributes}};
  json j = {{"name", spec.name},
            {"grid", {{"resolution", g.resolution()}, {"hidden", hidden}, {"rows", rows}}},
            {"objects", objects},
            {"instruction", ins},
            {"start",
             {{"x", spec.start.position.x},
              {"y", spec.start.position.y},
              {"heading", spec.start.heading},
              {"fov", spec.start.fov},
              {"sense_range", spec.start.sense_range}}},
            {"truth_target_id", spec.truth_target_id},
            {"seed", spec.seed}};
  json cfg = {{"delta_sim", spec.delta_sim}, {"max_steps", spec.max_steps}, {"explore_budget", spec.explore_budget}};
  if (spec.viewplan.d_desired != ViewplanConfig{}.d_desired) cfg["viewplan"] = {{"d_desired", spec.viewplan.d_desired}};
  if (spec.ablation)
    cfg["ablation"] = {{"active", spec.ablation->active},
                       {"reserved", spec.ablation->reserved},
                       {"raw_context", spec.ablation->raw_context}};
  j["config"] = cfg;
  return j.dump(1);
}

std::vector<EpisodeSpec> load_episode_dir(const std::string& dir) {
  if (!fs::is_directory(dir)) throw LoadError("not a directory: " + dir);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw LoadError("no scenario files in " + dir);
  std::vector<EpisodeSpec> out;
  for (const auto& f : files) out.push_back(load_episode(f.string()));
  return out;
}

}  // namespace magnav
