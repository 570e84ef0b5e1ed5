#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "magnav/metrics.hpp"
#include "magnav/nav.hpp"
#include "magnav/scenario.hpp"
#include "magnav/suite.hpp"
#include "magnav/synth.hpp"
#include "magnav/viewplan.hpp"

using namespace magnav;

namespace {

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << text;
}

std::string fmt6(double v) {
  if (!(v < kInfinity)) return "inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

const SceneObject& object_or_throw(const EpisodeSpec& spec, const std::string& id) {
  const SceneObject* o = spec.world.find(id);
  if (!o) throw InputError("no object '" + id + "' in scenario " + spec.name);
  return *o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grid-world language-grounded object navigation"};
  app.require_subcommand(1);

  std::string scenario, dir, arm_name = "", oracle_spec, trace_out, arms_list = "full", out_csv, target_id,
                           dump_path, goal_str;
  std::uint64_t seed = 0;
  int threads = 0, count = 50;

  auto* run = app.add_subcommand("run", "Run one episode");
  run->add_option("scenario", scenario, "Scenario file")->required();
  run->add_option("--arm", arm_name, "full|no-ag|no-mg|no-amg|no-amg-noraw");
  run->add_option("--seed", seed, "Suite seed");
  run->add_option("--oracle", oracle_spec, "perfect|quality|scripted:FILE|remote");
  run->add_option("--trace", trace_out, "Write the decision trace as JSON");

  auto* suite = app.add_subcommand("suite", "Run every scenario in a directory under several arms");
  suite->add_option("dir", dir, "Scenario directory")->required();
  suite->add_option("--arms", arms_list, "Comma-separated arm names");
  suite->add_option("--out", out_csv, "CSV report path");
  suite->add_option("--seed", seed, "Suite seed");
  suite->add_option("--oracle", oracle_spec, "perfect|quality|scripted:FILE|remote");
  suite->add_option("--threads", threads, "Worker threads (0 = all cores)");

  auto* ablate = app.add_subcommand("ablate", "Suite over the five ablation arms (quality oracle by default)");
  ablate->add_option("dir", dir, "Scenario directory")->required();
  ablate->add_option("--out", out_csv, "CSV report path");
  ablate->add_option("--seed", seed, "Suite seed");
  ablate->add_option("--oracle", oracle_spec, "perfect|quality|scripted:FILE|remote");
  ablate->add_option("--threads", threads, "Worker threads (0 = all cores)");

  auto* viewplan = app.add_subcommand("viewplan", "Optimize a viewpoint for one object on the full map");
  viewplan->add_option("scenario", scenario, "Scenario file")->required();
  viewplan->add_option("--target", target_id, "Object id")->required();
  viewplan->add_option("--seed", seed, "GA seed");
  viewplan->add_option("--dump", dump_path, "Write the per-cell score breakdown as CSV");

  auto* nav = app.add_subcommand("nav", "Distance field to a cell or object on the full map");
  nav->add_option("scenario", scenario, "Scenario file")->required();
  nav->add_option("--goal", goal_str, "Goal cell as x,y");
  nav->add_option("--target", target_id, "Object id (field to its free neighbours)");
  nav->add_option("--dump", dump_path, "Write x,y,distance as CSV");

  auto* generate = app.add_subcommand("generate", "Write synthetic scenarios");
  generate->add_option("dir", dir, "Output directory")->required();
  generate->add_option("--count", count, "Number of scenarios");
  generate->add_option("--seed", seed, "Base seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const EpisodeSpec spec = load_episode(scenario);
      RunOptions opts;
      opts.suite_seed = seed;
      opts.keep_trace = true;
      if (!oracle_spec.empty()) opts.oracle = parse_oracle_spec(oracle_spec);
      Arm arm = arm_name.empty() ? Arm{"full", spec.ablation.value_or(AblationFlags{})} : arm_by_name(arm_name);
      if (arm_name.empty() && spec.ablation) arm.name = "scenario";
      const EpisodeResult r = run_episode(spec, arm, opts);
      std::cout << "scenario=" << r.scenario << " arm=" << r.arm << " success=" << (r.success ? 1 : 0)
                << " steps=" << r.steps << " p=" << fmt6(r.p) << " l=" << fmt6(r.l) << " spl=" << fmt6(r.spl)
                << " dtg=" << fmt6(r.dtg) << " phase=" << r.phase << "\n";
      if (!trace_out.empty()) write_file(trace_out, trace_json(r) + "\n");
    } else if (*suite || *ablate) {
      const auto specs = load_episode_dir(dir);
      RunOptions opts;
      opts.suite_seed = seed;
      opts.threads = threads;
      if (!oracle_spec.empty())
        opts.oracle = parse_oracle_spec(oracle_spec);
      else if (*ablate)
        opts.oracle = parse_oracle_spec("quality");
      const auto arms = *ablate ? ablation_arms() : parse_arms(arms_list);
      const SuiteReport report = run_suite(specs, arms, opts);
      if (!out_csv.empty()) write_file(out_csv, report_csv(report));
      std::cout << summary_table(report);
    } else if (*viewplan) {
      const EpisodeSpec spec = load_episode(scenario);
      const SceneObject& obj = object_or_throw(spec, target_id);
      const BoundarySet g = boundary_points(obj.footprint);
      ViewplanConfig cfg = spec.viewplan;
      cfg.fov = spec.start.fov;
      cfg.ga.seed = seed;
      const auto& map = spec.world.grid;
      const ViewpointSolution ga = optimize_ga(map, g, cfg);
      const ViewpointSolution ex = optimize_exhaustive(map, g, cfg);
      std::cout << "ga " << to_string(ga.cell) << " total=" << fmt6(ga.score.total) << "\n"
                << "exhaustive " << to_string(ex.cell) << " total=" << fmt6(ex.score.total) << "\n";
      if (!dump_path.empty()) {
        std::string csv = "x,y,r_visible,r_fov,p_distance,p_feasibility,total\n";
        for (int y = 0; y < map.height(); ++y) {
          for (int x = 0; x < map.width(); ++x) {
            const ViewpointScore s = objective(map, {x, y}, g, cfg);
            csv += std::to_string(x) + ',' + std::to_string(y) + ',' + fmt6(s.r_visible) + ',' + fmt6(s.r_fov) + ',' +
                   fmt6(s.p_distance) + ',' + fmt6(s.p_feasibility) + ',' + fmt6(s.total) + '\n';
          }
        }
        write_file(dump_path, csv);
      }
    } else if (*nav) {
      const EpisodeSpec spec = load_episode(scenario);
      const auto& map = spec.world.grid;
      DistanceField field;
      if (!target_id.empty()) {
        const SceneObject& obj = object_or_throw(spec, target_id);
        std::vector<FieldSeed> seeds;
        for (const Cell& c : goal_cells(map, obj.footprint, kInfinity))
          for (const Cell& f : obj.footprint)
            if (std::max(std::abs(c.x - f.x), std::abs(c.y - f.y)) == 1)
              seeds.push_back({c, compute_dtg(c, obj.footprint, map.resolution())});
        field = fmm_field(map, seeds, FmmOptions{});
      } else {
        Cell goal{};
        char comma = 0;
        std::istringstream in(goal_str);
        if (!(in >> goal.x >> comma >> goal.y) || comma != ',') throw InputError("--goal expects x,y");
        field = fmm_field(map, goal, FmmOptions{});
      }
      const double d = field.at(spec.start.position);
      std::cout << "distance from start " << to_string(spec.start.position) << " = " << fmt6(d) << " m\n";
      if (!dump_path.empty()) {
        std::string csv = "x,y,distance\n";
        for (int y = 0; y < map.height(); ++y)
          for (int x = 0; x < map.width(); ++x)
            csv += std::to_string(x) + ',' + std::to_string(y) + ',' + fmt6(field.at({x, y})) + '\n';
        write_file(dump_path, csv);
      }
    } else if (*generate) {
      std::filesystem::create_directories(dir);
      for (int i = 0; i < count; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "synth_%03d", i);
        const EpisodeSpec spec = generate_scenario(seed * 1000003ULL + static_cast<std::uint64_t>(i), name);
        write_file((std::filesystem::path(dir) / (std::string(name) + ".json")).string(), episode_to_json(spec) + "\n");
      }
      std::cout << "wrote " << count << " scenarios to " << dir << "\n";
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
