#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <cstdio>

#include "magnav/metrics.hpp"
#include "magnav/scenario.hpp"
#include "magnav/suite.hpp"
#include "support.hpp"

using namespace magnav;
using namespace magnav::testing;
using nlohmann::json;

namespace {

json room_doc(std::vector<std::string> rows, json objects, int sx, int sy) {
  return {{"name", "bench_room"},
          {"grid", {{"resolution", 0.25}, {"rows", std::move(rows)}}},
          {"objects", std::move(objects)},
          {"instruction", "find the red cup"},
          {"start", {{"x", sx}, {"y", sy}, {"heading", 0.0}, {"fov", kPi / 2}, {"sense_range", 2.5}}},
          {"truth_target_id", "cup1"},
          {"seed", 1},
          {"config", {{"oracle", "perfect"}}}};
}

json cup_at(int x, int y) {
  return json::array({{{"id", "cup1"}, {"class", "cup"}, {"attributes", {"red"}}, {"footprint", {{x, y}}}}});
}

const std::vector<std::string> kOpen{
    "############",
    "#..........#",
    "#..........#",
    "#..........#",
    "#..........#",
    "############"};

std::vector<EpisodeSpec> synthetic(int first, int count) {
  std::vector<EpisodeSpec> out;
  for (int i = first; i < first + count; ++i) {
    char name[64];
    std::snprintf(name, sizeof name, "scenarios/synthetic/synth_%03d.json", i);
    out.push_back(load_episode(data_path(name)));
  }
  return out;
}

}  // namespace

TEST_CASE("shortest_path_length examples") {
  const OccupancyGrid corridor(11, 1, 0.25);
  CHECK(shortest_path_length(corridor, {0, 0}, {10, 0}) == doctest::Approx(2.5));
  const OccupancyGrid open(5, 5, 0.25);
  CHECK(shortest_path_length(open, {0, 0}, {4, 4}) == doctest::Approx(4 * std::sqrt(2.0) * 0.25));
  CHECK(shortest_path_length(open, {2, 2}, {2, 2}) == 0.0);

  // no corner cutting: the diagonal through a blocked corner costs two axis steps
  OccupancyGrid corner(2, 2, 0.25);
  corner.set({1, 0}, CellState::Obstacle);
  CHECK(shortest_path_length(corner, {0, 0}, {1, 1}) == doctest::Approx(0.5));

  OccupancyGrid split(5, 3, 0.25);
  for (int y = 0; y < 3; ++y) split.set({2, y}, CellState::Obstacle);
  CHECK(shortest_path_length(split, {0, 1}, {4, 1}) == kInfinity);
  CHECK_THROWS_AS(shortest_path_length(split, {0, 1}, {2, 1}), InputError);

  const std::vector<Cell> goals{{4, 0}, {1, 2}};
  CHECK(shortest_path_length(split, {0, 0}, goals) == doctest::Approx(std::sqrt(2.0) * 0.25 + 0.25));
}

TEST_CASE("shortest paths agree with Bellman-Ford relaxation") {
  Rng rng(71);
  for (int m = 0; m < 10; ++m) {
    const OccupancyGrid g = random_grid(rng, 32, 32, 0.25);
    Cell src{};
    do src = {rng.uniform_int(0, 31), rng.uniform_int(0, 31)};
    while (g.at(src) != CellState::Free);
    const auto ref = relax_distances(g, src);
    for (int k = 0; k < 60; ++k) {
      const Cell dst{rng.uniform_int(0, 31), rng.uniform_int(0, 31)};
      if (g.at(dst) != CellState::Free) continue;
      const double got = shortest_path_length(g, src, dst);
      if (ref[g.index(dst)] == kInfinity)
        CHECK(got == kInfinity);
      else
        CHECK(got == doctest::Approx(ref[g.index(dst)]).epsilon(1e-12));
    }
  }
}

TEST_CASE("spl, dtg and success examples") {
  CHECK(episode_spl(true, 10.0, 8.0) == doctest::Approx(0.8));
  CHECK(episode_spl(true, 5.0, 5.0) == 1.0);
  CHECK(episode_spl(false, 5.0, 5.0) == 0.0);
  CHECK(episode_spl(true, 3.0, kInfinity) == 0.0);
  const std::vector<EpisodeMetrics> eps{{true, 10.0, 8.0}, {true, 5.0, 5.0}, {false, 1.0, 4.0}};
  CHECK(compute_spl(eps) == doctest::Approx((0.8 + 1.0) / 3.0));
  CHECK(compute_spl(std::vector<EpisodeMetrics>{}) == 0.0);

  const std::vector<Cell> fp{{4, 0}, {5, 0}};
  CHECK(compute_dtg({3, 0}, fp, 0.25) == doctest::Approx(0.25));
  CHECK(compute_dtg({4, 0}, fp, 0.25) == 0.0);
  CHECK(compute_dtg({0, 3}, fp, 0.25) == doctest::Approx(1.25));

  CHECK(is_success(true, 500, 0.3));
  CHECK_FALSE(is_success(true, 501, 0.1));
  CHECK_FALSE(is_success(true, 10, 0.30001));
  CHECK_FALSE(is_success(false, 10, 0.0));

  const OccupancyGrid g(5, 5, 0.25);
  const std::vector<Cell> one{{2, 2}};
  // the target cell itself is counted only if Free; diagonals lie 0.354 m away
  CHECK(goal_cells(g, one).size() == 5);
}

TEST_CASE("run_episode: a target in plain view is reached") {
  const EpisodeSpec spec = parse_episode(room_doc(kOpen, cup_at(7, 2), 2, 2).dump());
  const EpisodeResult r = run_episode(spec, arm_by_name("full"));
  CHECK(r.success);
  CHECK(r.outcome.stopped);
  CHECK(r.dtg <= kSuccessRadius);
  CHECK(r.l_finite);
  CHECK(r.l == doctest::Approx(1.0));
  CHECK(r.p >= r.l - 1e-9);
  CHECK(r.spl == doctest::Approx(r.l / r.p));
  CHECK(r.phase == "Active");
}

TEST_CASE("run_episode: an exhausted budget fails") {
  json doc = room_doc(kOpen, cup_at(9, 4), 1, 1);
  doc["config"]["max_steps"] = 3;
  doc["config"]["explore_budget"] = 3;
  const EpisodeResult r = run_episode(parse_episode(doc.dump()), arm_by_name("full"));
  CHECK_FALSE(r.success);
  CHECK(r.steps <= 3);
  CHECK(r.dtg > 0);
  CHECK(r.spl == 0.0);
}

TEST_CASE("run_episode: a sealed target fails with no reference path") {
  const std::vector<std::string> rows{
      "##########",
      "#........#",
      "#.....#..#",
      "#....#.#.#",
      "#.....#..#",
      "##########"};
  const EpisodeResult r = run_episode(parse_episode(room_doc(rows, cup_at(6, 3), 1, 1).dump()), arm_by_name("full"));
  CHECK_FALSE(r.success);
  CHECK_FALSE(r.l_finite);
  CHECK(r.spl == 0.0);
  CHECK(r.dtg > 0);
  CHECK((r.phase == "None" || r.phase == "Reserved"));
}

TEST_CASE("run_suite rows, aggregates and csv") {
  const auto specs = synthetic(30, 6);
  const std::vector<Arm> twins{{"a", AblationFlags{}}, {"b", AblationFlags{}}};
  RunOptions opts;
  opts.oracle = parse_oracle_spec("quality");
  opts.threads = 1;
  const SuiteReport rep = run_suite(specs, twins, opts);
  REQUIRE(rep.rows.size() == 12);
  CHECK(rep.rows[0].scenario == specs[0].name);
  CHECK(rep.rows[0].arm == "a");
  CHECK(rep.rows[1].arm == "b");
  const ArmSummary& a = rep.arm("a");
  const ArmSummary& b = rep.arm("b");
  CHECK(a.successes == b.successes);
  CHECK(a.spl == b.spl);
  CHECK(a.dtg == b.dtg);
  CHECK(a.episodes == 6);
  CHECK_THROWS_AS(rep.arm("full"), InputError);

  const std::string csv = report_csv(rep);
  CHECK(csv.rfind("scenario,arm,success,steps,p,l,spl,dtg,phase\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 13);
  opts.threads = 3;
  CHECK(report_csv(run_suite(specs, twins, opts)) == csv);
  CHECK(summary_table(run_suite(specs, twins, opts)) == summary_table(rep));
}

TEST_CASE("metrics are consistent and ablations only remove stages") {
  const auto specs = synthetic(36, 10);
  const auto arms = ablation_arms();
  for (const char* oracle : {"perfect", "quality"}) {
    RunOptions opts;
    opts.oracle = parse_oracle_spec(oracle);
    const SuiteReport rep = run_suite(specs, arms, opts);
    double spl_sum[5] = {};
    int wins[5] = {};
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
      const EpisodeResult& r = rep.rows[i];
      const std::size_t arm = i % arms.size();
      CHECK(r.arm == arms[arm].name);
      CHECK(r.success == is_success(r.outcome.stopped, r.steps, r.dtg));
      CHECK(r.spl >= 0.0);
      CHECK(r.spl <= 1.0);
      if (!r.success) CHECK(r.spl == 0.0);
      if (r.success) CHECK(r.p >= r.l - 1e-9);
      CHECK(r.steps <= specs[i / arms.size()].max_steps);
      spl_sum[arm] += r.spl;
      wins[arm] += r.success;

      const AblationFlags& f = arms[arm].flags;
      for (const auto& q : r.outcome.trace.queries) {
        if (!f.active) CHECK(q.query.phase != Phase::Active);
        if (!f.reserved) CHECK(q.query.phase != Phase::Reserved);
        if (!f.raw_context) {
          CHECK(q.query.raw_context.empty());
          for (const auto& k : q.query.keyframes) CHECK(k.raw_context.empty());
        }
      }
    }
    for (std::size_t k = 0; k < arms.size(); ++k) {
      const ArmSummary& s = rep.arm(arms[k].name);
      CHECK(s.successes == wins[k]);
      CHECK(s.sr == doctest::Approx(wins[k] / 10.0));
      CHECK(s.spl == doctest::Approx(spl_sum[k] / 10.0));
    }
  }
}

TEST_CASE("load and option errors") {
  json doc = room_doc(kOpen, cup_at(7, 2), 0, 0);  // start on a wall
  CHECK_THROWS_AS(parse_episode(doc.dump()), LoadError);
  doc = room_doc({"#####", "#.x.#", "#####"}, cup_at(3, 1), 1, 1);
  CHECK_THROWS_AS(parse_episode(doc.dump()), LoadError);
  doc = room_doc(kOpen, cup_at(7, 2), 2, 2);
  doc["truth_target_id"] = "missing";
  CHECK_THROWS_AS(parse_episode(doc.dump()), LoadError);
  doc = room_doc(kOpen, cup_at(70, 2), 2, 2);
  CHECK_THROWS_AS(parse_episode(doc.dump()), LoadError);
  CHECK_THROWS_AS(parse_episode("{not json"), LoadError);
  CHECK_THROWS_AS(load_episode("/nonexistent/scenario.json"), LoadError);
  CHECK_THROWS_AS(load_episode_dir("/nonexistent"), LoadError);

  CHECK_THROWS_AS(arm_by_name("no-everything"), InputError);
  CHECK_THROWS_AS(parse_arms(""), InputError);
  CHECK(parse_arms("full,no-mg").size() == 2);
  CHECK_THROWS_AS(parse_oracle_spec("oracle9"), InputError);
  CHECK_THROWS_AS(run_suite(std::vector<EpisodeSpec>{}, ablation_arms()), InputError);
}

TEST_CASE("scenario documents round-trip") {
  for (const EpisodeSpec& spec : synthetic(0, 5)) {
    const std::string text = episode_to_json(spec);
    const EpisodeSpec back = parse_episode(text);
    CHECK(episode_to_json(back) == text);
    CHECK(back.world.grid.width() == spec.world.grid.width());
    CHECK(back.truth_target_id == spec.truth_target_id);
  }
}
