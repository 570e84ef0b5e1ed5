#include <doctest.h>

#include <cmath>

#include "magnav/viewplan.hpp"
#include "support.hpp"

using namespace magnav;
using namespace magnav::testing;

namespace {

BoundarySet same4(Cell c) { return {c, c, c, c}; }

BoundarySet random_boundary(Rng& rng, int w, int h) {
  const int x0 = rng.uniform_int(0, w - 1), y0 = rng.uniform_int(0, h - 1);
  const int x1 = std::min(w - 1, x0 + rng.uniform_int(0, 3)), y1 = std::min(h - 1, y0 + rng.uniform_int(0, 3));
  return {Cell{x0, y0}, Cell{x1, y0}, Cell{x0, y1}, Cell{x1, y1}};
}

}  // namespace

TEST_CASE("published weights are the defaults") {
  const ViewplanConfig cfg;
  CHECK(cfg.w_visible == 15.0);
  CHECK(cfg.w_fov == 7.0);
  CHECK(cfg.w_distance == 1.0);
  CHECK(cfg.c_infeasible == 1000.0);
}

TEST_CASE("visibility reward examples") {
  const ViewplanConfig cfg;
  OccupancyGrid g(7, 5, 0.25);
  const BoundarySet box{Cell{4, 0}, Cell{6, 0}, Cell{4, 4}, Cell{6, 4}};
  CHECK(visibility_reward(g, {0, 2}, box, cfg) == 45.0);
  g.set({2, 3}, CellState::Obstacle);
  CHECK(visible_count(g, {0, 2}, box) == 2);
  CHECK(visibility_reward(g, {0, 2}, box, cfg) == 30.0);
  OccupancyGrid sealed(5, 5, 0.25);
  for (int y = 1; y <= 3; ++y)
    for (int x = 1; x <= 3; ++x)
      if (x != 2 || y != 2) sealed.set({x, y}, CellState::Obstacle);
  CHECK(visibility_reward(sealed, {0, 0}, same4({2, 2}), cfg) == 0.0);
}

TEST_CASE("fov reward examples") {
  const ViewplanConfig cfg;
  CHECK(fov_reward({0, 0}, same4({3, 1}), cfg) == 0.0);
  // 249097/455969 is a rational within 1.5e-11 of tan(0.5)
  const BoundarySet half{Cell{455969, 0}, Cell{455969, 249097}, Cell{455969, 0}, Cell{455969, 249097}};
  CHECK(fov_reward({0, 0}, half, cfg) == doctest::Approx(3.5).epsilon(1e-10));
  const BoundarySet wide{Cell{1000, 0}, Cell{-416, 909}, Cell{1000, 0}, Cell{-416, 909}};
  CHECK(angular_spread({0, 0}, wide) == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(fov_reward({0, 0}, wide, cfg) == 0.0);
  // standing on a boundary point: spread pi, beyond any fov
  CHECK(angular_spread({3, 1}, same4({3, 1})) == kPi);
  CHECK(fov_reward({3, 1}, same4({3, 1}), cfg) == 0.0);
}

TEST_CASE("distance and feasibility penalty examples") {
  ViewplanConfig cfg;
  CHECK(distance_penalty({0, 0}, same4({8, 0}), cfg, 0.25) == doctest::Approx(1.0));
  CHECK(distance_penalty({0, 0}, same4({4, 0}), cfg, 0.25) == 0.0);
  // mixed residuals: 0.25, 0.75, 0, 0 over 4 points
  const BoundarySet mixed{Cell{3, 0}, Cell{7, 0}, Cell{4, 0}, Cell{0, 4}};
  CHECK(distance_penalty({0, 0}, mixed, cfg, 0.25) == doctest::Approx(0.25));

  OccupancyGrid g(3, 1, 0.25);
  g.set({1, 0}, CellState::Obstacle);
  g.set({2, 0}, CellState::Unknown);
  CHECK(feasibility_penalty(g, {0, 0}, cfg) == 0.0);
  CHECK(feasibility_penalty(g, {1, 0}, cfg) == 1000.0);
  CHECK(feasibility_penalty(g, {2, 0}, cfg) == 1000.0);
}

TEST_CASE("objective examples") {
  CHECK(-45.0 - 3.5 + 1.0 + 0.0 == -47.5);
  ViewplanConfig zero;
  zero.w_visible = zero.w_fov = zero.w_distance = 0.0;
  OccupancyGrid g(4, 4, 0.25);
  CHECK(objective(g, {1, 1}, same4({3, 3}), zero).total == 0.0);

  const ViewplanConfig cfg;
  g.set({2, 2}, CellState::Obstacle);
  const ViewpointScore s = objective(g, {2, 2}, same4({0, 0}), cfg);
  CHECK(s.total >= 1000.0 - 45.0 - cfg.w_fov * cfg.fov);
  CHECK_THROWS_AS(objective(g, {4, 0}, same4({0, 0}), cfg), InputError);
}

TEST_CASE("config validation") {
  ViewplanConfig cfg;
  cfg.w_fov = -1;
  CHECK_THROWS_AS(cfg.validate(), InputError);
  cfg = {};
  cfg.d_desired = 0;
  CHECK_THROWS_AS(cfg.validate(), InputError);
  cfg = {};
  cfg.c_infeasible = 0;
  CHECK_THROWS_AS(cfg.validate(), InputError);
}

TEST_CASE("optimize_exhaustive examples") {
  const ViewplanConfig cfg;
  OccupancyGrid one(5, 5, 0.25, CellState::Obstacle);
  one.set({3, 1}, CellState::Free);
  CHECK(optimize_exhaustive(one, same4({0, 4}), cfg).cell == Cell{3, 1});

  OccupancyGrid open(21, 21, 0.25);
  ViewplanConfig ring = cfg;
  ring.d_desired = 5 * 0.25;
  const ViewpointSolution best = optimize_exhaustive(open, same4({10, 10}), ring);
  CHECK(cell_distance(best.cell, {10, 10}) == 5.0);
  CHECK(best.cell == Cell{10, 5});  // first ring cell in row-major order
  CHECK(best.score.total == -45.0);

  const OccupancyGrid walls(6, 6, 0.25, CellState::Obstacle);
  CHECK_THROWS_AS(optimize_exhaustive(walls, same4({2, 2}), cfg), NoFeasibleViewpoint);
  CHECK_THROWS_AS(optimize_ga(walls, same4({2, 2}), cfg), NoFeasibleViewpoint);
}

TEST_CASE("optimize_ga is deterministic and elitist") {
  const auto fx = load_viewplan_fixture(data_path("tests/data/viewplan/vp_103_32x32.json"));
  ViewplanConfig cfg = fx.cfg;
  cfg.ga.seed = 42;
  const ViewpointSolution a = optimize_ga(fx.grid, fx.boundary, cfg);
  const ViewpointSolution b = optimize_ga(fx.grid, fx.boundary, cfg);
  CHECK(a.cell == b.cell);
  CHECK(a.score.total == b.score.total);

  const ViewpointSolution ex = optimize_exhaustive(fx.grid, fx.boundary, cfg);
  const std::vector<Cell> seeded{ex.cell};
  for (std::uint64_t s = 1; s <= 5; ++s) {
    cfg.ga.seed = s;
    CHECK(optimize_ga(fx.grid, fx.boundary, cfg, seeded).score.total <= ex.score.total);
  }
}

TEST_CASE("GA with population 50 over 40 generations on a 32x32 fixture") {
  const auto fx = load_viewplan_fixture(data_path("tests/data/viewplan/vp_103_32x32.json"));
  ViewplanConfig cfg = fx.cfg;
  cfg.ga.population = 50;
  cfg.ga.generations = 40;
  const double opt = optimize_exhaustive(fx.grid, fx.boundary, cfg).score.total;
  for (std::uint64_t s = 1; s <= 3; ++s) {
    cfg.ga.seed = s;
    const double got = optimize_ga(fx.grid, fx.boundary, cfg).score.total;
    CHECK(got >= opt);
    CHECK(got <= opt + 0.5);
  }
}

TEST_CASE("objective term properties on random maps") {
  Rng rng(31);
  ViewplanConfig cfg;
  for (int m = 0; m < 40; ++m) {
    const OccupancyGrid g = random_grid(rng, 16, 12, 0.2, 0.15);
    const BoundarySet b = random_boundary(rng, 16, 12);
    cfg.fov = 0.3 + 2.5 * rng.uniform01();
    double worst_feasible = -kInfinity, best_infeasible = kInfinity;
    for (int y = 0; y < g.height(); ++y)
      for (int x = 0; x < g.width(); ++x) {
        const Cell v{x, y};
        const ViewpointScore s = objective(g, v, b, cfg);
        CHECK(s.r_visible >= 0);
        CHECK(s.r_fov >= 0);
        CHECK(s.p_distance >= 0);
        CHECK(s.p_feasibility >= 0);
        CHECK(s.r_visible <= 3 * cfg.w_visible);
        CHECK(s.total == -s.r_visible - s.r_fov + s.p_distance + s.p_feasibility);
        if (angular_spread(v, b) >= cfg.fov) CHECK(s.r_fov == 0.0);
        if (s.p_feasibility == 0)
          worst_feasible = std::max(worst_feasible, s.total);
        else
          best_infeasible = std::min(best_infeasible, s.total);
      }
    if (worst_feasible > -kInfinity && best_infeasible < kInfinity) CHECK(worst_feasible < best_infeasible);
  }
}

TEST_CASE("exhaustive argmin is translation equivariant") {
  Rng rng(32);
  const ViewplanConfig cfg;
  for (int m = 0; m < 20; ++m) {
    const OccupancyGrid g = random_grid(rng, 12, 10, 0.2, 0.1);
    if (g.count(CellState::Free) == 0) continue;
    const BoundarySet b = random_boundary(rng, 12, 10);
    const int dx = rng.uniform_int(1, 5), dy = rng.uniform_int(1, 5);
    OccupancyGrid moved(12 + dx + 2, 10 + dy + 3, 0.25, CellState::Obstacle);
    for (int y = 0; y < 10; ++y)
      for (int x = 0; x < 12; ++x) moved.set({x + dx, y + dy}, g.at({x, y}));
    BoundarySet mb = b;
    for (Cell& c : mb) c = c + Cell{dx, dy};
    const ViewpointSolution a = optimize_exhaustive(g, b, cfg);
    const ViewpointSolution t = optimize_exhaustive(moved, mb, cfg);
    CHECK(t.cell == a.cell + Cell{dx, dy});
    CHECK(t.score.total == doctest::Approx(a.score.total));
  }
}
