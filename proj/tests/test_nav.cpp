#include <doctest.h>

#include <cmath>
#include <set>

#include "magnav/memory.hpp"
#include "magnav/nav.hpp"
#include "support.hpp"

using namespace magnav;
using namespace magnav::testing;

namespace {

DistanceField manual_field(int w, int h, std::vector<double> values) {
  return DistanceField{w, h, 0.25, std::move(values)};
}

// Cells visible (any range) from some Free cell reachable from `start`.
std::set<Cell> visible_from_component(const OccupancyGrid& truth, Cell start) {
  const auto d = relax_distances(truth, start);
  std::vector<Cell> comp;
  for (std::size_t i = 0; i < truth.size(); ++i)
    if (d[i] < kInfinity) comp.push_back(truth.cell_at(i));
  std::set<Cell> out;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const Cell c = truth.cell_at(i);
    for (const Cell& f : comp)
      if (brute_los(truth, f, c)) {
        out.insert(c);
        break;
      }
  }
  return out;
}

}  // namespace

TEST_CASE("fmm_field examples") {
  OccupancyGrid g(9, 9, 0.25);
  const DistanceField f = fmm_field(g, {4, 4});
  CHECK(f.at({4, 4}) == 0.0);
  CHECK(f.at({5, 4}) == doctest::Approx(0.25));
  CHECK(f.at({8, 4}) == doctest::Approx(1.0));

  // a sealed pocket stays unreachable, walls are unreachable
  for (int x = 0; x < 9; ++x) g.set({x, 6}, CellState::Obstacle);
  const DistanceField sealed = fmm_field(g, {4, 4});
  CHECK_FALSE(sealed.reachable({4, 8}));
  CHECK_FALSE(sealed.reachable({4, 6}));
  CHECK(sealed.reachable({0, 0}));

  CHECK_THROWS_AS(fmm_field(g, Cell{4, 6}), InputError);
  CHECK_THROWS_AS(fmm_field(g, Cell{9, 0}), InputError);
}

TEST_CASE("unknown cells are slow or impassable") {
  OccupancyGrid g(12, 3, 0.25, CellState::Obstacle);
  for (int x = 0; x < 12; ++x) g.set({x, 1}, CellState::Free);
  for (int x = 3; x < 9; ++x) g.set({x, 1}, CellState::Unknown);
  const DistanceField half = fmm_field(g, Cell{0, 1}, FmmOptions{0.5});
  CHECK(half.at({11, 1}) == doctest::Approx(3 * 0.25 + 6 * 0.5 + 2 * 0.25));
  const DistanceField blocked = fmm_field(g, Cell{0, 1}, FmmOptions{0.0});
  CHECK_FALSE(blocked.reachable({11, 1}));
  CHECK_FALSE(blocked.reachable({3, 1}));
}

TEST_CASE("seeded fields start from the seed values") {
  const OccupancyGrid g(10, 1, 0.25);
  const std::vector<FieldSeed> seeds{{{0, 0}, 0.5}, {{9, 0}, 0.0}};
  const DistanceField f = fmm_field(g, seeds);
  CHECK(f.at({0, 0}) == 0.5);
  CHECK(f.at({9, 0}) == 0.0);
  CHECK(f.at({1, 0}) == doctest::Approx(0.75));
  CHECK(f.at({6, 0}) == doctest::Approx(0.75));
}

TEST_CASE("fmm is 1-Lipschitz along free 4-neighbours and close to the graph distance") {
  Rng rng(41);
  for (int m = 0; m < 10; ++m) {
    const OccupancyGrid g = random_grid(rng, 32, 32, 0.2);
    Cell src{};
    do src = {rng.uniform_int(0, 31), rng.uniform_int(0, 31)};
    while (g.at(src) != CellState::Free);
    const DistanceField f = fmm_field(g, src);
    const auto ref = relax_distances(g, src);
    for (int y = 0; y < 32; ++y)
      for (int x = 0; x < 32; ++x) {
        const Cell a{x, y};
        CHECK(f.reachable(a) == (ref[g.index(a)] < kInfinity));
        if (!f.reachable(a)) continue;
        CHECK(f.at(a) >= 0.0);
        for (const Cell b : {Cell{x + 1, y}, Cell{x, y + 1}})
          if (f.reachable(b)) CHECK(std::abs(f.at(a) - f.at(b)) <= 0.25 + 1e-9);
        if (ref[g.index(a)] > 0) CHECK(std::abs(f.at(a) - ref[g.index(a)]) <= 0.10 * ref[g.index(a)]);
      }
  }
}

TEST_CASE("greedy_action examples") {
  // values decrease toward the cell to the left (+y) of a +x heading
  std::vector<double> v(9, 5.0);
  v[1 * 3 + 1] = 2.0;  // centre
  v[2 * 3 + 1] = 1.0;  // (1,2)
  const DistanceField f = manual_field(3, 3, v);
  CHECK(greedy_action(f, AgentPose{{1, 1}, 0.0, kPi / 2, 3.0}, 0.3) == Action::TurnLeft);
  CHECK(greedy_action(f, AgentPose{{1, 1}, kPi / 2, kPi / 2, 3.0}, 0.3) == Action::MoveForward);
  CHECK(greedy_action(f, AgentPose{{1, 1}, kPi, kPi / 2, 3.0}, 0.3) == Action::TurnRight);
  // exactly behind: turn left
  CHECK(greedy_action(f, AgentPose{{1, 1}, 3 * kPi / 2, kPi / 2, 3.0}, 0.3) == Action::TurnLeft);

  const DistanceField real = fmm_field(OccupancyGrid(6, 6, 0.25), Cell{4, 2});
  CHECK(greedy_action(real, AgentPose{{4, 2}, 0.0, kPi / 2, 3.0}, 0.3) == Action::Stop);
  CHECK(greedy_action(real, AgentPose{{1, 2}, 0.0, kPi / 2, 3.0}, 0.3) == Action::MoveForward);

  std::vector<double> isolated(9, kInfinity);
  isolated[4] = 3.0;
  CHECK_FALSE(greedy_action(manual_field(3, 3, isolated), AgentPose{{1, 1}, 0.0, kPi / 2, 3.0}, 0.3).has_value());
}

TEST_CASE("greedy descent reaches the goal and never climbs") {
  Rng rng(42);
  for (int m = 0; m < 15; ++m) {
    const OccupancyGrid g = random_grid(rng, 24, 24, 0.2);
    Cell goal{}, start{};
    do goal = {rng.uniform_int(0, 23), rng.uniform_int(0, 23)};
    while (g.at(goal) != CellState::Free);
    const DistanceField f = fmm_field(g, goal);
    do start = {rng.uniform_int(0, 23), rng.uniform_int(0, 23)};
    while (!f.reachable(start));
    AgentPose pose{start, rng.uniform_int(0, 11) * kTurnIncrement, kPi / 2, 3.0};
    const int limit = 24 * 24 * 12;
    int actions = 0;
    bool stopped = false;
    while (actions < limit) {
      const auto a = greedy_action(f, pose, 0.0);
      REQUIRE(a.has_value());
      ++actions;
      if (*a == Action::Stop) {
        stopped = true;
        break;
      }
      const double before = f.at(pose.position);
      const StepResult r = step_agent(pose, *a, g);
      REQUIRE_FALSE(r.blocked);
      if (*a == Action::MoveForward) CHECK(f.at(r.pose.position) < before);
      pose = r.pose;
    }
    CHECK(stopped);
    CHECK(pose.position == goal);
  }
}

TEST_CASE("detect_frontiers examples") {
  CHECK(detect_frontiers(OccupancyGrid(4, 4, 0.25)).empty());

  OccupancyGrid pair(2, 1, 0.25);
  pair.set({1, 0}, CellState::Unknown);
  const auto one = detect_frontiers(pair);
  REQUIRE(one.size() == 1);
  CHECK(one[0].cell == Cell{0, 0});
  CHECK(one[0].unknown_neighbors == 1);

  OccupancyGrid g(5, 5, 0.25);
  for (const Cell c : {Cell{1, 1}, Cell{2, 1}, Cell{1, 2}, Cell{2, 2}}) g.set(c, CellState::Unknown);
  const auto fr = detect_frontiers(g);
  std::vector<std::pair<Cell, int>> expected;
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 5; ++x) {
      if (g.at({x, y}) != CellState::Free) continue;
      int n = 0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx)
          if ((dx || dy) && g.is({x + dx, y + dy}, CellState::Unknown)) ++n;
      if (n) expected.push_back({{x, y}, n});
    }
  REQUIRE(expected.size() == 12);
  REQUIRE(fr.size() == expected.size());
  for (std::size_t i = 0; i < fr.size(); ++i) {
    CHECK(fr[i].cell == expected[i].first);
    CHECK(fr[i].unknown_neighbors == expected[i].second);
  }
}

TEST_CASE("select_frontier examples") {
  OccupancyGrid g(20, 5, 0.25);
  const DistanceField from_agent = fmm_field(g, Cell{10, 2});
  const MemoryStore empty;
  const std::vector<std::string> landmarks{"stool"};

  const std::vector<Frontier> single{{{3, 0}, 2, 0.0}};
  CHECK(select_frontier(single, empty, landmarks, from_agent)->cell == Cell{3, 0});
  CHECK_FALSE(select_frontier(std::vector<Frontier>{}, empty, landmarks, from_agent).has_value());

  // symmetric pair; a remembered stool next to the right one
  MemoryStore mem;
  Observation obs;
  Detection d;
  d.identifier = 1;
  d.class_name = "stool";
  d.points = {{17, 2}};
  d.feature = {1, 0};
  obs.annotated = {d};
  obs.raw_context = {d};
  associate_and_update(mem, obs);
  const std::vector<Frontier> pair{{{4, 2}, 3, 0.0}, {{16, 2}, 3, 0.0}};
  CHECK(select_frontier(pair, empty, landmarks, from_agent)->cell == Cell{4, 2});  // row-major tie
  CHECK(select_frontier(pair, mem, landmarks, from_agent)->cell == Cell{16, 2});

  FrontierWeights dist_only;
  dist_only.alpha = dist_only.beta = 0.0;
  const std::vector<Frontier> spread{{{0, 0}, 5, 0.0}, {{13, 2}, 1, 0.0}, {{19, 4}, 3, 0.0}};
  CHECK(select_frontier(spread, mem, landmarks, from_agent, dist_only)->cell == Cell{13, 2});
}

TEST_CASE("frontier exploration uncovers everything visible from the reachable region") {
  Rng rng(43);
  for (int m = 0; m < 8; ++m) {
    const OccupancyGrid truth = random_grid(rng, 16, 16, 0.2);
    Cell start{};
    do start = {rng.uniform_int(0, 15), rng.uniform_int(0, 15)};
    while (truth.at(start) != CellState::Free);
    OccupancyGrid known(16, 16, 0.25, CellState::Unknown);
    const MemoryStore memory;
    auto scan = [&](Cell at) {
      for (int k = 0; k < 12; ++k) reveal(truth, AgentPose{at, k * kTurnIncrement, kPi / 2, 2.0}, known);
    };
    scan(start);
    // A scanned frontier is retired: a diagonal neighbour behind a blocked
    // corner can never be seen from it.
    std::set<Cell> done;
    Cell here = start;
    for (int round = 0; round < 1000; ++round) {
      std::vector<Frontier> open;
      for (const Frontier& f : detect_frontiers(known))
        if (!done.count(f.cell)) open.push_back(f);
      const DistanceField from_agent = fmm_field(known, here, FmmOptions{0.5});
      const auto pick = select_frontier(open, memory, {}, from_agent);
      if (!pick) break;
      here = pick->cell;
      scan(here);
      done.insert(here);
    }
    for (const Frontier& f : detect_frontiers(known)) CHECK(done.count(f.cell) == 1);
    const auto seen = visible_from_component(truth, start);
    for (std::size_t i = 0; i < known.size(); ++i) {
      const Cell c = known.cell_at(i);
      CHECK((known.raw(i) != CellState::Unknown) == (seen.count(c) == 1));
    }
  }
}
