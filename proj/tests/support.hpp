#pragma once

// Shared fixtures and independent oracles for the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "magnav/gridworld.hpp"
#include "magnav/memory.hpp"
#include "magnav/rng.hpp"
#include "magnav/viewplan.hpp"

namespace magnav::testing {

inline std::string data_path(const std::string& rel) { return std::string(MAGNAV_DATA_DIR) + "/" + rel; }

// '.' Free, '#' Obstacle, '?' Unknown. Row 0 is y = 0.
inline OccupancyGrid grid_from_rows(const std::vector<std::string>& rows, double res = 0.25) {
  OccupancyGrid g(static_cast<int>(rows.front().size()), static_cast<int>(rows.size()), res);
  for (int y = 0; y < g.height(); ++y)
    for (int x = 0; x < g.width(); ++x) {
      const char ch = rows[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)];
      g.set({x, y}, ch == '#' ? CellState::Obstacle : ch == '?' ? CellState::Unknown : CellState::Free);
    }
  return g;
}

struct ViewplanFixture {
  std::string name;
  OccupancyGrid grid{1, 1, 1.0};
  BoundarySet boundary{};
  ViewplanConfig cfg;
};

inline ViewplanFixture load_viewplan_fixture(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  const auto j = nlohmann::json::parse(ss.str());
  ViewplanFixture f;
  f.name = j.at("name").get<std::string>();
  f.grid = grid_from_rows(j.at("rows").get<std::vector<std::string>>(), j.at("resolution").get<double>());
  const auto& b = j.at("boundary");
  for (std::size_t i = 0; i < 4; ++i) f.boundary[i] = {b[i][0].get<int>(), b[i][1].get<int>()};
  f.cfg.fov = j.at("fov").get<double>();
  f.cfg.d_desired = j.at("d_desired").get<double>();
  return f;
}

// Exact test of whether the segment between two cell centres meets the closed
// unit square of cell c (Liang-Barsky over rationals, doubled coordinates).
inline bool segment_touches_cell(Cell a, Cell b, Cell c) {
  struct Frac {
    long long p, q;  // q > 0
  };
  auto less_eq = [](Frac x, Frac y) { return x.p * y.q <= y.p * x.q; };
  Frac lo{0, 1}, hi{1, 1};
  const long long a2[2] = {2LL * a.x, 2LL * a.y};
  const long long d2[2] = {2LL * (b.x - a.x), 2LL * (b.y - a.y)};
  const long long box_lo[2] = {2LL * c.x - 1, 2LL * c.y - 1};
  const long long box_hi[2] = {2LL * c.x + 1, 2LL * c.y + 1};
  for (int k = 0; k < 2; ++k) {
    if (d2[k] == 0) {
      if (a2[k] < box_lo[k] || a2[k] > box_hi[k]) return false;
      continue;
    }
    Frac t0{box_lo[k] - a2[k], d2[k]}, t1{box_hi[k] - a2[k], d2[k]};
    if (d2[k] < 0) {
      t0 = {-t0.p, -t0.q};
      t1 = {-t1.p, -t1.q};
      std::swap(t0, t1);
    }
    if (!less_eq(t0, lo)) lo = t0;
    if (less_eq(t1, hi)) hi = t1;
  }
  return less_eq(lo, hi);
}

inline std::set<Cell> brute_supercover(Cell a, Cell b) {
  std::set<Cell> out;
  for (int y = std::min(a.y, b.y); y <= std::max(a.y, b.y); ++y)
    for (int x = std::min(a.x, b.x); x <= std::max(a.x, b.x); ++x)
      if (segment_touches_cell(a, b, {x, y})) out.insert({x, y});
  return out;
}

inline bool brute_los(const OccupancyGrid& g, Cell a, Cell b) {
  for (const Cell& c : brute_supercover(a, b))
    if (c != a && c != b && g.at(c) == CellState::Obstacle) return false;
  return true;
}

// Bellman-Ford relaxation to a fixed point over Free cells: 8-connected,
// costs {1, sqrt 2} * res, no squeezing past an obstacle corner.
inline std::vector<double> relax_distances(const OccupancyGrid& g, Cell src) {
  std::vector<double> d(g.size(), kInfinity);
  d[g.index(src)] = 0.0;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int y = 0; y < g.height(); ++y)
      for (int x = 0; x < g.width(); ++x) {
        const Cell c{x, y};
        if (g.at(c) != CellState::Free || !(d[g.index(c)] < kInfinity)) continue;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const Cell n{x + dx, y + dy};
            if ((dx == 0 && dy == 0) || !g.is(n, CellState::Free)) continue;
            if (dx != 0 && dy != 0 &&
                (g.at({x + dx, y}) == CellState::Obstacle || g.at({x, y + dy}) == CellState::Obstacle))
              continue;
            const double nd = d[g.index(c)] + g.resolution() * ((dx != 0 && dy != 0) ? std::sqrt(2.0) : 1.0);
            if (nd < d[g.index(n)] - 1e-12) {
              d[g.index(n)] = nd;
              changed = true;
            }
          }
      }
  }
  return d;
}

inline OccupancyGrid random_grid(Rng& rng, int w, int h, double obstacle_p, double unknown_p = 0.0) {
  OccupancyGrid g(w, h, 0.25);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double u = rng.uniform01();
      g.set({x, y}, u < obstacle_p ? CellState::Obstacle : u < obstacle_p + unknown_p ? CellState::Unknown
                                                                                      : CellState::Free);
    }
  return g;
}

// Random walk through a world, recording what the agent sees. With noise > 0
// each detection's descriptor is jittered and renormalized.
inline std::vector<Observation> observation_stream(const World& world, AgentPose pose,
                                                   const std::vector<std::string>& classes, int steps,
                                                   std::uint64_t seed, double noise = 0.0) {
  Rng rng(seed);
  std::vector<Observation> out;
  for (int t = 0; t < steps; ++t) {
    Observation obs = observe(world, pose, classes, t);
    if (noise > 0) {
      for (auto* list : {&obs.annotated, &obs.raw_context})
        for (Detection& d : *list) {
          Rng jitter(combine_seed(seed, static_cast<std::uint64_t>(t * 1000 + d.identifier)));
          double n = 0;
          for (double& v : d.feature) {
            v += noise * (2 * jitter.uniform01() - 1);
            n += v * v;
          }
          for (double& v : d.feature) v /= std::sqrt(n);
        }
    }
    out.push_back(std::move(obs));
    const int r = rng.uniform_int(0, 9);
    const Action a = r < 6 ? Action::MoveForward : r < 8 ? Action::TurnLeft : Action::TurnRight;
    pose = step_agent(pose, a, world.grid).pose;
  }
  return out;
}

}  // namespace magnav::testing
