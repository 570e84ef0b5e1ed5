#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "magnav/gridworld.hpp"
#include "magnav/memory.hpp"

namespace magnav {

// Geodesic travel distance (meters) to the goal set; +inf where unreachable.
struct DistanceField {
  int width = 0;
  int height = 0;
  double resolution = 1.0;
  std::vector<double> values;

  bool in_bounds(Cell c) const { return c.x >= 0 && c.x < width && c.y >= 0 && c.y < height; }
  double at(Cell c) const { return in_bounds(c) ? values[static_cast<std::size_t>(c.y) * width + c.x] : kInfinity; }
  bool reachable(Cell c) const { return at(c) < kInfinity; }
};

struct FmmOptions {
  // Relative speed through Unknown cells; 0 makes them impassable.
  double unknown_speed = 0.5;
};

struct FieldSeed {
  Cell cell;
  double value = 0.0;
};

// Eikonal solve |grad d| = 1/speed by fast marching. Combines the axis stencil
// with the 45-degree rotated stencil (spacing sqrt(2)); the diagonal stencil is
// only used across corners whose two side cells are passable.
DistanceField fmm_field(const OccupancyGrid& known, std::span<const FieldSeed> seeds, const FmmOptions& opts = {});

// Single goal; throws InputError if the goal is out of bounds or not passable.
DistanceField fmm_field(const OccupancyGrid& known, Cell goal, const FmmOptions& opts = {});

// STOP inside stop_radius, otherwise step toward the lowest 8-neighbour
// (row-major tie-break), turning first if it is not straight ahead.
// Returns nullopt when no neighbour is reachable (no progress possible).
std::optional<Action> greedy_action(const DistanceField& field, const AgentPose& pose, double stop_radius);

struct Frontier {
  Cell cell;
  int unknown_neighbors = 0;
  double value = 0.0;
};

// Free cells 8-adjacent to at least one Unknown cell, row-major.
std::vector<Frontier> detect_frontiers(const OccupancyGrid& known);

struct FrontierWeights {
  double alpha = 1.0;   // landmark proximity
  double beta = 0.1;    // unknown neighbours
  double gamma = 0.05;  // geodesic distance, per cell
  double tau = 10.0;    // landmark decay length, cells
};

// Scores each frontier as alpha*landmark_proximity + beta*unknown_neighbors -
// gamma*geodesic_cells and returns the best. Frontiers unreachable in
// `from_agent` are skipped; nullopt means exploration is complete.
std::optional<Frontier> select_frontier(std::span<const Frontier> frontiers, const MemoryStore& memory,
                                        std::span<const std::string> landmark_classes,
                                        const DistanceField& from_agent, const FrontierWeights& weights = {});

}  // namespace magnav
