#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "magnav/gridworld.hpp"

namespace magnav {

using BoundarySet = std::array<Cell, 4>;

struct GaConfig {
  int population = 100;
  int generations = 100;
  int tournament_size = 3;
  double crossover_rate = 0.8;
  double mutation_rate = 0.2;
  std::uint64_t seed = 1;
};

struct ViewplanConfig {
  double w_visible = 15.0;
  double w_fov = 7.0;
  double w_distance = 1.0;
  double c_infeasible = 1000.0;
  double d_desired = 1.0;  // meters
  double fov = kPi / 2;    // radians
  GaConfig ga;

  // Throws InputError on negative weights or non-positive penalty/distance.
  void validate() const;
};

// Per-term breakdown of the viewpoint objective; lower total is better.
struct ViewpointScore {
  double r_visible = 0.0;
  double r_fov = 0.0;
  double p_distance = 0.0;
  double p_feasibility = 0.0;
  double total = 0.0;
};

struct ViewpointSolution {
  Cell cell;
  ViewpointScore score;
};

// Number of boundary slots with a clear line of sight from v (duplicates count per slot).
int visible_count(const OccupancyGrid& grid, Cell v, const BoundarySet& g);

double visibility_reward(const OccupancyGrid& grid, Cell v, const BoundarySet& g, const ViewplanConfig& cfg);

// Largest angle at v between rays to any two boundary points; pi when v
// coincides with a boundary point.
double angular_spread(Cell v, const BoundarySet& g);

double fov_reward(Cell v, const BoundarySet& g, const ViewplanConfig& cfg);

double distance_penalty(Cell v, const BoundarySet& g, const ViewplanConfig& cfg, double resolution);

// Evaluated on the agent's map: obstacles and unexplored cells are infeasible.
double feasibility_penalty(const OccupancyGrid& known, Cell v, const ViewplanConfig& cfg);

ViewpointScore objective(const OccupancyGrid& known, Cell v, const BoundarySet& g, const ViewplanConfig& cfg);

// Row-major scan; throws NoFeasibleViewpoint when the map has no Free cell.
ViewpointSolution optimize_exhaustive(const OccupancyGrid& known, const BoundarySet& g, const ViewplanConfig& cfg);

// Seeded genetic search over cell coordinates. `initial` individuals (if any)
// are placed at the front of generation 0.
ViewpointSolution optimize_ga(const OccupancyGrid& known, const BoundarySet& g, const ViewplanConfig& cfg,
                              std::span<const Cell> initial = {});

}  // namespace magnav
