#pragma once

#include <span>
#include <vector>

#include "magnav/gridworld.hpp"

namespace magnav {

inline constexpr double kSuccessRadius = 0.3;  // meters
inline constexpr int kSuccessSteps = 500;

// 8-connected Dijkstra, step costs {1, sqrt(2)} * resolution, no corner
// cutting. +inf when unreachable. Throws InputError unless both ends are Free.
double shortest_path_length(const OccupancyGrid& grid, Cell start, Cell goal);
// Same costs, to the nearest of several goal cells.
double shortest_path_length(const OccupancyGrid& grid, Cell start, std::span<const Cell> goals);

// Meters from `pos` to the nearest footprint cell.
double compute_dtg(Cell pos, std::span<const Cell> footprint, double resolution);

// Free cells within `radius` meters of the footprint: where a STOP succeeds.
std::vector<Cell> goal_cells(const OccupancyGrid& grid, std::span<const Cell> footprint,
                             double radius = kSuccessRadius);

// S * l / max(p, l) for one episode.
double episode_spl(bool success, double p, double l);

struct EpisodeMetrics {
  bool success = false;
  double p = 0.0;
  double l = 0.0;
};
// Mean of episode_spl over the list; 0 for an empty list.
double compute_spl(std::span<const EpisodeMetrics> episodes);

bool is_success(bool stopped, int steps, double dtg);

}  // namespace magnav
