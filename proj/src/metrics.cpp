#include "magnav/metrics.hpp"

#include <algorithm>
#include <functional>
#include <queue>

namespace magnav {

namespace {

double dijkstra(const OccupancyGrid& grid, Cell start, std::span<const Cell> goals) {
  if (!grid.is(start, CellState::Free)) throw InputError("path start is not a free cell " + to_string(start));
  std::vector<bool> is_goal(grid.size(), false);
  for (const Cell& g : goals) {
    if (!grid.is(g, CellState::Free)) throw InputError("path goal is not a free cell " + to_string(g));
    is_goal[grid.index(g)] = true;
  }
  std::vector<double> dist(grid.size(), kInfinity);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[grid.index(start)] = 0.0;
  heap.push({0.0, grid.index(start)});
  const double res = grid.resolution();
  while (!heap.empty()) {
    const auto [d, i] = heap.top();
    heap.pop();
    if (d > dist[i]) continue;
    if (is_goal[i]) return d;
    const Cell c = grid.cell_at(i);
    for (const Cell& off : kCompass) {
      const Cell n = c + off;
      if (!grid.is(n, CellState::Free) || !move_allowed(grid, c, off)) continue;
      const double nd = d + (off.x != 0 && off.y != 0 ? std::numbers::sqrt2 : 1.0) * res;
      const std::size_t ni = grid.index(n);
      if (nd < dist[ni]) {
        dist[ni] = nd;
        heap.push({nd, ni});
      }
    }
  }
  return kInfinity;
}

}  // namespace

double shortest_path_length(const OccupancyGrid& grid, Cell start, Cell goal) {
  return dijkstra(grid, start, std::span<const Cell>(&goal, 1));
}

double shortest_path_length(const OccupancyGrid& grid, Cell start, std::span<const Cell> goals) {
  return dijkstra(grid, start, goals);
}

double compute_dtg(Cell pos, std::span<const Cell> footprint, double resolution) {
  double best = kInfinity;
  for (const Cell& c : footprint) best = std::min(best, cell_distance(pos, c) * resolution);
  return best;
}

std::vector<Cell> goal_cells(const OccupancyGrid& grid, std::span<const Cell> footprint, double radius) {
  std::vector<Cell> out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid.raw(i) != CellState::Free) continue;
    const Cell c = grid.cell_at(i);
    if (compute_dtg(c, footprint, grid.resolution()) <= radius) out.push_back(c);
  }
  return out;
}

double episode_spl(bool success, double p, double l) {
  if (!success || !(l < kInfinity)) return 0.0;
  const double denom = std::max(p, l);
  return denom > 0 ? l / denom : 1.0;
}

double compute_spl(std::span<const EpisodeMetrics> episodes) {
  if (episodes.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& e : episodes) sum += episode_spl(e.success, e.p, e.l);
  return sum / static_cast<double>(episodes.size());
}

bool is_success(bool stopped, int steps, double dtg) {
  return stopped && steps <= kSuccessSteps && dtg <= kSuccessRadius;
}

}  // namespace magnav
