#include "magnav/viewplan.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "magnav/rng.hpp"

namespace magnav {

void ViewplanConfig::validate() const {
  if (w_visible < 0 || w_fov < 0 || w_distance < 0) throw InputError("viewplan weights must be >= 0");
  if (!(c_infeasible > 0)) throw InputError("c_infeasible must be > 0");
  if (!(d_desired > 0)) throw InputError("d_desired must be > 0");
  if (ga.population < 2) throw InputError("GA population must be >= 2");
  if (ga.generations < 0 || ga.tournament_size < 1) throw InputError("bad GA schedule");
}

int visible_count(const OccupancyGrid& grid, Cell v, const BoundarySet& g) {
  int n = 0;
  for (const Cell& p : g)
    if (raycast_los(grid, v, p)) ++n;
  return n;
}

double visibility_reward(const OccupancyGrid& grid, Cell v, const BoundarySet& g, const ViewplanConfig& cfg) {
  return cfg.w_visible * std::min(visible_count(grid, v, g), 3);
}

double angular_spread(Cell v, const BoundarySet& g) {
  for (const Cell& p : g)
    if (p == v) return kPi;
  double best = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = i + 1; j < g.size(); ++j) {
      const double ax = g[i].x - v.x, ay = g[i].y - v.y;
      const double bx = g[j].x - v.x, by = g[j].y - v.y;
      const double angle = std::atan2(std::abs(ax * by - ay * bx), ax * bx + ay * by);
      best = std::max(best, angle);
    }
  }
  return best;
}

double fov_reward(Cell v, const BoundarySet& g, const ViewplanConfig& cfg) {
  const double theta = angular_spread(v, g);
  return theta < cfg.fov ? cfg.w_fov * theta : 0.0;
}

double distance_penalty(Cell v, const BoundarySet& g, const ViewplanConfig& cfg, double resolution) {
  double sum = 0.0;
  for (const Cell& p : g) sum += std::abs(cell_distance(v, p) * resolution - cfg.d_desired);
  return cfg.w_distance * (sum / static_cast<double>(g.size()));
}

double feasibility_penalty(const OccupancyGrid& known, Cell v, const ViewplanConfig& cfg) {
  return known.at(v) == CellState::Free ? 0.0 : cfg.c_infeasible;
}

ViewpointScore objective(const OccupancyGrid& known, Cell v, const BoundarySet& g, const ViewplanConfig& cfg) {
  if (!known.in_bounds(v)) throw InputError("viewpoint out of bounds " + to_string(v));
  ViewpointScore s;
  s.r_visible = visibility_reward(known, v, g, cfg);
  s.r_fov = fov_reward(v, g, cfg);
  s.p_distance = distance_penalty(v, g, cfg, known.resolution());
  s.p_feasibility = feasibility_penalty(known, v, cfg);
  s.total = -s.r_visible - s.r_fov + s.p_distance + s.p_feasibility;
  return s;
}

ViewpointSolution optimize_exhaustive(const OccupancyGrid& known, const BoundarySet& g, const ViewplanConfig& cfg) {
  cfg.validate();
  if (known.count(CellState::Free) == 0) throw NoFeasibleViewpoint("no known free cell to stand on");
  ViewpointSolution best{{0, 0}, {}};
  best.score.total = kInfinity;
  for (int y = 0; y < known.height(); ++y) {
    for (int x = 0; x < known.width(); ++x) {
      const Cell c{x, y};
      const ViewpointScore s = objective(known, c, g, cfg);
      if (s.total < best.score.total) best = {c, s};
    }
  }
  return best;
}

namespace {

class FitnessCache {
 public:
  FitnessCache(const OccupancyGrid& known, const BoundarySet& g, const ViewplanConfig& cfg)
      : known_(known), g_(g), cfg_(cfg), scores_(known.size()), done_(known.size(), false) {}

  const ViewpointScore& operator()(Cell c) {
    const std::size_t i = known_.index(c);
    if (!done_[i]) {
      scores_[i] = objective(known_, c, g_, cfg_);
      done_[i] = true;
    }
    return scores_[i];
  }

 private:
  const OccupancyGrid& known_;
  const BoundarySet& g_;
  const ViewplanConfig& cfg_;
  std::vector<ViewpointScore> scores_;
  std::vector<bool> done_;
};

bool better(const ViewpointSolution& a, const ViewpointSolution& b) {
  if (a.score.total != b.score.total) return a.score.total < b.score.total;
  return a.cell < b.cell;
}

}  // namespace

ViewpointSolution optimize_ga(const OccupancyGrid& known, const BoundarySet& g, const ViewplanConfig& cfg,
                              std::span<const Cell> initial) {
  cfg.validate();
  std::vector<Cell> free_cells;
  for (std::size_t i = 0; i < known.size(); ++i)
    if (known.raw(i) == CellState::Free) free_cells.push_back(known.cell_at(i));
  if (free_cells.empty()) throw NoFeasibleViewpoint("no known free cell to stand on");

  const GaConfig& ga = cfg.ga;
  Rng rng(ga.seed);
  FitnessCache fitness(known, g, cfg);
  const auto pop_size = static_cast<std::size_t>(ga.population);

  std::vector<Cell> pop;
  pop.reserve(pop_size);
  for (const Cell& c : initial) {
    if (!known.in_bounds(c)) throw InputError("initial individual out of bounds " + to_string(c));
    if (pop.size() < pop_size) pop.push_back(c);
  }
  while (pop.size() < pop_size)
    pop.push_back(free_cells[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(free_cells.size()) - 1))]);

  ViewpointSolution best{pop[0], fitness(pop[0])};
  auto track = [&](const std::vector<Cell>& p) {
    for (const Cell& c : p) {
      ViewpointSolution s{c, fitness(c)};
      if (better(s, best)) best = s;
    }
  };
  track(pop);

  auto tournament = [&]() -> Cell {
    std::size_t winner = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(pop.size()) - 1));
    for (int k = 1; k < ga.tournament_size; ++k) {
      const auto i = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(pop.size()) - 1));
      const double fi = fitness(pop[i]).total;
      const double fw = fitness(pop[winner]).total;
      if (fi < fw || (fi == fw && i < winner)) winner = i;
    }
    return pop[winner];
  };
  // Resamples one coordinate uniformly over the values that land on a known
  // Free cell in that row or column, or over the full range if there are none.
  std::vector<int> line;
  auto resample = [&](Cell& c) {
    const bool along_x = rng.bernoulli(0.5);
    const int n = along_x ? known.width() : known.height();
    line.clear();
    for (int v = 0; v < n; ++v)
      if (known.at(along_x ? Cell{v, c.y} : Cell{c.x, v}) == CellState::Free) line.push_back(v);
    const int v = line.empty() ? rng.uniform_int(0, n - 1)
                               : line[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(line.size()) - 1))];
    (along_x ? c.x : c.y) = v;
  };
  auto mutate = [&](Cell& c) {
    if (rng.bernoulli(ga.mutation_rate)) resample(c);
  };

  // A generation never holds the same cell twice: a duplicate child has one
  // coordinate resampled until it is new. Keeps the search from collapsing
  // onto a single cell after a few rounds of selection.
  std::vector<bool> taken(known.size(), false);
  auto add_unique = [&](std::vector<Cell>& next, Cell c) {
    for (int tries = 0; tries < 32 && taken[known.index(c)]; ++tries) resample(c);
    taken[known.index(c)] = true;
    next.push_back(c);
  };

  for (int gen = 0; gen < ga.generations; ++gen) {
    std::vector<Cell> next;
    next.reserve(pop_size);
    std::size_t elite = 0;
    for (std::size_t i = 1; i < pop.size(); ++i)
      if (better({pop[i], fitness(pop[i])}, {pop[elite], fitness(pop[elite])})) elite = i;
    std::fill(taken.begin(), taken.end(), false);
    next.push_back(pop[elite]);
    taken[known.index(pop[elite])] = true;

    while (next.size() < pop_size) {
      Cell a = tournament();
      Cell b = tournament();
      if (rng.bernoulli(ga.crossover_rate)) {
        const Cell ca{a.x, b.y};
        const Cell cb{b.x, a.y};
        a = ca;
        b = cb;
      }
      mutate(a);
      mutate(b);
      add_unique(next, a);
      if (next.size() < pop_size) add_unique(next, b);
    }
    pop = std::move(next);
    track(pop);
  }
  return best;
}

}  // namespace magnav
