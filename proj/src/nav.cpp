#include "magnav/nav.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>

namespace magnav {

namespace {

double speed_of(CellState s, const FmmOptions& opts) {
  switch (s) {
    case CellState::Free: return 1.0;
    case CellState::Unknown: return opts.unknown_speed;
    case CellState::Obstacle: return 0.0;
  }
  return 0.0;
}

// Upwind update from two orthogonal directions with spacing h.
double solve_pair(double a, double b, double h) {
  if (a > b) std::swap(a, b);
  if (a == kInfinity) return kInfinity;
  if (b - a >= h) return a + h;
  return 0.5 * (a + b + std::sqrt(2.0 * h * h - (a - b) * (a - b)));
}

}  // namespace

DistanceField fmm_field(const OccupancyGrid& known, std::span<const FieldSeed> seeds, const FmmOptions& opts) {
  const int w = known.width();
  const int h = known.height();
  DistanceField field{w, h, known.resolution(), std::vector<double>(known.size(), kInfinity)};
  std::vector<double> speed(known.size());
  for (std::size_t i = 0; i < known.size(); ++i) speed[i] = speed_of(known.raw(i), opts);
  std::vector<bool> accepted(known.size(), false);

  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  for (const FieldSeed& s : seeds) {
    if (!known.in_bounds(s.cell)) throw InputError("field seed out of bounds " + to_string(s.cell));
    const std::size_t i = known.index(s.cell);
    if (speed[i] <= 0) throw InputError("field seed on impassable cell " + to_string(s.cell));
    if (s.value < field.values[i]) {
      field.values[i] = s.value;
      heap.push({s.value, i});
    }
  }

  auto passable = [&](Cell c) { return known.in_bounds(c) && speed[known.index(c)] > 0; };
  auto done = [&](Cell c) {
    return known.in_bounds(c) && accepted[known.index(c)] ? field.values[known.index(c)] : kInfinity;
  };
  // Value of a diagonal neighbour, usable only if the corner is open.
  auto diag = [&](Cell c, int dx, int dy) {
    if (!passable({c.x + dx, c.y}) || !passable({c.x, c.y + dy})) return kInfinity;
    return done({c.x + dx, c.y + dy});
  };

  auto update = [&](Cell c) {
    const double step = known.resolution() / speed[known.index(c)];
    const double a = std::min(done({c.x - 1, c.y}), done({c.x + 1, c.y}));
    const double b = std::min(done({c.x, c.y - 1}), done({c.x, c.y + 1}));
    double t = solve_pair(a, b, step);
    const double a2 = std::min(diag(c, 1, 1), diag(c, -1, -1));
    const double b2 = std::min(diag(c, 1, -1), diag(c, -1, 1));
    t = std::min(t, solve_pair(a2, b2, step * std::numbers::sqrt2));
    return t;
  };

  while (!heap.empty()) {
    const auto [value, i] = heap.top();
    heap.pop();
    if (accepted[i] || value > field.values[i]) continue;
    accepted[i] = true;
    const Cell c = known.cell_at(i);
    for (const Cell& off : kCompass) {
      const Cell n = c + off;
      if (!passable(n)) continue;
      const std::size_t ni = known.index(n);
      if (accepted[ni]) continue;
      const double t = update(n);
      if (t < field.values[ni]) {
        field.values[ni] = t;
        heap.push({t, ni});
      }
    }
  }
  return field;
}

DistanceField fmm_field(const OccupancyGrid& known, Cell goal, const FmmOptions& opts) {
  if (!known.in_bounds(goal)) throw InputError("FMM goal out of bounds " + to_string(goal));
  if (known.at(goal) == CellState::Obstacle) throw InputError("FMM goal is an obstacle " + to_string(goal));
  const FieldSeed seed{goal, 0.0};
  return fmm_field(known, std::span<const FieldSeed>(&seed, 1), opts);
}

std::optional<Action> greedy_action(const DistanceField& field, const AgentPose& pose, double stop_radius) {
  const double here = field.at(pose.position);
  if (here <= stop_radius) return Action::Stop;

  int best_k = -1;
  double best_v = kInfinity;
  Cell best_cell{};
  for (int k = 0; k < 8; ++k) {
    const Cell off = kCompass[static_cast<std::size_t>(k)];
    const Cell n = pose.position + off;
    const double v = field.at(n);
    if (!(v < kInfinity)) continue;
    if (off.x != 0 && off.y != 0) {
      if (!field.reachable({pose.position.x + off.x, pose.position.y}) ||
          !field.reachable({pose.position.x, pose.position.y + off.y}))
        continue;
    }
    if (v < best_v || (v == best_v && n < best_cell)) {
      best_v = v;
      best_k = k;
      best_cell = n;
    }
  }
  if (best_k < 0) return std::nullopt;
  if (compass_index(pose.heading) == best_k) return Action::MoveForward;
  const double target = best_k * (kPi / 4);
  const double diff = normalize_angle(target - pose.heading);
  return diff > 0 ? Action::TurnLeft : Action::TurnRight;
}

std::vector<Frontier> detect_frontiers(const OccupancyGrid& known) {
  std::vector<Frontier> out;
  for (int y = 0; y < known.height(); ++y) {
    for (int x = 0; x < known.width(); ++x) {
      const Cell c{x, y};
      if (known.at(c) != CellState::Free) continue;
      int unknown = 0;
      for (const Cell& off : kCompass)
        if (known.is(c + off, CellState::Unknown)) ++unknown;
      if (unknown > 0) out.push_back({c, unknown, 0.0});
    }
  }
  return out;
}

std::optional<Frontier> select_frontier(std::span<const Frontier> frontiers, const MemoryStore& memory,
                                        std::span<const std::string> landmark_classes,
                                        const DistanceField& from_agent, const FrontierWeights& weights) {
  std::vector<Cell> landmarks;
  for (const auto& [key, entry] : memory.objects())
    if (std::find(landmark_classes.begin(), landmark_classes.end(), entry.class_name) != landmark_classes.end())
      landmarks.push_back(entry.centroid());

  std::optional<Frontier> best;
  for (Frontier f : frontiers) {
    const double geo = from_agent.at(f.cell);
    if (!(geo < kInfinity)) continue;
    double proximity = 0.0;
    for (const Cell& l : landmarks) proximity = std::max(proximity, std::exp(-cell_distance(f.cell, l) / weights.tau));
    f.value = weights.alpha * proximity + weights.beta * f.unknown_neighbors -
              weights.gamma * (geo / from_agent.resolution);
    if (!best || f.value > best->value || (f.value == best->value && f.cell < best->cell)) best = f;
  }
  return best;
}

}  // namespace magnav
