#include "magnav/gridworld.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace magnav {

std::string to_string(Cell c) { return "(" + std::to_string(c.x) + "," + std::to_string(c.y) + ")"; }

std::string to_string(Action a) {
  switch (a) {
    case Action::MoveForward: return "MOVE_FORWARD";
    case Action::TurnLeft: return "TURN_LEFT";
    case Action::TurnRight: return "TURN_RIGHT";
    case Action::Stop: return "STOP";
  }
  return "?";
}

OccupancyGrid::OccupancyGrid(int width, int height, double resolution, CellState fill)
    : width_(width), height_(height), resolution_(resolution) {
  if (width <= 0 || height <= 0) throw InputError("grid dimensions must be positive");
  if (!(resolution > 0)) throw InputError("grid resolution must be positive");
  cells_.assign(static_cast<std::size_t>(width) * height, fill);
}

CellState OccupancyGrid::at(Cell c) const {
  if (!in_bounds(c)) throw InputError("cell " + to_string(c) + " out of bounds");
  return cells_[index(c)];
}

void OccupancyGrid::set(Cell c, CellState s) {
  if (!in_bounds(c)) throw InputError("cell " + to_string(c) + " out of bounds");
  cells_[index(c)] = s;
}

std::size_t OccupancyGrid::count(CellState s) const {
  return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), s));
}

const SceneObject* World::find(const std::string& id) const {
  for (const auto& o : objects)
    if (o.id == id) return &o;
  return nullptr;
}

int compass_index(double heading) {
  const double h = wrap_heading(heading);
  const int i = static_cast<int>(std::lround(h / (kPi / 4)));
  return i % 8;
}

bool move_allowed(const OccupancyGrid& grid, Cell from, Cell offset) {
  const Cell to = from + offset;
  if (!grid.in_bounds(to) || grid.at(to) == CellState::Obstacle) return false;
  if (offset.x != 0 && offset.y != 0) {
    if (grid.at({from.x + offset.x, from.y}) == CellState::Obstacle) return false;
    if (grid.at({from.x, from.y + offset.y}) == CellState::Obstacle) return false;
  }
  return true;
}

namespace {

// Walks the supercover between two cell centres. The visitor returns false to
// stop early. Exact integer arithmetic: a step crosses a vertical cell edge
// first, a horizontal one first, or passes exactly through a corner, in which
// case both side cells are visited.
template <typename Visit>
bool walk_supercover(Cell from, Cell to, Visit&& visit) {
  const int dx = to.x - from.x;
  const int dy = to.y - from.y;
  const long long nx = std::abs(dx);
  const long long ny = std::abs(dy);
  const int sx = (dx > 0) - (dx < 0);
  const int sy = (dy > 0) - (dy < 0);
  Cell c = from;
  if (!visit(c)) return false;
  long long ix = 0, iy = 0;
  while (ix < nx || iy < ny) {
    const long long d = (1 + 2 * ix) * ny - (1 + 2 * iy) * nx;
    if (d == 0) {
      if (!visit(Cell{c.x + sx, c.y})) return false;
      if (!visit(Cell{c.x, c.y + sy})) return false;
      c.x += sx;
      c.y += sy;
      ++ix;
      ++iy;
    } else if (d < 0) {
      c.x += sx;
      ++ix;
    } else {
      c.y += sy;
      ++iy;
    }
    if (!visit(c)) return false;
  }
  return true;
}

}  // namespace

std::vector<Cell> supercover_cells(Cell from, Cell to) {
  std::vector<Cell> out;
  walk_supercover(from, to, [&](Cell c) {
    out.push_back(c);
    return true;
  });
  return out;
}

bool raycast_los(const OccupancyGrid& grid, Cell from, Cell to) {
  if (!grid.in_bounds(from) || !grid.in_bounds(to))
    throw InputError("raycast endpoint out of bounds: " + to_string(from) + " -> " + to_string(to));
  return walk_supercover(from, to, [&](Cell c) {
    if (c == from || c == to) return true;
    return grid.raw(grid.index(c)) != CellState::Obstacle;
  });
}

std::array<Cell, 4> boundary_points(std::span<const Cell> footprint) {
  if (footprint.empty()) throw InputError("boundary_points: empty footprint");
  int min_x = footprint[0].x, max_x = footprint[0].x;
  int min_y = footprint[0].y, max_y = footprint[0].y;
  for (const Cell& c : footprint) {
    min_x = std::min(min_x, c.x);
    max_x = std::max(max_x, c.x);
    min_y = std::min(min_y, c.y);
    max_y = std::max(max_y, c.y);
  }
  return {Cell{min_x, min_y}, Cell{max_x, min_y}, Cell{min_x, max_y}, Cell{max_x, max_y}};
}

namespace {

double bearing_to(const AgentPose& agent, Cell target) {
  const double dx = target.x - agent.position.x;
  const double dy = target.y - agent.position.y;
  return normalize_angle(std::atan2(dy, dx) - agent.heading);
}

bool in_view(const AgentPose& agent, Cell target, double resolution, const OccupancyGrid& grid) {
  if (target == agent.position) return true;
  if (cell_distance(agent.position, target) * resolution > agent.sense_range) return false;
  if (std::abs(bearing_to(agent, target)) > agent.fov / 2 + 1e-12) return false;
  return raycast_los(grid, agent.position, target);
}

}  // namespace

Observation observe(const World& world, const AgentPose& agent,
                    std::span<const std::string> instruction_classes, int step) {
  const OccupancyGrid& grid = world.grid;
  if (!grid.is(agent.position, CellState::Free))
    throw InputError("observe: agent not on a free cell " + to_string(agent.position));

  std::vector<Detection> annotated;
  std::vector<Detection> others;
  for (const SceneObject& obj : world.objects) {
    const auto corners = boundary_points(obj.footprint);
    int visible = 0;
    int nearest = -1;
    double nearest_dist = kInfinity;
    Detection det;
    for (int i = 0; i < 4; ++i) {
      const Cell g = corners[static_cast<std::size_t>(i)];
      if (!in_view(agent, g, grid.resolution(), grid)) continue;
      ++visible;
      if (std::find(det.points.begin(), det.points.end(), g) == det.points.end()) det.points.push_back(g);
      const double d = cell_distance(agent.position, g) * grid.resolution();
      if (d < nearest_dist) {
        nearest_dist = d;
        nearest = i;
      }
    }
    if (visible == 0) continue;
    det.object_id = obj.id;
    det.class_name = obj.class_name;
    det.visible_fraction = visible / 4.0;
    det.distance = nearest_dist;
    det.bearing = bearing_to(agent, corners[static_cast<std::size_t>(nearest)]);
    det.feature = obj.feature;
    const bool listed = std::find(instruction_classes.begin(), instruction_classes.end(), obj.class_name) !=
                        instruction_classes.end();
    (listed ? annotated : others).push_back(std::move(det));
  }

  auto by_bearing = [](const Detection& a, const Detection& b) {
    if (a.bearing != b.bearing) return a.bearing < b.bearing;
    return a.object_id < b.object_id;
  };
  std::sort(annotated.begin(), annotated.end(), by_bearing);
  std::sort(others.begin(), others.end(), by_bearing);

  Observation obs;
  obs.step = step;
  obs.pose = agent;
  int next_id = 1;
  for (auto& d : annotated) d.identifier = next_id++;
  for (auto& d : others) d.identifier = next_id++;
  obs.raw_context = annotated;
  obs.raw_context.insert(obs.raw_context.end(), others.begin(), others.end());
  obs.annotated = std::move(annotated);
  return obs;
}

StepResult step_agent(const AgentPose& agent, Action action, const OccupancyGrid& grid) {
  StepResult r;
  r.pose = agent;
  switch (action) {
    case Action::MoveForward: {
      const Cell offset = kCompass[static_cast<std::size_t>(compass_index(agent.heading))];
      if (move_allowed(grid, agent.position, offset)) {
        r.pose.position = agent.position + offset;
        r.distance_moved = cell_distance(agent.position, r.pose.position) * grid.resolution();
      } else {
        r.blocked = true;
      }
      break;
    }
    case Action::TurnLeft:
      r.pose.heading = wrap_heading(agent.heading + kTurnIncrement);
      break;
    case Action::TurnRight:
      r.pose.heading = wrap_heading(agent.heading - kTurnIncrement);
      break;
    case Action::Stop:
      r.stopped = true;
      break;
  }
  return r;
}

std::size_t reveal(const OccupancyGrid& truth, const AgentPose& agent, OccupancyGrid& known) {
  std::size_t changed = 0;
  auto copy = [&](Cell c) {
    const CellState s = truth.at(c);
    if (known.at(c) != s) {
      known.set(c, s);
      ++changed;
    }
  };
  copy(agent.position);
  const int r = static_cast<int>(std::floor(agent.sense_range / truth.resolution()));
  for (int y = agent.position.y - r; y <= agent.position.y + r; ++y) {
    for (int x = agent.position.x - r; x <= agent.position.x + r; ++x) {
      const Cell c{x, y};
      if (!truth.in_bounds(c) || c == agent.position) continue;
      if (in_view(agent, c, truth.resolution(), truth)) copy(c);
    }
  }
  return changed;
}

}  // namespace magnav
