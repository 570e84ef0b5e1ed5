#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "magnav/common.hpp"

namespace magnav {

enum class CellState : std::uint8_t { Free, Obstacle, Unknown };

// Cell lattice with metric resolution. Used both for the ground-truth world and
// for the agent's partial map.
class OccupancyGrid {
 public:
  OccupancyGrid(int width, int height, double resolution, CellState fill = CellState::Free);

  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return resolution_; }

  bool in_bounds(Cell c) const { return c.x >= 0 && c.x < width_ && c.y >= 0 && c.y < height_; }
  std::size_t index(Cell c) const { return static_cast<std::size_t>(c.y) * width_ + c.x; }
  Cell cell_at(std::size_t index) const {
    return {static_cast<int>(index % width_), static_cast<int>(index / width_)};
  }
  std::size_t size() const { return cells_.size(); }

  // Throws InputError when out of bounds.
  CellState at(Cell c) const;
  void set(Cell c, CellState s);

  // Unchecked access for hot loops; caller guarantees bounds.
  CellState raw(std::size_t index) const { return cells_[index]; }

  bool is(Cell c, CellState s) const { return in_bounds(c) && cells_[index(c)] == s; }
  std::size_t count(CellState s) const;

  friend bool operator==(const OccupancyGrid&, const OccupancyGrid&) = default;

 private:
  int width_;
  int height_;
  double resolution_;
  std::vector<CellState> cells_;
};

struct AgentPose {
  Cell position;
  double heading = 0.0;      // radians, [0, 2pi)
  double fov = kPi / 2;      // horizontal field of view, radians
  double sense_range = 3.0;  // meters

  friend bool operator==(const AgentPose&, const AgentPose&) = default;
};

struct SceneObject {
  std::string id;
  std::string class_name;
  std::vector<std::string> attributes;
  std::vector<double> feature;  // unit norm
  std::vector<Cell> footprint;
};

struct World {
  OccupancyGrid grid;
  std::vector<SceneObject> objects;

  const SceneObject* find(const std::string& id) const;
};

struct Detection {
  std::string object_id;
  std::string class_name;
  int identifier = 0;
  double visible_fraction = 0.0;
  double distance = 0.0;  // meters to the nearest visible boundary point
  double bearing = 0.0;   // radians relative to heading, (-pi, pi]
  std::vector<Cell> points;     // distinct visible boundary points
  std::vector<double> feature;  // observed descriptor
};

struct Observation {
  int step = 0;
  AgentPose pose;
  std::vector<Detection> annotated;    // target + landmark classes, identifiers 1..n
  std::vector<Detection> raw_context;  // every visible object, identifiers 1..m
};

enum class Action { MoveForward, TurnLeft, TurnRight, Stop };

std::string to_string(Action a);

struct StepResult {
  AgentPose pose;
  bool blocked = false;
  bool stopped = false;
  double distance_moved = 0.0;  // meters
};

inline constexpr double kTurnIncrement = kPi / 6;

// Offsets for the 8 compass directions, counterclockwise from +x.
inline constexpr std::array<Cell, 8> kCompass = {
    Cell{1, 0}, Cell{1, 1}, Cell{0, 1}, Cell{-1, 1}, Cell{-1, 0}, Cell{-1, -1}, Cell{0, -1}, Cell{1, -1}};

// Index into kCompass of the direction nearest to `heading`.
int compass_index(double heading);

// Diagonal moves may not pass between two cells that meet only at a corner
// when either of them is an obstacle.
bool move_allowed(const OccupancyGrid& grid, Cell from, Cell offset);

// Every cell whose closed square the segment between the two cell centres
// touches, in traversal order, endpoints included.
std::vector<Cell> supercover_cells(Cell from, Cell to);

// True iff no strictly intermediate supercover cell is an Obstacle.
// Unknown cells do not block.
bool raycast_los(const OccupancyGrid& grid, Cell from, Cell to);

// Bounding-box corners of a footprint: (min,min), (max,min), (min,max), (max,max).
std::array<Cell, 4> boundary_points(std::span<const Cell> footprint);

Observation observe(const World& world, const AgentPose& agent,
                    std::span<const std::string> instruction_classes, int step);

StepResult step_agent(const AgentPose& agent, Action action, const OccupancyGrid& grid);

// Copies into `known` every ground-truth cell the agent can currently see.
// Returns the number of cells whose known state changed.
std::size_t reveal(const OccupancyGrid& truth, const AgentPose& agent, OccupancyGrid& known);

}  // namespace magnav
