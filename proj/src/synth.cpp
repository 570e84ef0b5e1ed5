#include "magnav/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string_view>

#include "magnav/metrics.hpp"
#include "magnav/rng.hpp"

namespace magnav {

namespace {

constexpr std::array<std::string_view, 8> kTargets = {"bag", "cup", "backpack", "plant", "lamp", "box", "bottle",
                                                      "book"};
constexpr std::array<std::string_view, 7> kLandmarks = {"stool", "table", "sofa", "shelf", "cabinet", "desk",
                                                        "trash can"};
constexpr std::array<std::string_view, 5> kClutter = {"tv", "vase", "clock", "fan", "basket"};
constexpr std::array<std::string_view, 8> kColors = {"black", "red", "white", "blue", "green", "brown", "gray",
                                                     "yellow"};
constexpr std::array<std::string_view, 4> kRelations = {"on", "next to", "near", "beside"};

template <typename T, std::size_t N>
std::string pick(Rng& rng, const std::array<T, N>& a) {
  return std::string(a[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(N) - 1))]);
}

std::vector<double> random_feature(Rng& rng, int dim) {
  std::vector<double> f(static_cast<std::size_t>(dim));
  double n = 0;
  while (n < 1e-6) {
    n = 0;
    for (double& v : f) {
      v = 2.0 * rng.uniform01() - 1.0;
      n += v * v;
    }
  }
  n = std::sqrt(n);
  for (double& v : f) v /= n;
  return f;
}

struct Layout {
  OccupancyGrid grid;
  std::vector<SceneObject> objects;
};

bool near_object(const Layout& L, Cell c, int gap) {
  for (const auto& o : L.objects)
    for (const Cell& f : o.footprint)
      if (std::max(std::abs(f.x - c.x), std::abs(f.y - c.y)) <= gap) return true;
  return false;
}

std::vector<Cell> rect(Cell at, int w, int h) {
  std::vector<Cell> out;
  for (int dy = 0; dy < h; ++dy)
    for (int dx = 0; dx < w; ++dx) out.push_back({at.x + dx, at.y + dy});
  return out;
}

bool fits(const Layout& L, const std::vector<Cell>& fp, int gap) {
  for (const Cell& c : fp) {
    if (c.x < 1 || c.y < 1 || c.x >= L.grid.width() - 1 || c.y >= L.grid.height() - 1) return false;
    if (L.grid.at(c) != CellState::Free || near_object(L, c, gap)) return false;
  }
  return true;
}

std::vector<Cell> random_shape(Rng& rng, Cell at) {
  switch (rng.uniform_int(0, 2)) {
    case 0: return rect(at, 1, 1);
    case 1: return rng.bernoulli(0.5) ? rect(at, 2, 1) : rect(at, 1, 2);
    default: return rect(at, 2, 2);
  }
}

Cell random_cell(Rng& rng, const OccupancyGrid& g) {
  return {rng.uniform_int(1, g.width() - 2), rng.uniform_int(1, g.height() - 2)};
}

}  // namespace

EpisodeSpec generate_scenario(std::uint64_t seed, const std::string& name, const SynthOptions& opts) {
  Rng rng(seed);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Layout L{OccupancyGrid(opts.width, opts.height, opts.resolution), {}};
    OccupancyGrid& g = L.grid;
    for (int x = 0; x < g.width(); ++x) {
      g.set({x, 0}, CellState::Obstacle);
      g.set({x, g.height() - 1}, CellState::Obstacle);
    }
    for (int y = 0; y < g.height(); ++y) {
      g.set({0, y}, CellState::Obstacle);
      g.set({g.width() - 1, y}, CellState::Obstacle);
    }
    for (int k = 0; k < opts.walls; ++k) {
      const Cell a = random_cell(rng, g);
      const int len = rng.uniform_int(3, 7);
      const bool horizontal = rng.bernoulli(0.5);
      for (int i = 0; i < len; ++i) {
        const Cell c = horizontal ? Cell{a.x + i, a.y} : Cell{a.x, a.y + i};
        if (g.in_bounds(c)) g.set(c, CellState::Obstacle);
      }
    }

    const std::string target_class = pick(rng, kTargets);
    const std::string landmark_class = pick(rng, kLandmarks);
    const std::string target_color = pick(rng, kColors);
    const std::string landmark_color = pick(rng, kColors);
    auto add = [&](std::string id, std::string cls, std::vector<std::string> attrs, std::vector<Cell> fp) {
      for (const Cell& c : fp) g.set(c, CellState::Obstacle);
      L.objects.push_back({std::move(id), std::move(cls), std::move(attrs), random_feature(rng, opts.feature_dim),
                           std::move(fp)});
    };

    // Target, then a landmark touching it.
    std::vector<Cell> fp = random_shape(rng, random_cell(rng, g));
    if (!fits(L, fp, 1)) continue;
    add("target", target_class, {target_color}, fp);
    bool placed = false;
    for (int tries = 0; tries < 50 && !placed; ++tries) {
      const Cell t = L.objects[0].footprint[static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<int>(L.objects[0].footprint.size()) - 1))];
      const Cell off = kCompass[static_cast<std::size_t>(2 * rng.uniform_int(0, 3))];
      const Cell at{t.x + off.x, t.y + off.y};
      const auto lfp = rng.bernoulli(0.5) ? rect(at, 1, 1) : rect(at, 1 + (off.x == 0), 1 + (off.y == 0));
      Layout without = L;
      without.objects.clear();
      if (!fits(without, lfp, 0)) continue;  // the target's cells are already Obstacle
      add("landmark", landmark_class, {landmark_color}, lfp);
      placed = true;
    }
    if (!placed) continue;

    const int n_distractors = rng.uniform_int(1, std::max(1, opts.distractors_max));
    for (int d = 0; d < n_distractors; ++d) {
      for (int tries = 0; tries < 100; ++tries) {
        const auto dfp = random_shape(rng, random_cell(rng, g));
        if (!fits(L, dfp, 1) || compute_dtg(dfp[0], L.objects[0].footprint, 1.0) < 6.0) continue;
        std::string color = pick(rng, kColors);
        if (color == target_color) color = "striped";
        add("decoy" + std::to_string(d + 1), target_class, {color}, dfp);
        break;
      }
    }
    const int n_clutter = rng.uniform_int(0, opts.clutter_max);
    for (int d = 0; d < n_clutter; ++d) {
      for (int tries = 0; tries < 100; ++tries) {
        const auto cfp = random_shape(rng, random_cell(rng, g));
        if (!fits(L, cfp, 1)) continue;
        add("clutter" + std::to_string(d + 1), pick(rng, kClutter), {pick(rng, kColors)}, cfp);
        break;
      }
    }

    // Every object must be approachable from the start.
    Cell start{};
    bool found = false;
    for (int tries = 0; tries < 200 && !found; ++tries) {
      start = random_cell(rng, g);
      found = g.at(start) == CellState::Free &&
              compute_dtg(start, L.objects[0].footprint, 1.0) >= opts.min_start_cells;
    }
    if (!found) continue;
    bool reachable = true;
    for (const auto& o : L.objects) {
      const auto goals = goal_cells(g, o.footprint);
      if (goals.empty() || !(shortest_path_length(g, start, goals) < kInfinity)) reachable = false;
    }
    if (!reachable) continue;

    EpisodeSpec spec;
    spec.name = name;
    spec.world = World{g, L.objects};
    spec.initial_known = OccupancyGrid(g.width(), g.height(), g.resolution(), CellState::Unknown);
    const std::string relation = pick(rng, kRelations);
    spec.instruction.raw_text = "Find the " + target_color + " " + target_class + " " + relation + " the " +
                                landmark_color + " " + landmark_class;
    spec.instruction.target_class = target_class;
    spec.instruction.landmark_classes = {landmark_class};
    spec.instruction.target_attributes = {target_color};
    spec.instruction.attributes = {target_color, landmark_color};
    spec.instruction.landmark_relations = {{landmark_class, relation}};
    spec.start.position = start;
    spec.start.heading = rng.uniform_int(0, 11) * kTurnIncrement;
    spec.start.fov = opts.fov;
    spec.start.sense_range = opts.sense_range;
    spec.truth_target_id = "target";
    spec.seed = seed;
    validate(spec);
    return spec;
  }
  throw InputError("could not generate a solvable scenario for seed " + std::to_string(seed));
}

}  // namespace magnav
