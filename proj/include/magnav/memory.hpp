#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "magnav/gridworld.hpp"

namespace magnav {

// One remembered object instance: accumulated boundary cells plus a running
// mean descriptor.
struct ObjectMemoryEntry {
  int key = 0;
  std::string class_name;
  std::set<Cell> points;
  std::vector<double> feature;
  int observations = 0;
  int last_seen_step = 0;

  // Arithmetic mean of the points, rounded to the nearest cell.
  Cell centroid() const;
};

// A keyframe: the observation that produced it and the identifier -> entry map.
struct VisualMemoryUnit {
  int step = 0;
  AgentPose pose;
  std::vector<Detection> annotated;
  std::vector<Detection> raw_context;
  std::map<int, int> entry_keys;
};

struct SimilarityWeights {
  double visual = 0.5;
  double spatial = 0.5;
  int dilation = 1;  // cells, Chebyshev
};

class MemoryStore {
 public:
  explicit MemoryStore(double delta_sim = 0.75, SimilarityWeights weights = {});

  double delta_sim() const { return delta_sim_; }
  const SimilarityWeights& weights() const { return weights_; }

  const std::map<int, ObjectMemoryEntry>& objects() const { return objects_; }
  const std::vector<VisualMemoryUnit>& keyframes() const { return keyframes_; }

  const ObjectMemoryEntry* find(int key) const;

  // Keyframes must arrive in strictly increasing step order and may only
  // reference live entries.
  void add_keyframe(VisualMemoryUnit unit);

 private:
  friend struct MemoryUpdater;

  double delta_sim_;
  SimilarityWeights weights_;
  std::map<int, ObjectMemoryEntry> objects_;
  std::vector<VisualMemoryUnit> keyframes_;
  int next_key_ = 0;
};

// Throws InputError for a zero-norm vector or a dimension mismatch.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

// |A ∩ B| / |A ∪ B| after dilating both sets.
double spatial_overlap(const std::set<Cell>& a, const std::set<Cell>& b, int dilation);

// weights.visual * max(0, cos) + weights.spatial * overlap. Symmetric.
double combined_similarity(const std::set<Cell>& entry_points, std::span<const double> entry_feature,
                           const std::set<Cell>& det_points, std::span<const double> det_feature,
                           const SimilarityWeights& weights = {});

struct Association {
  std::vector<int> new_keys;            // ascending
  std::map<int, int> identifier_to_key; // annotated identifier -> entry key
};

// Merges each annotated detection into its best same-class entry from the
// pre-observation memory, or creates a new entry when no score reaches
// delta_sim. Ties go to the lowest key.
Association associate_and_update(MemoryStore& store, const Observation& obs);

bool is_keyframe(std::span<const int> new_keys, const MemoryStore& store, std::string_view target_class);

VisualMemoryUnit make_visual_unit(const Observation& obs, const Association& assoc);

// Indices round(i*(n-1)/(m_max-1)), i = 0..m_max-1, or all when n <= m_max.
std::vector<std::size_t> sample_keyframe_indices(std::size_t n, int m_max);
std::vector<VisualMemoryUnit> sample_keyframes(std::span<const VisualMemoryUnit> keyframes, int m_max);

// Centroid of the entry mapped to `identifier` in the unit.
Cell index_position(const VisualMemoryUnit& unit, int identifier, const MemoryStore& store);

}  // namespace magnav
