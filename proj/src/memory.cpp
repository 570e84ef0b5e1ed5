#include "magnav/memory.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace magnav {

namespace {

constexpr double kMergeSlack = 1e-9;

double norm(std::span<const double> v) {
  return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
}

std::vector<double> normalized(std::vector<double> v) {
  const double n = norm(v);
  if (!(n > 0)) throw InputError("cannot normalize a zero feature");
  for (double& x : v) x /= n;
  return v;
}

std::set<Cell> dilate(const std::set<Cell>& s, int r) {
  if (r <= 0) return s;
  std::set<Cell> out;
  for (const Cell& c : s)
    for (int dy = -r; dy <= r; ++dy)
      for (int dx = -r; dx <= r; ++dx) out.insert({c.x + dx, c.y + dy});
  return out;
}

}  // namespace

Cell ObjectMemoryEntry::centroid() const {
  if (points.empty()) throw std::logic_error("memory entry without points");
  double sx = 0, sy = 0;
  for (const Cell& c : points) {
    sx += c.x;
    sy += c.y;
  }
  const double n = static_cast<double>(points.size());
  return {static_cast<int>(std::lround(sx / n)), static_cast<int>(std::lround(sy / n))};
}

MemoryStore::MemoryStore(double delta_sim, SimilarityWeights weights)
    : delta_sim_(delta_sim), weights_(weights) {
  if (!(delta_sim > 0 && delta_sim < 1)) throw InputError("delta_sim must lie in (0, 1)");
  if (weights.visual < 0 || weights.spatial < 0 || std::abs(weights.visual + weights.spatial - 1.0) > 1e-9)
    throw InputError("similarity weights must be non-negative and sum to 1");
}

const ObjectMemoryEntry* MemoryStore::find(int key) const {
  auto it = objects_.find(key);
  return it == objects_.end() ? nullptr : &it->second;
}

void MemoryStore::add_keyframe(VisualMemoryUnit unit) {
  if (!keyframes_.empty() && unit.step <= keyframes_.back().step)
    throw std::logic_error("keyframes must be added in increasing step order");
  for (const auto& d : unit.annotated) {
    auto it = unit.entry_keys.find(d.identifier);
    if (it == unit.entry_keys.end() || !find(it->second))
      throw std::logic_error("keyframe identifier without a live memory entry");
  }
  keyframes_.push_back(std::move(unit));
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InputError("feature dimension mismatch");
  const double na = norm(a);
  const double nb = norm(b);
  if (!(na > 0) || !(nb > 0)) throw InputError("zero-norm feature");
  const double c = std::inner_product(a.begin(), a.end(), b.begin(), 0.0) / (na * nb);
  return std::clamp(c, -1.0, 1.0);
}

double spatial_overlap(const std::set<Cell>& a, const std::set<Cell>& b, int dilation) {
  const auto da = dilate(a, dilation);
  const auto db = dilate(b, dilation);
  if (da.empty() && db.empty()) return 0.0;
  std::size_t inter = 0;
  for (const Cell& c : da) inter += db.count(c);
  const std::size_t uni = da.size() + db.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double combined_similarity(const std::set<Cell>& entry_points, std::span<const double> entry_feature,
                           const std::set<Cell>& det_points, std::span<const double> det_feature,
                           const SimilarityWeights& weights) {
  const double visual = std::max(0.0, cosine_similarity(entry_feature, det_feature));
  const double spatial = spatial_overlap(entry_points, det_points, weights.dilation);
  return weights.visual * visual + weights.spatial * spatial;
}

struct MemoryUpdater {
  static Association apply(MemoryStore& store, const Observation& obs) {
    Association out;
    // Decide every detection against the snapshot first so that detections
    // from the same frame never compare against each other.
    std::vector<std::optional<int>> target(obs.annotated.size());
    for (std::size_t i = 0; i < obs.annotated.size(); ++i) {
      const Detection& det = obs.annotated[i];
      const std::set<Cell> pts(det.points.begin(), det.points.end());
      double best = -1.0;
      std::optional<int> best_key;
      for (const auto& [key, entry] : store.objects_) {
        if (entry.class_name != det.class_name) continue;
        const double s = combined_similarity(entry.points, entry.feature, pts, det.feature, store.weights_);
        if (s > best) {
          best = s;
          best_key = key;
        }
      }
      if (best_key && best >= store.delta_sim_ - kMergeSlack) target[i] = best_key;
    }

    for (std::size_t i = 0; i < obs.annotated.size(); ++i) {
      const Detection& det = obs.annotated[i];
      if (target[i]) {
        ObjectMemoryEntry& e = store.objects_.at(*target[i]);
        e.points.insert(det.points.begin(), det.points.end());
        std::vector<double> f(e.feature.size());
        for (std::size_t k = 0; k < f.size(); ++k) f[k] = e.feature[k] * e.observations + det.feature[k];
        e.feature = normalized(std::move(f));
        ++e.observations;
        e.last_seen_step = obs.step;
        out.identifier_to_key[det.identifier] = e.key;
      } else {
        ObjectMemoryEntry e;
        e.key = store.next_key_++;
        e.class_name = det.class_name;
        e.points.insert(det.points.begin(), det.points.end());
        e.feature = normalized(det.feature);
        e.observations = 1;
        e.last_seen_step = obs.step;
        out.identifier_to_key[det.identifier] = e.key;
        out.new_keys.push_back(e.key);
        store.objects_.emplace(e.key, std::move(e));
      }
    }
    return out;
  }
};

Association associate_and_update(MemoryStore& store, const Observation& obs) {
  return MemoryUpdater::apply(store, obs);
}

bool is_keyframe(std::span<const int> new_keys, const MemoryStore& store, std::string_view target_class) {
  for (int key : new_keys) {
    const auto* e = store.find(key);
    if (e && e->class_name == target_class) return true;
  }
  return false;
}

VisualMemoryUnit make_visual_unit(const Observation& obs, const Association& assoc) {
  VisualMemoryUnit unit;
  unit.step = obs.step;
  unit.pose = obs.pose;
  unit.annotated = obs.annotated;
  unit.raw_context = obs.raw_context;
  unit.entry_keys = assoc.identifier_to_key;
  return unit;
}

std::vector<std::size_t> sample_keyframe_indices(std::size_t n, int m_max) {
  if (m_max < 1) throw InputError("m_max must be at least 1");
  std::vector<std::size_t> idx;
  const auto m = static_cast<std::size_t>(m_max);
  if (n <= m) {
    idx.resize(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    return idx;
  }
  if (m == 1) return {n - 1};  // most recent
  for (std::size_t i = 0; i < m; ++i) {
    const double pos = static_cast<double>(i) * static_cast<double>(n - 1) / static_cast<double>(m - 1);
    idx.push_back(static_cast<std::size_t>(std::lround(pos)));
  }
  return idx;
}

std::vector<VisualMemoryUnit> sample_keyframes(std::span<const VisualMemoryUnit> keyframes, int m_max) {
  std::vector<VisualMemoryUnit> out;
  for (std::size_t i : sample_keyframe_indices(keyframes.size(), m_max)) out.push_back(keyframes[i]);
  return out;
}

Cell index_position(const VisualMemoryUnit& unit, int identifier, const MemoryStore& store) {
  const bool annotated = std::any_of(unit.annotated.begin(), unit.annotated.end(),
                                     [&](const Detection& d) { return d.identifier == identifier; });
  auto it = unit.entry_keys.find(identifier);
  if (!annotated || it == unit.entry_keys.end())
    throw GroundingIntegrityError("identifier " + std::to_string(identifier) + " not in keyframe at step " +
                                  std::to_string(unit.step));
  const auto* entry = store.find(it->second);
  if (!entry) throw std::logic_error("keyframe maps to missing memory entry " + std::to_string(it->second));
  return entry->centroid();
}

}  // namespace magnav
