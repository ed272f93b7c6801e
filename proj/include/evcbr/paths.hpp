#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evcbr/cases.hpp"
#include "evcbr/graph.hpp"
#include "evcbr/random.hpp"

namespace evcbr {

inline constexpr std::size_t kMaxPathLength = 3;
inline constexpr std::uint64_t kUnlimitedBag = std::numeric_limits<std::uint64_t>::max();

/// Sequence of 1..3 directed relation steps. Ordered lexicographically by
/// step, a proper prefix sorting first.
class RelationPath {
 public:
  RelationPath() = default;
  RelationPath(std::initializer_list<DirectedStep> steps);

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }
  const DirectedStep& operator[](std::size_t i) const { return steps_[i]; }
  std::span<const DirectedStep> steps() const { return {steps_.data(), size_}; }
  void push_back(DirectedStep step);
  void pop_back() { --size_; }

  /// `[r1, r2^-1, ...]` with relation labels.
  std::string to_string(const KnowledgeGraph& graph) const;

  friend bool operator==(const RelationPath& a, const RelationPath& b);
  friend std::strong_ordering operator<=>(const RelationPath& a, const RelationPath& b);

 private:
  std::array<DirectedStep, kMaxPathLength> steps_{};
  std::uint8_t size_ = 0;
};

struct RelationPathHash {
  std::size_t operator()(const RelationPath& p) const noexcept;
};

/// Parses the `to_string` form back; throws ConfigError on unknown labels.
RelationPath parse_relation_path(const KnowledgeGraph& graph, std::string_view text);

/// Endpoints of a relation-path traversal with multiplicity: one count per
/// concrete walk reaching the entity.
struct PathBag {
  std::vector<std::pair<EntityId, std::uint64_t>> entries;  // sorted by entity
  bool truncated = false;

  std::uint64_t size() const;
  std::uint64_t multiplicity(EntityId e) const;
  bool empty() const { return entries.empty(); }
};

/// Expands `path` from `start` one hop at a time, following every matching
/// edge. `extra`, when given, behaves as one more triple of the graph. When a
/// hop produces more than `bag_cap` walks, the walks to the lowest entity ids
/// are kept and the bag is flagged truncated.
PathBag follow(const KnowledgeGraph& graph, EntityId start, const RelationPath& path,
               std::uint64_t bag_cap = kUnlimitedBag, const Triple* extra = nullptr);

struct SamplingRequest {
  EntityId from;
  std::span<const EntityId> targets;               // sorted
  std::span<const RelationId> first_step_relations;  // sorted; first hop is forward through one of these
  std::optional<EntityId> forbidden;               // never visited by a witnessing walk
  std::size_t budget = 100;                        // distinct relation paths wanted
  std::size_t attempts_per_path = 20;              // walk attempts = attempts_per_path * budget
  bool allow_revisits = false;
};

/// Random walks of length uniform in {1,2,3} from `from`. Each hop picks
/// uniformly among the edges that can still end in `targets` within the
/// remaining hops; a walk that completes contributes its relation path.
/// Returns distinct paths in ascending order.
std::vector<RelationPath> sample_paths(const KnowledgeGraph& graph, const SamplingRequest& request, Rng& rng);

enum class ReasoningDirection { CauseToEffect, EffectToCause };

struct ScoredPath {
  RelationPath path;
  RelationId target_relation;
  double score = 0;
  std::uint64_t hits = 0;
  std::uint64_t total = 0;
};

/// Smoothed precision hits / (epsilon + total) of each distinct path over the
/// case set. Forward paths start at case causes and are checked against the
/// effect's `target_relation` tails; backward paths start at case effects and
/// are checked against the cause's tails. Paths reaching nothing are dropped.
/// Returns the best `keep` by (score desc, path asc); keep == 0 keeps all.
std::vector<ScoredPath> score_paths(const KnowledgeGraph& graph, std::span<const Case> cases,
                                    std::span<const std::vector<RelationPath>> per_case_paths,
                                    ReasoningDirection direction, RelationId target_relation, double epsilon,
                                    std::size_t keep, std::uint64_t bag_cap = kUnlimitedBag);

}  // namespace evcbr
