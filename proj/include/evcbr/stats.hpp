#pragma once

#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "evcbr/graph.hpp"

namespace evcbr {

enum class IdfNormalization { Max, L2, None };

/// Which occurrences of a tail entity count towards P(t) and P(r|t).
enum class ImportancePosition { Tail, Either };

struct StatsOptions {
  IdfNormalization idf_normalization = IdfNormalization::Max;
  ImportancePosition importance_position = ImportancePosition::Tail;
  /// Also add the superclasses of every type-relation neighbour to an
  /// entity's vector, so two instances of sibling classes share the parent.
  bool expand_type_superclasses = true;
};

/// Weighted Jaccard over binary vectors given as sorted position lists:
/// sum of shared weights over sum of union weights. Zero when both are empty.
double weighted_jaccard(std::span<const EntityId> a, std::span<const EntityId> b, std::span<const double> weights);

/// Normalised importance of each outgoing triple of a cause entity.
struct TripleImportance {
  EntityId cause;
  std::vector<Edge> triples;   // Out_c in (relation, tail) order
  std::vector<double> raw;     // log(P(r|t) / P(t)), before clamping
  std::vector<double> weight;  // nI; sums to 1
};

struct TailSimilarity {
  double jaccard = 0;   // CS_t
  double coverage = 0;  // CC_t
};

/// |targets ∩ effect| over the union and over |targets|. Both inputs sorted.
TailSimilarity case_tail_similarity(std::span<const RelationId> targets, std::span<const RelationId> effect_relations);

/// Count statistics and similarity measures over one graph. Entity vectors are
/// built lazily and cached; concurrent readers are safe.
class StatsIndex {
 public:
  StatsIndex(const KnowledgeGraph& graph, StatsOptions options = {});

  const KnowledgeGraph& graph() const { return *graph_; }
  const StatsOptions& options() const { return options_; }

  /// Sorted positions set in the entity's vector.
  std::span<const EntityId> entity_vector(EntityId e) const;
  /// Number of incoming edges plus number of entities it is a superclass of.
  std::size_t idf_count(EntityId e) const { return e.index() < counts_.size() ? counts_[e.index()] : 0; }
  double idf(EntityId e) const { return e.index() < idf_.size() ? idf_[e.index()] : 0.0; }
  std::span<const double> idf_weights() const { return idf_; }

  double entity_similarity(EntityId a, EntityId b) const;

  /// Throws QueryError when the cause has no outgoing triples.
  TripleImportance triple_importance(EntityId cause) const;

  /// For each relation of the cause, the best importance-weighted similarity
  /// between a cause tail and a candidate-cause tail under that relation.
  double case_head_similarity(const TripleImportance& importance, EntityId case_cause) const;

 private:
  struct CachedVector {
    std::vector<EntityId> positions;
  };

  const CachedVector& cached(EntityId e) const;
  std::vector<EntityId> compute_vector(EntityId e) const;

  const KnowledgeGraph* graph_;
  StatsOptions options_;
  std::vector<std::size_t> counts_;
  std::vector<double> idf_;
  mutable std::unique_ptr<std::once_flag[]> once_;
  mutable std::vector<CachedVector> vectors_;
};

}  // namespace evcbr
