#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "evcbr/graph.hpp"
#include "evcbr/stats.hpp"

namespace evcbr {

/// A query (c, r, ?e) plus the relations of the unseen effect to predict.
struct PredictionQuery {
  EntityId cause;
  RelationId causal_relation;
  std::vector<RelationId> target_relations;  // ROut_e, sorted and unique
};

enum class SelectedBy { HeadSimilarity, Coverage };

/// An existing (cause, relation, effect) triple used as a reasoning exemplar.
struct Case {
  EntityId cause;
  RelationId relation;
  EntityId effect;
  double score = 0;
  SelectedBy selected_by = SelectedBy::HeadSimilarity;
};

struct CaseSelectionOptions {
  std::size_t n_head = 20;
  std::size_t n_cov = 5;
  /// A cause picked in the first pass may not be picked again in the second.
  bool distinct_causes_across_passes = true;
};

/// Per-candidate inputs to the two ranking passes.
struct CaseScores {
  double head = 0;           // CS_h
  double tail_jaccard = 0;   // CS_t
  double tail_coverage = 0;  // CC_t
};

/// Every triple with the query's causal relation whose cause and effect both
/// differ from the query cause. Throws QueryError when there are none.
std::vector<Case> candidate_cases(const KnowledgeGraph& graph, const PredictionQuery& query);

/// Two-pass selection over pre-scored candidates: the top n_head by
/// CS_h * CS_t, then the top n_cov of the rest by (1 + CS_h) * CC_t, each pass
/// keeping one case per cause. Ties go to the lower (cause, effect) ids.
std::vector<Case> rank_and_select(std::span<const Case> candidates, std::span<const CaseScores> scores,
                                  const CaseSelectionOptions& options);

/// Scores every candidate of the query and selects the case set.
std::vector<Case> select_cases(const StatsIndex& stats, const PredictionQuery& query,
                               const CaseSelectionOptions& options, std::size_t threads = 1);

}  // namespace evcbr
