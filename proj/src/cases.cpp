#include "evcbr/cases.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "evcbr/error.hpp"
#include "evcbr/parallel.hpp"

namespace evcbr {

std::vector<Case> candidate_cases(const KnowledgeGraph& graph, const PredictionQuery& query) {
  std::vector<Case> out;
  for (const Triple& t : graph.triples_with_relation(query.causal_relation)) {
    if (t.head == query.cause || t.tail == query.cause) continue;
    out.push_back({t.head, t.relation, t.tail, 0.0, SelectedBy::HeadSimilarity});
  }
  if (out.empty()) throw QueryError("no cases for relation");
  return out;
}

namespace {

void select_pass(std::span<const Case> candidates, const std::vector<double>& score, std::size_t limit,
                 SelectedBy tag, std::vector<char>& taken, std::unordered_set<EntityId>& blocked_causes,
                 std::vector<Case>& out) {
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < candidates.size(); ++i)
    if (!taken[i]) order.push_back(i);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (score[a] != score[b]) return score[a] > score[b];
    if (candidates[a].cause != candidates[b].cause) return candidates[a].cause < candidates[b].cause;
    return candidates[a].effect < candidates[b].effect;
  });

  std::unordered_set<EntityId> pass_causes;
  std::size_t picked = 0;
  for (std::size_t i : order) {
    if (picked == limit) break;
    const EntityId cause = candidates[i].cause;
    if (blocked_causes.count(cause) || pass_causes.count(cause)) continue;
    pass_causes.insert(cause);
    taken[i] = 1;
    Case c = candidates[i];
    c.score = score[i];
    c.selected_by = tag;
    out.push_back(c);
    ++picked;
  }
  blocked_causes.insert(pass_causes.begin(), pass_causes.end());
}

}  // namespace

std::vector<Case> rank_and_select(std::span<const Case> candidates, std::span<const CaseScores> scores,
                                  const CaseSelectionOptions& options) {
  if (candidates.size() != scores.size()) throw std::invalid_argument("one score per candidate required");

  std::vector<double> head_score(candidates.size()), cov_score(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    head_score[i] = scores[i].head * scores[i].tail_jaccard;
    cov_score[i] = (1.0 + scores[i].head) * scores[i].tail_coverage;
  }

  std::vector<Case> out;
  std::vector<char> taken(candidates.size(), 0);
  std::unordered_set<EntityId> blocked;
  select_pass(candidates, head_score, options.n_head, SelectedBy::HeadSimilarity, taken, blocked, out);
  if (!options.distinct_causes_across_passes) blocked.clear();
  select_pass(candidates, cov_score, options.n_cov, SelectedBy::Coverage, taken, blocked, out);
  return out;
}

std::vector<Case> select_cases(const StatsIndex& stats, const PredictionQuery& query,
                               const CaseSelectionOptions& options, std::size_t threads) {
  const auto& graph = stats.graph();
  auto candidates = candidate_cases(graph, query);
  auto importance = stats.triple_importance(query.cause);

  // CS_h depends only on the cause, CS_t/CC_t only on the effect.
  std::vector<EntityId> causes;
  for (const Case& c : candidates) causes.push_back(c.cause);
  std::sort(causes.begin(), causes.end());
  causes.erase(std::unique(causes.begin(), causes.end()), causes.end());

  std::vector<double> head(causes.size());
  parallel_for(causes.size(), threads,
               [&](std::size_t i) { head[i] = stats.case_head_similarity(importance, causes[i]); });

  std::vector<CaseScores> scores(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    auto pos = std::lower_bound(causes.begin(), causes.end(), candidates[i].cause) - causes.begin();
    auto effect_relations = graph.out_edges(candidates[i].effect).distinct_relations();
    auto tail = case_tail_similarity(query.target_relations, effect_relations);
    scores[i] = {head[static_cast<std::size_t>(pos)], tail.jaccard, tail.coverage};
  }
  return rank_and_select(candidates, scores, options);
}

}  // namespace evcbr
