#include "evcbr/predictor.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "evcbr/error.hpp"
#include "evcbr/parallel.hpp"

namespace evcbr {

namespace {

void sort_candidates(std::vector<CandidateScore>& candidates) {
  std::sort(candidates.begin(), candidates.end(), [](const CandidateScore& a, const CandidateScore& b) {
    if (a.active != b.active) return a.active > b.active;
    return a.entity < b.entity;
  });
}

}  // namespace

std::vector<std::pair<EntityId, double>> apply_paths(const KnowledgeGraph& graph, EntityId start,
                                                     std::span<const ScoredPath> paths, std::uint64_t bag_cap) {
  std::map<EntityId, double> score;
  for (const ScoredPath& sp : paths) {
    if (sp.score <= 0) continue;
    auto bag = follow(graph, start, sp.path, bag_cap);
    for (const auto& [e, m] : bag.entries) score[e] += sp.score * static_cast<double>(m);
  }
  return {score.begin(), score.end()};
}

double refinement_score(const KnowledgeGraph& graph, EntityId effect, RelationId target_relation, EntityId candidate,
                        std::span<const ScoredPath> reverse_paths, EntityId cause_tail, std::uint64_t bag_cap) {
  const Triple extra{effect, target_relation, candidate};
  double rs = 0;
  for (const ScoredPath& sp : reverse_paths) {
    if (sp.path.empty() || sp.path[0] != DirectedStep{target_relation, Direction::Forward}) continue;
    auto bag = follow(graph, effect, sp.path, bag_cap, &extra);
    const auto size = bag.size();
    if (size == 0) continue;
    rs += sp.score * static_cast<double>(bag.multiplicity(cause_tail)) / static_cast<double>(size);
  }
  return rs;
}

RankedPredictions combine_scores(RankedPredictions predictions, ScoreMode mode) {
  if (mode != ScoreMode::Base && !predictions.refined)
    throw std::logic_error("refined score modes need refine() first");
  for (auto& rel : predictions.relations) {
    for (auto& c : rel.candidates) {
      switch (mode) {
        case ScoreMode::Base:
          c.active = c.e_score;
          break;
        case ScoreMode::Refined:
          c.active = c.re_score.value_or(0.0);
          break;
        case ScoreMode::RefinedPlusBase:
          c.active = c.combined.value_or(c.e_score);
          break;
      }
    }
    sort_candidates(rel.candidates);
  }
  predictions.mode = mode;
  return predictions;
}

Predictor::Predictor(const StatsIndex& stats, PredictorParams params) : stats_(&stats), params_(params) {
  if (params_.epsilon < 0) throw ConfigError("epsilon must be non-negative");
  if (params_.n_paths == 0) throw ConfigError("n_paths must be positive");
}

std::vector<ScoredPath> Predictor::sample_and_score(const PredictionQuery& query, std::span<const Case> cases,
                                                    ReasoningDirection direction, RelationId relation) const {
  const auto& graph = stats_->graph();
  const bool forward = direction == ReasoningDirection::CauseToEffect;
  // Forward walks must open with a relation the query cause has; backward
  // walks with one of the relations being predicted for the effect.
  std::vector<RelationId> first_steps =
      forward ? graph.out_edges(query.cause).distinct_relations() : query.target_relations;

  std::vector<std::vector<RelationPath>> per_case(cases.size());
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const Case& c = cases[i];
    const EntityId from = forward ? c.cause : c.effect;
    const EntityId owner = forward ? c.effect : c.cause;
    auto targets = graph.neighbors_via(owner, {relation, Direction::Forward});
    if (targets.empty()) continue;
    SamplingRequest req;
    req.from = from;
    req.targets = targets;
    req.first_step_relations = first_steps;
    req.forbidden = owner;
    req.budget = params_.n_paths;
    req.attempts_per_path = params_.attempts_per_path;
    req.allow_revisits = params_.allow_revisits;
    Rng rng(derive_seed(params_.seed, {query.cause.value, c.cause.value, c.effect.value, relation.value,
                                       forward ? 0u : 1u}));
    per_case[i] = sample_paths(graph, req, rng);
  }
  return score_paths(graph, cases, per_case, direction, relation, params_.epsilon, params_.n_paths,
                     params_.bag_cap);
}

RankedPredictions Predictor::predict(const PredictionQuery& query) const {
  const auto& graph = stats_->graph();
  if (query.target_relations.empty()) throw QueryError("no target relations to predict");
  if (!graph.contains(query.cause)) throw QueryError("query cause is not in the graph");

  RankedPredictions out;
  out.query = query;
  std::sort(out.query.target_relations.begin(), out.query.target_relations.end());
  out.query.target_relations.erase(std::unique(out.query.target_relations.begin(), out.query.target_relations.end()),
                                   out.query.target_relations.end());
  out.cases = select_cases(*stats_, out.query, params_.cases, params_.threads);
  out.relations.resize(out.query.target_relations.size());

  parallel_for(out.relations.size(), params_.threads, [&](std::size_t i) {
    const RelationId r = out.query.target_relations[i];
    RelationPrediction& rel = out.relations[i];
    rel.relation = r;
    rel.paths = sample_and_score(out.query, out.cases, ReasoningDirection::CauseToEffect, r);
    for (const auto& [e, s] : apply_paths(graph, out.query.cause, rel.paths, params_.bag_cap)) {
      CandidateScore c;
      c.entity = e;
      c.e_score = s;
      c.active = s;
      rel.candidates.push_back(c);
    }
    sort_candidates(rel.candidates);
  });
  return out;
}

void Predictor::refine(RankedPredictions& predictions) const {
  const auto& graph = stats_->graph();
  const auto& query = predictions.query;
  const auto cause_triples = graph.outgoing(query.cause);
  if (cause_triples.empty()) throw QueryError("cause entity has no outgoing triples");
  const auto cause_relations = graph.out_edges(query.cause).distinct_relations();

  // Backward paths are shared by every target relation and candidate.
  std::vector<std::vector<ScoredPath>> reverse(cause_relations.size());
  parallel_for(cause_relations.size(), params_.threads, [&](std::size_t i) {
    reverse[i] = sample_and_score(query, predictions.cases, ReasoningDirection::EffectToCause, cause_relations[i]);
  });
  predictions.reverse_paths.clear();
  for (const auto& v : reverse) predictions.reverse_paths.insert(predictions.reverse_paths.end(), v.begin(), v.end());

  std::vector<std::size_t> relation_slot(cause_triples.size());
  for (std::size_t k = 0; k < cause_triples.size(); ++k)
    relation_slot[k] = static_cast<std::size_t>(
        std::lower_bound(cause_relations.begin(), cause_relations.end(), cause_triples[k].relation) -
        cause_relations.begin());

  const EntityId effect = graph.fresh_entity();
  for (auto& rel : predictions.relations) {
    // Candidates are in EScore order here, so the top-k cap keeps the best.
    std::size_t n_refine = rel.candidates.size();
    if (params_.refine_top_k > 0) n_refine = std::min(n_refine, params_.refine_top_k);

    std::vector<std::vector<double>> rs(n_refine, std::vector<double>(cause_triples.size(), 0.0));
    parallel_for(n_refine, params_.threads, [&](std::size_t z) {
      for (std::size_t k = 0; k < cause_triples.size(); ++k)
        rs[z][k] = refinement_score(graph, effect, rel.relation, rel.candidates[z].entity, reverse[relation_slot[k]],
                                    cause_triples[k].node, params_.bag_cap);
    });

    std::vector<double> best(cause_triples.size(), 0.0);
    for (const auto& row : rs)
      for (std::size_t k = 0; k < row.size(); ++k) best[k] = std::max(best[k], row[k]);

    for (std::size_t z = 0; z < rel.candidates.size(); ++z) {
      auto& cand = rel.candidates[z];
      double re = 0;
      if (z < n_refine) {
        double n_max = 0, n_sum = 0;
        for (std::size_t k = 0; k < cause_triples.size(); ++k) {
          const double n = best[k] > 0 ? rs[z][k] / best[k] : 0.0;
          n_max = std::max(n_max, n);
          n_sum += n;
        }
        re = cand.e_score * (n_max + n_sum / static_cast<double>(cause_triples.size()));
      }
      cand.re_score = re;
      cand.combined = cand.e_score + re;
    }
  }
  predictions.refined = true;
}

RankedPredictions Predictor::run(const PredictionQuery& query) const {
  auto predictions = predict(query);
  if (params_.mode != ScoreMode::Base) refine(predictions);
  return combine_scores(std::move(predictions), params_.mode);
}

}  // namespace evcbr
