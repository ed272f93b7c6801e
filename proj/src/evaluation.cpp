#include <algorithm>
#include <chrono>
#include <map>

#include "evcbr/error.hpp"
#include "evcbr/evaluation.hpp"
#include "evcbr/parallel.hpp"

namespace evcbr {

std::optional<double> rank_of(std::span<const CandidateScore> ranking, EntityId gold,
                              std::span<const EntityId> filtered_out, TiePolicy ties) {
  auto gold_it = std::find_if(ranking.begin(), ranking.end(), [&](const CandidateScore& c) { return c.entity == gold; });
  if (gold_it == ranking.end()) return std::nullopt;
  auto skipped = [&](EntityId e) {
    return std::find(filtered_out.begin(), filtered_out.end(), e) != filtered_out.end();
  };

  if (ties == TiePolicy::Ordinal) {
    double rank = 1;
    for (auto it = ranking.begin(); it != gold_it; ++it)
      if (!skipped(it->entity)) rank += 1;
    return rank;
  }

  double above = 0, tied = 0;
  for (const auto& c : ranking) {
    if (c.entity == gold || skipped(c.entity)) continue;
    if (c.active > gold_it->active)
      above += 1;
    else if (c.active == gold_it->active)
      tied += 1;
  }
  return 1 + above + tied / 2;
}

MetricSet aggregate(std::span<const std::optional<double>> ranks, std::span<const int> ks) {
  MetricSet m;
  m.n = ranks.size();
  for (int k : ks) m.hits[k] = 0;
  if (ranks.empty()) return m;
  for (const auto& r : ranks) {
    if (!r) continue;
    m.mrr += 1.0 / *r;
    for (int k : ks)
      if (*r <= k) m.hits[k] += 1;
  }
  const double n = static_cast<double>(ranks.size());
  m.mrr /= n;
  for (auto& [k, v] : m.hits) v /= n;
  return m;
}

namespace {

struct QueryJob {
  NamedTriple connection;
  std::vector<const NamedTriple*> triples;  // the held-out entity's outgoing triples
};

}  // namespace

EvalReport evaluate(const InductiveSplit& split, const EvalOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  const auto& connections = options.partition == Partition::Test ? split.test_connections : split.valid_connections;
  const auto& held_triples = options.partition == Partition::Test ? split.test_triples : split.valid_triples;
  if (split.train.empty()) throw Error("split has no training triples");
  if (connections.empty() || held_triples.empty()) throw Error("split has no links to evaluate");

  const auto graph = KnowledgeGraph::build(split.train, options.graph);
  const StatsIndex stats(graph, options.stats);
  PredictorParams params = options.predictor;
  params.threads = 1;  // parallelism is across queries here
  const Predictor predictor(stats, params);

  std::map<std::string, std::vector<const NamedTriple*>> by_entity;
  for (const auto& t : held_triples) by_entity[t.head].push_back(&t);
  std::map<std::string, std::vector<const NamedTriple*>> conns_by_entity;
  for (const auto& c : connections) conns_by_entity[c.tail].push_back(&c);

  EvalReport report;
  std::vector<QueryJob> jobs;
  for (const auto& [entity, triples] : by_entity) {
    auto it = conns_by_entity.find(entity);
    if (it == conns_by_entity.end()) {
      report.skipped_entities.push_back(entity);
      continue;
    }
    auto conns = it->second;
    std::sort(conns.begin(), conns.end(), [](const NamedTriple* a, const NamedTriple* b) { return *a < *b; });
    auto sorted_triples = triples;
    std::sort(sorted_triples.begin(), sorted_triples.end(),
              [](const NamedTriple* a, const NamedTriple* b) { return *a < *b; });
    for (const NamedTriple* c : conns) jobs.push_back({*c, sorted_triples});
  }

  std::vector<std::vector<LinkOutcome>> outcomes(jobs.size());
  std::vector<char> failed(jobs.size(), 0);
  parallel_for(jobs.size(), options.threads, [&](std::size_t j) {
    const QueryJob& job = jobs[j];
    auto& out = outcomes[j];
    for (const NamedTriple* t : job.triples) out.push_back({job.connection, *t, std::nullopt, std::nullopt});

    auto cause = graph.find_entity(job.connection.head);
    auto causal = graph.find_relation(job.connection.relation);
    PredictionQuery query;
    std::vector<RelationId> targets;
    for (const NamedTriple* t : job.triples)
      if (auto r = graph.find_relation(t->relation)) targets.push_back(*r);
    std::sort(targets.begin(), targets.end());
    targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
    if (!cause || !causal || targets.empty()) {
      failed[j] = 1;
      return;
    }
    query.cause = *cause;
    query.causal_relation = *causal;
    query.target_relations = targets;

    RankedPredictions predictions;
    try {
      predictions = predictor.run(query);
    } catch (const QueryError&) {
      failed[j] = 1;
      return;
    }

    for (auto& link : out) {
      auto r = graph.find_relation(link.triple.relation);
      auto gold = graph.find_entity(link.triple.tail);
      if (!r || !gold) continue;
      auto rel = std::find_if(predictions.relations.begin(), predictions.relations.end(),
                              [&](const RelationPrediction& p) { return p.relation == *r; });
      if (rel == predictions.relations.end()) continue;

      std::vector<EntityId> other_true;
      for (const NamedTriple* t : job.triples) {
        if (t->relation != link.triple.relation || t->tail == link.triple.tail) continue;
        if (auto e = graph.find_entity(t->tail)) other_true.push_back(*e);
      }
      link.filtered_rank = rank_of(rel->candidates, *gold, other_true, options.ties);
      link.raw_rank = rank_of(rel->candidates, *gold, {}, options.ties);
    }
  });

  std::vector<std::optional<double>> filtered, raw;
  std::map<std::string, std::vector<std::optional<double>>> per_relation;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    report.failed_queries += failed[j];
    for (auto& link : outcomes[j]) {
      filtered.push_back(link.filtered_rank);
      raw.push_back(link.raw_rank);
      per_relation[link.triple.relation].push_back(link.filtered_rank);
      report.links.push_back(std::move(link));
    }
  }
  report.n_queries = jobs.size();
  report.n_links = filtered.size();
  report.filtered = aggregate(filtered, options.hits_at);
  report.raw = aggregate(raw, options.hits_at);
  for (const auto& [label, ranks] : per_relation) report.per_relation[label] = aggregate(ranks, options.hits_at);
  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

}  // namespace evcbr
