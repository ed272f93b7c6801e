#include "evcbr/stats.hpp"

#include <algorithm>
#include <cmath>

#include "evcbr/error.hpp"

namespace evcbr {

double weighted_jaccard(std::span<const EntityId> a, std::span<const EntityId> b, std::span<const double> weights) {
  auto w = [&](EntityId e) { return e.index() < weights.size() ? weights[e.index()] : 0.0; };
  double shared = 0, mass_a = 0, mass_b = 0;
  for (EntityId e : a) mass_a += w(e);
  for (EntityId e : b) mass_b += w(e);
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) {
      shared += w(a[i]);
      ++i;
      ++j;
    } else if (a[i] < b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  const double denom = mass_a + mass_b - shared;
  if (denom <= 0) return 0.0;
  return shared / denom;
}

TailSimilarity case_tail_similarity(std::span<const RelationId> targets, std::span<const RelationId> effect_relations) {
  std::size_t shared = 0;
  std::size_t i = 0, j = 0;
  while (i < targets.size() && j < effect_relations.size()) {
    if (targets[i] == effect_relations[j]) {
      ++shared;
      ++i;
      ++j;
    } else if (targets[i] < effect_relations[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  const std::size_t uni = targets.size() + effect_relations.size() - shared;
  TailSimilarity s;
  if (uni > 0) s.jaccard = static_cast<double>(shared) / static_cast<double>(uni);
  if (!targets.empty()) s.coverage = static_cast<double>(shared) / static_cast<double>(targets.size());
  return s;
}

StatsIndex::StatsIndex(const KnowledgeGraph& graph, StatsOptions options)
    : graph_(&graph), options_(options) {
  const std::size_t n = graph.num_entities();
  counts_.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) counts_[i] = graph.in_degree(EntityId{static_cast<std::uint32_t>(i)});

  if (auto sub = graph.subclass_relation()) {
    // Only entities with an outgoing subclass edge have a non-empty closure.
    std::vector<EntityId> children;
    for (const Triple& t : graph.triples_with_relation(*sub))
      if (children.empty() || children.back() != t.head) children.push_back(t.head);
    for (EntityId child : children)
      for (EntityId super : graph.superclass_closure(child)) ++counts_[super.index()];
  }

  idf_.assign(n, 0.0);
  const double total = static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    if (counts_[i] > 0) idf_[i] = std::max(0.0, std::log(total / static_cast<double>(counts_[i])));

  double norm = 0;
  switch (options_.idf_normalization) {
    case IdfNormalization::Max:
      for (double w : idf_) norm = std::max(norm, w);
      break;
    case IdfNormalization::L2:
      for (double w : idf_) norm += w * w;
      norm = std::sqrt(norm);
      break;
    case IdfNormalization::None:
      break;
  }
  if (norm > 0)
    for (double& w : idf_) w /= norm;

  once_ = std::make_unique<std::once_flag[]>(n);
  vectors_.resize(n);
}

std::vector<EntityId> StatsIndex::compute_vector(EntityId e) const {
  const auto& g = *graph_;
  auto out = g.out_edges(e);
  std::vector<EntityId> v(out.nodes().begin(), out.nodes().end());
  auto closure = g.superclass_closure(e);
  v.insert(v.end(), closure.begin(), closure.end());
  if (options_.expand_type_superclasses) {
    if (auto type = g.type_relation()) {
      for (EntityId cls : g.neighbors_via(e, {*type, Direction::Forward})) {
        auto up = g.superclass_closure(cls);
        v.insert(v.end(), up.begin(), up.end());
      }
    }
  }
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

const StatsIndex::CachedVector& StatsIndex::cached(EntityId e) const {
  std::call_once(once_[e.index()], [&] { vectors_[e.index()].positions = compute_vector(e); });
  return vectors_[e.index()];
}

std::span<const EntityId> StatsIndex::entity_vector(EntityId e) const {
  if (!graph_->contains(e)) return {};
  return cached(e).positions;
}

double StatsIndex::entity_similarity(EntityId a, EntityId b) const {
  // An entity without outgoing triples has an empty vector; it is still
  // identical to itself.
  if (a == b && graph_->contains(a)) return 1.0;
  return weighted_jaccard(entity_vector(a), entity_vector(b), idf_);
}

TripleImportance StatsIndex::triple_importance(EntityId cause) const {
  const auto& g = *graph_;
  TripleImportance imp;
  imp.cause = cause;
  imp.triples = g.outgoing(cause);
  if (imp.triples.empty()) throw QueryError("cause entity has no outgoing triples");

  const double total = static_cast<double>(g.num_triples());
  for (const Edge& edge : imp.triples) {
    const EntityId t = edge.node;
    double with_tail = 0, with_both = 0;
    if (options_.importance_position == ImportancePosition::Tail) {
      with_tail = static_cast<double>(g.in_degree(t));
      with_both = static_cast<double>(g.neighbors_via(t, {edge.relation, Direction::Inverse}).size());
    } else {
      auto out = g.out_edges(t);
      auto self_loops = static_cast<double>(std::count(out.nodes().begin(), out.nodes().end(), t));
      auto looped = g.neighbors_via(t, {edge.relation, Direction::Forward});
      auto self_loops_r = static_cast<double>(std::binary_search(looped.begin(), looped.end(), t) ? 1 : 0);
      with_tail = static_cast<double>(out.size() + g.in_degree(t)) - self_loops;
      with_both = static_cast<double>(looped.size() +
                                      g.neighbors_via(t, {edge.relation, Direction::Inverse}).size()) -
                  self_loops_r;
    }
    const double p_rel_given_tail = with_both / with_tail;
    const double p_tail = with_tail / total;
    imp.raw.push_back(std::log(p_rel_given_tail / p_tail));
  }

  imp.weight.resize(imp.raw.size());
  double sum = 0;
  for (std::size_t i = 0; i < imp.raw.size(); ++i) {
    imp.weight[i] = std::max(0.0, imp.raw[i]);
    sum += imp.weight[i];
  }
  if (sum > 0) {
    for (double& w : imp.weight) w /= sum;
  } else {
    std::fill(imp.weight.begin(), imp.weight.end(), 1.0 / static_cast<double>(imp.weight.size()));
  }
  return imp;
}

double StatsIndex::case_head_similarity(const TripleImportance& importance, EntityId case_cause) const {
  const auto& g = *graph_;
  auto case_out = g.out_edges(case_cause);
  double total = 0;
  std::size_t i = 0;
  while (i < importance.triples.size()) {
    const RelationId r = importance.triples[i].relation;
    std::size_t end = i;
    while (end < importance.triples.size() && importance.triples[end].relation == r) ++end;

    double best = 0;
    for (EntityId case_tail : case_out.via(r))
      for (std::size_t k = i; k < end; ++k)
        best = std::max(best, importance.weight[k] * entity_similarity(importance.triples[k].node, case_tail));
    total += best;
    i = end;
  }
  return total;
}

}  // namespace evcbr
