#include "evcbr/graph.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "evcbr/error.hpp"

namespace evcbr {

Interner Interner::from_labels(std::vector<std::string> labels) {
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  Interner interner;
  interner.index_.reserve(labels.size());
  for (std::uint32_t i = 0; i < labels.size(); ++i) interner.index_.emplace(labels[i], i);
  interner.labels_ = std::move(labels);
  return interner;
}

std::optional<std::uint32_t> Interner::find(std::string_view label) const {
  auto it = index_.find(std::string(label));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::span<const EntityId> AdjacencyView::via(RelationId relation) const {
  auto lo = std::lower_bound(relations_.begin(), relations_.end(), relation);
  auto hi = std::upper_bound(lo, relations_.end(), relation);
  auto first = static_cast<std::size_t>(lo - relations_.begin());
  return nodes_.subspan(first, static_cast<std::size_t>(hi - lo));
}

std::vector<RelationId> AdjacencyView::distinct_relations() const {
  std::vector<RelationId> out;
  for (RelationId r : relations_)
    if (out.empty() || out.back() != r) out.push_back(r);
  return out;
}

namespace {

// Fills a CSR index keyed by `key` with (relation, other) pairs sorted per key.
void build_csr(std::size_t n, const std::vector<Triple>& triples, bool outgoing, std::vector<std::size_t>& offsets,
               std::vector<RelationId>& relations, std::vector<EntityId>& nodes) {
  offsets.assign(n + 1, 0);
  for (const Triple& t : triples) ++offsets[(outgoing ? t.head : t.tail).index() + 1];
  for (std::size_t i = 0; i < n; ++i) offsets[i + 1] += offsets[i];

  std::vector<std::pair<RelationId, EntityId>> scratch(triples.size());
  std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
  for (const Triple& t : triples) {
    auto key = outgoing ? t.head : t.tail;
    scratch[cursor[key.index()]++] = {t.relation, outgoing ? t.tail : t.head};
  }
  for (std::size_t i = 0; i < n; ++i)
    std::sort(scratch.begin() + static_cast<std::ptrdiff_t>(offsets[i]),
              scratch.begin() + static_cast<std::ptrdiff_t>(offsets[i + 1]));

  relations.resize(scratch.size());
  nodes.resize(scratch.size());
  for (std::size_t i = 0; i < scratch.size(); ++i) {
    relations[i] = scratch[i].first;
    nodes[i] = scratch[i].second;
  }
}

}  // namespace

KnowledgeGraph KnowledgeGraph::build(std::span<const NamedTriple> triples, const GraphOptions& options) {
  std::vector<std::string> entity_labels;
  std::vector<std::string> relation_labels;
  entity_labels.reserve(triples.size() * 2);
  relation_labels.reserve(triples.size());
  for (const auto& t : triples) {
    entity_labels.push_back(t.head);
    entity_labels.push_back(t.tail);
    relation_labels.push_back(t.relation);
  }

  KnowledgeGraph g;
  g.options_ = options;
  g.entities_ = Interner::from_labels(std::move(entity_labels));
  g.relations_ = Interner::from_labels(std::move(relation_labels));

  std::vector<Triple> ids;
  ids.reserve(triples.size());
  for (const auto& t : triples) {
    ids.push_back({EntityId{*g.entities_.find(t.head)}, RelationId{*g.relations_.find(t.relation)},
                   EntityId{*g.entities_.find(t.tail)}});
  }
  std::sort(ids.begin(), ids.end(), [](const Triple& a, const Triple& b) {
    return std::tie(a.relation, a.head, a.tail) < std::tie(b.relation, b.head, b.tail);
  });
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  g.by_relation_ = std::move(ids);

  g.relation_offsets_.assign(g.relations_.size() + 1, 0);
  for (const Triple& t : g.by_relation_) ++g.relation_offsets_[t.relation.index() + 1];
  for (std::size_t i = 0; i < g.relations_.size(); ++i) g.relation_offsets_[i + 1] += g.relation_offsets_[i];

  const std::size_t n = g.entities_.size();
  build_csr(n, g.by_relation_, true, g.out_offsets_, g.out_relations_, g.out_nodes_);
  build_csr(n, g.by_relation_, false, g.in_offsets_, g.in_relations_, g.in_nodes_);

  if (auto r = g.relations_.find(options.subclass_relation)) g.subclass_relation_ = RelationId{*r};
  if (auto r = g.relations_.find(options.type_relation)) g.type_relation_ = RelationId{*r};
  return g;
}

KnowledgeGraph KnowledgeGraph::with_triples(std::span<const NamedTriple> extra) const {
  std::vector<NamedTriple> all;
  all.reserve(num_triples() + extra.size());
  for (const Triple& t : by_relation_) all.push_back(named(t));
  all.insert(all.end(), extra.begin(), extra.end());
  return build(all, options_);
}

bool KnowledgeGraph::contains(const Triple& t) const {
  if (!contains(t.head)) return false;
  auto tails = neighbors_via(t.head, {t.relation, Direction::Forward});
  return std::binary_search(tails.begin(), tails.end(), t.tail);
}

std::span<const Triple> KnowledgeGraph::triples_with_relation(RelationId r) const {
  if (!r.valid() || r.index() >= num_relations()) return {};
  return std::span<const Triple>(by_relation_)
      .subspan(relation_offsets_[r.index()], relation_offsets_[r.index() + 1] - relation_offsets_[r.index()]);
}

std::optional<EntityId> KnowledgeGraph::find_entity(std::string_view label) const {
  if (auto id = entities_.find(label)) return EntityId{*id};
  return std::nullopt;
}

std::optional<RelationId> KnowledgeGraph::find_relation(std::string_view label) const {
  if (auto id = relations_.find(label)) return RelationId{*id};
  return std::nullopt;
}

NamedTriple KnowledgeGraph::named(const Triple& t) const {
  return {entity_label(t.head), relation_label(t.relation), entity_label(t.tail)};
}

AdjacencyView KnowledgeGraph::out_edges(EntityId e) const {
  if (!contains(e)) return {};
  auto lo = out_offsets_[e.index()];
  auto len = out_offsets_[e.index() + 1] - lo;
  return {std::span<const RelationId>(out_relations_).subspan(lo, len),
          std::span<const EntityId>(out_nodes_).subspan(lo, len)};
}

AdjacencyView KnowledgeGraph::in_edges(EntityId e) const {
  if (!contains(e)) return {};
  auto lo = in_offsets_[e.index()];
  auto len = in_offsets_[e.index() + 1] - lo;
  return {std::span<const RelationId>(in_relations_).subspan(lo, len),
          std::span<const EntityId>(in_nodes_).subspan(lo, len)};
}

std::vector<Edge> KnowledgeGraph::outgoing(EntityId e) const {
  auto view = out_edges(e);
  std::vector<Edge> out;
  out.reserve(view.size());
  for (std::size_t i = 0; i < view.size(); ++i) out.push_back(view[i]);
  return out;
}

std::span<const EntityId> KnowledgeGraph::neighbors_via(EntityId e, DirectedStep step) const {
  return (step.direction == Direction::Forward ? out_edges(e) : in_edges(e)).via(step.relation);
}

std::vector<EntityId> KnowledgeGraph::superclass_closure(EntityId e) const {
  std::vector<EntityId> closure;
  if (!subclass_relation_ || !contains(e)) return closure;
  const DirectedStep up{*subclass_relation_, Direction::Forward};
  std::vector<char> seen(num_entities(), 0);
  seen[e.index()] = 1;
  std::vector<EntityId> stack{e};
  while (!stack.empty()) {
    EntityId cur = stack.back();
    stack.pop_back();
    for (EntityId parent : neighbors_via(cur, up)) {
      if (seen[parent.index()]) continue;
      seen[parent.index()] = 1;
      closure.push_back(parent);
      stack.push_back(parent);
    }
  }
  std::sort(closure.begin(), closure.end());
  return closure;
}

std::vector<NamedTriple> read_triples(std::istream& in, const std::string& source_name) {
  std::vector<NamedTriple> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;

    auto first = line.find('\t');
    auto second = first == std::string::npos ? std::string::npos : line.find('\t', first + 1);
    if (second == std::string::npos || line.find('\t', second + 1) != std::string::npos)
      throw ParseError(source_name, line_no, "expected 3 tab-separated fields");

    NamedTriple t{line.substr(0, first), line.substr(first + 1, second - first - 1), line.substr(second + 1)};
    if (t.head.empty() || t.relation.empty() || t.tail.empty())
      throw ParseError(source_name, line_no, "empty field");
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<NamedTriple> read_triples_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return read_triples(in, path);
}

void write_triples(std::ostream& out, std::span<const NamedTriple> triples) {
  for (const auto& t : triples) out << t.head << '\t' << t.relation << '\t' << t.tail << '\n';
}

void write_triples_file(const std::string& path, std::span<const NamedTriple> triples) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  write_triples(out, triples);
}

KnowledgeGraph ingest_files(std::span<const std::string> paths, const GraphOptions& options) {
  std::vector<NamedTriple> all;
  for (const auto& path : paths) {
    auto part = read_triples_file(path);
    all.insert(all.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  if (all.empty()) throw Error("no triples ingested");
  return KnowledgeGraph::build(all, options);
}

KnowledgeGraph ingest_triples(std::istream& in, const GraphOptions& options) {
  auto triples = read_triples(in, "<stream>");
  if (triples.empty()) throw Error("no triples ingested");
  return KnowledgeGraph::build(triples, options);
}

}  // namespace evcbr
