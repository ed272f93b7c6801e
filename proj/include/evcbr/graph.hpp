#pragma once

#include <compare>
#include <cstddef>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "evcbr/ids.hpp"

namespace evcbr {

enum class Direction : std::uint8_t { Forward, Inverse };

/// One hop of a relation path. (r, Inverse) walks a triple (x, r, y) from y to x.
struct DirectedStep {
  RelationId relation;
  Direction direction = Direction::Forward;

  friend constexpr auto operator<=>(const DirectedStep&, const DirectedStep&) = default;
};

/// A triple spelled with the original labels, as read from or written to TSV.
struct NamedTriple {
  std::string head;
  std::string relation;
  std::string tail;

  friend auto operator<=>(const NamedTriple&, const NamedTriple&) = default;
};

/// Bidirectional string <-> dense id mapping.
class Interner {
 public:
  Interner() = default;
  /// Builds from an arbitrary list of labels; ids follow sorted label order so
  /// that the assignment does not depend on the order labels were seen in.
  static Interner from_labels(std::vector<std::string> labels);

  std::optional<std::uint32_t> find(std::string_view label) const;
  const std::string& label(std::uint32_t id) const { return labels_.at(id); }
  std::size_t size() const { return labels_.size(); }
  std::span<const std::string> labels() const { return labels_; }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

struct Edge {
  RelationId relation;
  EntityId node;
};

/// Edges of one entity in one direction, sorted by (relation, node).
class AdjacencyView {
 public:
  AdjacencyView() = default;
  AdjacencyView(std::span<const RelationId> relations, std::span<const EntityId> nodes)
      : relations_(relations), nodes_(nodes) {}

  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  Edge operator[](std::size_t i) const { return {relations_[i], nodes_[i]}; }
  std::span<const RelationId> relations() const { return relations_; }
  std::span<const EntityId> nodes() const { return nodes_; }
  /// Nodes reached through `relation`, sorted by id.
  std::span<const EntityId> via(RelationId relation) const;
  /// Distinct relations in ascending order.
  std::vector<RelationId> distinct_relations() const;

 private:
  std::span<const RelationId> relations_;
  std::span<const EntityId> nodes_;
};

struct GraphOptions {
  /// Labels of the taxonomy relations; resolved against the loaded relations.
  std::string subclass_relation = "P279";
  std::string type_relation = "P31";
};

/// Immutable interned triple set with outgoing and incoming adjacency.
class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;

  /// Builds a graph from labelled triples; duplicates collapse.
  static KnowledgeGraph build(std::span<const NamedTriple> triples, const GraphOptions& options = {});

  /// Returns a new graph holding this graph's triples plus `extra`.
  KnowledgeGraph with_triples(std::span<const NamedTriple> extra) const;

  std::size_t num_entities() const { return entities_.size(); }
  std::size_t num_relations() const { return relations_.size(); }
  std::size_t num_triples() const { return by_relation_.size(); }

  bool contains(EntityId e) const { return e.valid() && e.index() < num_entities(); }
  bool contains(const Triple& t) const;

  /// All triples, sorted by (relation, head, tail).
  std::span<const Triple> triples() const { return by_relation_; }
  std::span<const Triple> triples_with_relation(RelationId r) const;

  std::optional<EntityId> find_entity(std::string_view label) const;
  std::optional<RelationId> find_relation(std::string_view label) const;
  const std::string& entity_label(EntityId e) const { return entities_.label(e.value); }
  const std::string& relation_label(RelationId r) const { return relations_.label(r.value); }
  NamedTriple named(const Triple& t) const;

  AdjacencyView out_edges(EntityId e) const;
  AdjacencyView in_edges(EntityId e) const;
  std::vector<Edge> outgoing(EntityId e) const;
  /// Forward steps read the outgoing index, inverse steps the incoming one.
  /// Unknown entities yield an empty span.
  std::span<const EntityId> neighbors_via(EntityId e, DirectedStep step) const;

  std::size_t out_degree(EntityId e) const { return out_edges(e).size(); }
  std::size_t in_degree(EntityId e) const { return in_edges(e).size(); }

  std::optional<RelationId> subclass_relation() const { return subclass_relation_; }
  std::optional<RelationId> type_relation() const { return type_relation_; }
  const GraphOptions& options() const { return options_; }

  /// Transitive superclasses of `e` (excluding `e`), sorted by id.
  std::vector<EntityId> superclass_closure(EntityId e) const;

  /// Id one past the last interned entity; never collides with a stored node.
  EntityId fresh_entity() const { return EntityId{static_cast<std::uint32_t>(num_entities())}; }

 private:
  Interner entities_;
  Interner relations_;
  std::vector<Triple> by_relation_;
  std::vector<std::size_t> relation_offsets_;

  std::vector<std::size_t> out_offsets_;
  std::vector<RelationId> out_relations_;
  std::vector<EntityId> out_nodes_;
  std::vector<std::size_t> in_offsets_;
  std::vector<RelationId> in_relations_;
  std::vector<EntityId> in_nodes_;

  std::optional<RelationId> subclass_relation_;
  std::optional<RelationId> type_relation_;
  GraphOptions options_;
};

/// Reads `head<TAB>relation<TAB>tail` lines. Blank lines are skipped; any other
/// line without exactly three fields is a ParseError naming the line number.
std::vector<NamedTriple> read_triples(std::istream& in, const std::string& source_name);
std::vector<NamedTriple> read_triples_file(const std::string& path);
void write_triples(std::ostream& out, std::span<const NamedTriple> triples);
void write_triples_file(const std::string& path, std::span<const NamedTriple> triples);

/// Reads and concatenates the given files, then builds the graph. Throws if
/// nothing was read.
KnowledgeGraph ingest_files(std::span<const std::string> paths, const GraphOptions& options = {});
KnowledgeGraph ingest_triples(std::istream& in, const GraphOptions& options = {});

}  // namespace evcbr
