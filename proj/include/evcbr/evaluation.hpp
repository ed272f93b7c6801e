#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evcbr/graph.hpp"
#include "evcbr/predictor.hpp"
#include "evcbr/stats.hpp"

namespace evcbr {

/// Entity-based inductive split. Connections are (training entity, relation,
/// held-out entity); the triples files hold the held-out entities' outgoing
/// triples.
struct InductiveSplit {
  std::vector<NamedTriple> train;
  std::vector<NamedTriple> valid_connections;
  std::vector<NamedTriple> valid_triples;
  std::vector<NamedTriple> test_connections;
  std::vector<NamedTriple> test_triples;
};

namespace split_files {
inline constexpr const char* kTrain = "train.txt";
inline constexpr const char* kValidConnections = "valid_connections.txt";
inline constexpr const char* kValidTriples = "valid_triples.txt";
inline constexpr const char* kTestConnections = "test_connections.txt";
inline constexpr const char* kTestTriples = "test_triples.txt";
}  // namespace split_files

/// Holds out n_test + n_valid entities, picked in random order among those
/// that (1) have no triple to an entity already held out, (2) have at least
/// one incoming and one outgoing triple, and (3) leave every neighbour with at
/// least one triple to another training entity. Throws SplitError if the
/// graph runs out of candidates.
InductiveSplit make_split(const KnowledgeGraph& graph, std::size_t n_test, std::size_t n_valid, std::uint64_t seed);

void write_split(const InductiveSplit& split, const std::filesystem::path& dir);
InductiveSplit read_split(const std::filesystem::path& dir);

enum class RankingMode { Filtered, Raw };
enum class TiePolicy { Ordinal, Expected };
enum class Partition { Test, Valid };

/// 1-based rank of `gold` in a sorted candidate list, or nullopt when absent.
/// Entities in `filtered_out` are skipped when counting what ranks above.
/// Ordinal ranks by list position; Expected puts the gold in the middle of its
/// score tie.
std::optional<double> rank_of(std::span<const CandidateScore> ranking, EntityId gold,
                              std::span<const EntityId> filtered_out, TiePolicy ties);

struct MetricSet {
  double mrr = 0;
  std::map<int, double> hits;
  std::size_t n = 0;
};

/// Mean reciprocal rank and Hits@K; unranked golds count as reciprocal rank 0.
MetricSet aggregate(std::span<const std::optional<double>> ranks, std::span<const int> ks);

struct EvalOptions {
  GraphOptions graph;
  StatsOptions stats;
  PredictorParams predictor;
  Partition partition = Partition::Test;
  TiePolicy ties = TiePolicy::Ordinal;
  std::vector<int> hits_at = {1, 3, 10};
  std::size_t threads = 1;
};

struct LinkOutcome {
  NamedTriple connection;
  NamedTriple triple;
  std::optional<double> filtered_rank;
  std::optional<double> raw_rank;
};

struct EvalReport {
  MetricSet filtered;
  MetricSet raw;
  std::map<std::string, MetricSet> per_relation;  // filtered, keyed by relation label
  std::vector<LinkOutcome> links;
  std::size_t n_links = 0;
  std::size_t n_queries = 0;
  std::size_t failed_queries = 0;
  std::vector<std::string> skipped_entities;  // held out but without a connection
  double runtime_seconds = 0;
};

/// Runs every (connection, held-out triple) 2-hop link of the partition
/// against a graph built from the training triples.
EvalReport evaluate(const InductiveSplit& split, const EvalOptions& options);

}  // namespace evcbr
