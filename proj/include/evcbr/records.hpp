#pragma once

#include <istream>
#include <string>
#include <vector>

#include "evcbr/config.hpp"
#include "evcbr/evaluation.hpp"
#include "evcbr/predictor.hpp"
#include "json.hpp"

namespace evcbr {

/// A query as written by a user: labels, plus optional properties of a cause
/// that the graph does not know yet.
struct QuerySpec {
  std::string cause;
  std::string causal_relation;
  std::vector<std::string> target_relations;
  std::vector<NamedTriple> cause_triples;  // heads equal `cause`
};

/// One JSON object: {"cause", "causal_relation", "target_relations",
/// "cause_triples": [[relation, tail], ...]}.
QuerySpec parse_query_spec(const nlohmann::json& j);
/// One query object per non-blank line.
std::vector<QuerySpec> read_query_specs(std::istream& in, const std::string& source_name);

/// Looks the labels up; unknown labels are QueryErrors.
PredictionQuery resolve_query(const KnowledgeGraph& graph, const QuerySpec& spec);

/// One record per target relation, each carrying the config echo, the query,
/// the case set, the top `top_n` candidates (0 = all) and the supporting paths.
std::vector<nlohmann::ordered_json> prediction_records(const KnowledgeGraph& graph, const QuerySpec& spec,
                                                       const RankedPredictions& predictions, const RunConfig& config,
                                                       std::size_t top_n);

nlohmann::ordered_json report_record(const EvalReport& report, const RunConfig& config, bool verbose,
                                     bool include_runtime);

nlohmann::ordered_json ingest_summary(const KnowledgeGraph& graph, const RunConfig& config);

}  // namespace evcbr
