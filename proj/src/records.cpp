#include "evcbr/records.hpp"

#include <algorithm>

#include "evcbr/error.hpp"

namespace evcbr {

QuerySpec parse_query_spec(const nlohmann::json& j) {
  QuerySpec spec;
  try {
    spec.cause = j.at("cause").get<std::string>();
    spec.causal_relation = j.at("causal_relation").get<std::string>();
    spec.target_relations = j.at("target_relations").get<std::vector<std::string>>();
    if (j.contains("cause_triples")) {
      for (const auto& item : j.at("cause_triples")) {
        auto parts = item.get<std::vector<std::string>>();
        if (parts.size() == 2)
          spec.cause_triples.push_back({spec.cause, parts[0], parts[1]});
        else if (parts.size() == 3 && parts[0] == spec.cause)
          spec.cause_triples.push_back({parts[0], parts[1], parts[2]});
        else
          throw ConfigError("cause_triples entries are [relation, tail] or [cause, relation, tail]");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad query: ") + e.what());
  }
  if (spec.target_relations.empty()) throw ConfigError("query needs at least one target relation");
  return spec;
}

std::vector<QuerySpec> read_query_specs(std::istream& in, const std::string& source_name) {
  std::vector<QuerySpec> specs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(source_name, line_no, e.what());
    }
    try {
      specs.push_back(parse_query_spec(j));
    } catch (const ConfigError& e) {
      throw ParseError(source_name, line_no, e.what());
    }
  }
  return specs;
}

PredictionQuery resolve_query(const KnowledgeGraph& graph, const QuerySpec& spec) {
  PredictionQuery q;
  auto cause = graph.find_entity(spec.cause);
  if (!cause) throw QueryError("unknown cause entity '" + spec.cause + "'");
  auto causal = graph.find_relation(spec.causal_relation);
  if (!causal) throw QueryError("unknown causal relation '" + spec.causal_relation + "'");
  q.cause = *cause;
  q.causal_relation = *causal;
  for (const auto& label : spec.target_relations) {
    auto r = graph.find_relation(label);
    if (!r) throw QueryError("unknown target relation '" + label + "'");
    q.target_relations.push_back(*r);
  }
  std::sort(q.target_relations.begin(), q.target_relations.end());
  q.target_relations.erase(std::unique(q.target_relations.begin(), q.target_relations.end()),
                           q.target_relations.end());
  return q;
}

namespace {

nlohmann::ordered_json query_json(const QuerySpec& spec) {
  nlohmann::ordered_json q;
  q["cause"] = spec.cause;
  q["causal_relation"] = spec.causal_relation;
  q["target_relations"] = spec.target_relations;
  auto triples = nlohmann::ordered_json::array();
  for (const auto& t : spec.cause_triples) triples.push_back({t.relation, t.tail});
  q["cause_triples"] = triples;
  return q;
}

nlohmann::ordered_json path_json(const KnowledgeGraph& graph, const ScoredPath& p) {
  nlohmann::ordered_json j;
  j["path"] = p.path.to_string(graph);
  j["score"] = p.score;
  j["hits"] = p.hits;
  j["total"] = p.total;
  return j;
}

nlohmann::ordered_json metrics_json(const MetricSet& m) {
  nlohmann::ordered_json j;
  j["mrr"] = m.mrr;
  for (const auto& [k, v] : m.hits) j["hits@" + std::to_string(k)] = v;
  j["n"] = m.n;
  return j;
}

}  // namespace

std::vector<nlohmann::ordered_json> prediction_records(const KnowledgeGraph& graph, const QuerySpec& spec,
                                                       const RankedPredictions& predictions, const RunConfig& config,
                                                       std::size_t top_n) {
  auto cases = nlohmann::ordered_json::array();
  for (const Case& c : predictions.cases) {
    nlohmann::ordered_json j;
    j["cause"] = graph.entity_label(c.cause);
    j["relation"] = graph.relation_label(c.relation);
    j["effect"] = graph.entity_label(c.effect);
    j["score"] = c.score;
    j["selected_by"] = c.selected_by == SelectedBy::HeadSimilarity ? "head_similarity" : "coverage";
    cases.push_back(j);
  }

  std::vector<nlohmann::ordered_json> records;
  for (const auto& rel : predictions.relations) {
    nlohmann::ordered_json rec;
    rec["config"] = config.to_json();
    rec["query"] = query_json(spec);
    rec["target_relation"] = graph.relation_label(rel.relation);
    rec["mode"] = to_string(predictions.mode);
    rec["n_candidates"] = rel.candidates.size();

    auto cands = nlohmann::ordered_json::array();
    const std::size_t n = top_n == 0 ? rel.candidates.size() : std::min(top_n, rel.candidates.size());
    for (std::size_t i = 0; i < n; ++i) {
      const auto& c = rel.candidates[i];
      nlohmann::ordered_json j;
      j["rank"] = i + 1;
      j["entity"] = graph.entity_label(c.entity);
      j["score"] = c.active;
      j["e_score"] = c.e_score;
      j["re_score"] = c.re_score ? nlohmann::ordered_json(*c.re_score) : nlohmann::ordered_json(nullptr);
      j["combined"] = c.combined ? nlohmann::ordered_json(*c.combined) : nlohmann::ordered_json(nullptr);
      cands.push_back(j);
    }
    rec["candidates"] = cands;

    auto paths = nlohmann::ordered_json::array();
    for (const auto& p : rel.paths) paths.push_back(path_json(graph, p));
    rec["paths"] = paths;
    rec["cases"] = cases;
    if (predictions.refined) {
      auto reverse = nlohmann::ordered_json::array();
      for (const auto& p : predictions.reverse_paths) {
        auto j = path_json(graph, p);
        j["cause_relation"] = graph.relation_label(p.target_relation);
        reverse.push_back(j);
      }
      rec["reverse_paths"] = reverse;
    }
    records.push_back(std::move(rec));
  }
  return records;
}

nlohmann::ordered_json report_record(const EvalReport& report, const RunConfig& config, bool verbose,
                                     bool include_runtime) {
  nlohmann::ordered_json j;
  j["config"] = config.to_json();
  const MetricSet& primary = config.ranking == RankingMode::Filtered ? report.filtered : report.raw;
  j["ranking"] = to_string(config.ranking);
  j["mrr"] = primary.mrr;
  for (const auto& [k, v] : primary.hits) j["hits@" + std::to_string(k)] = v;
  j["n_links"] = report.n_links;
  j["n_queries"] = report.n_queries;
  j["failed_queries"] = report.failed_queries;
  j["skipped_entities"] = report.skipped_entities;
  nlohmann::ordered_json per_relation;
  for (const auto& [label, m] : report.per_relation) per_relation[label] = metrics_json(m);
  j["per_relation"] = per_relation;
  j["notes"] = "unranked gold tails score reciprocal rank 0; per_relation uses filtered ranks";
  if (verbose) {
    j["filtered"] = metrics_json(report.filtered);
    j["raw"] = metrics_json(report.raw);
    auto links = nlohmann::ordered_json::array();
    for (const auto& l : report.links) {
      nlohmann::ordered_json lj;
      lj["connection"] = {l.connection.head, l.connection.relation, l.connection.tail};
      lj["triple"] = {l.triple.head, l.triple.relation, l.triple.tail};
      lj["filtered_rank"] = l.filtered_rank ? nlohmann::ordered_json(*l.filtered_rank) : nlohmann::ordered_json(nullptr);
      lj["raw_rank"] = l.raw_rank ? nlohmann::ordered_json(*l.raw_rank) : nlohmann::ordered_json(nullptr);
      links.push_back(lj);
    }
    j["links"] = links;
  }
  if (include_runtime) j["runtime_seconds"] = report.runtime_seconds;
  return j;
}

nlohmann::ordered_json ingest_summary(const KnowledgeGraph& graph, const RunConfig& config) {
  nlohmann::ordered_json j;
  j["config"] = config.to_json();
  j["entities"] = graph.num_entities();
  j["relations"] = graph.num_relations();
  j["triples"] = graph.num_triples();
  j["subclass_relation"] = graph.subclass_relation() ? nlohmann::ordered_json(graph.options().subclass_relation)
                                                     : nlohmann::ordered_json(nullptr);
  j["type_relation"] = graph.type_relation() ? nlohmann::ordered_json(graph.options().type_relation)
                                             : nlohmann::ordered_json(nullptr);
  nlohmann::ordered_json per_relation;
  for (std::uint32_t r = 0; r < graph.num_relations(); ++r)
    per_relation[graph.relation_label(RelationId{r})] = graph.triples_with_relation(RelationId{r}).size();
  j["triples_per_relation"] = per_relation;
  return j;
}

}  // namespace evcbr
