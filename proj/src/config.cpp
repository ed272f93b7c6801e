#include "evcbr/config.hpp"

#include <fstream>

#include "evcbr/error.hpp"

namespace evcbr {

namespace {

template <class Enum, std::size_t N>
Enum parse_enum(const std::string& text, const std::pair<const char*, Enum> (&names)[N], const char* what) {
  for (const auto& [name, value] : names)
    if (text == name) return value;
  std::string allowed;
  for (const auto& [name, value] : names) allowed += std::string(allowed.empty() ? "" : "|") + name;
  throw ConfigError(std::string("invalid ") + what + " '" + text + "' (expected " + allowed + ")");
}

template <class Enum, std::size_t N>
std::string enum_name(Enum value, const std::pair<const char*, Enum> (&names)[N]) {
  for (const auto& [name, v] : names)
    if (v == value) return name;
  return "?";
}

constexpr std::pair<const char*, ScoreMode> kModes[] = {
    {"base", ScoreMode::Base}, {"refined", ScoreMode::Refined}, {"refined+base", ScoreMode::RefinedPlusBase}};
constexpr std::pair<const char*, IdfNormalization> kIdf[] = {
    {"max", IdfNormalization::Max}, {"l2", IdfNormalization::L2}, {"none", IdfNormalization::None}};
constexpr std::pair<const char*, ImportancePosition> kPositions[] = {{"tail", ImportancePosition::Tail},
                                                                     {"either", ImportancePosition::Either}};
constexpr std::pair<const char*, RankingMode> kRanking[] = {{"filtered", RankingMode::Filtered},
                                                            {"raw", RankingMode::Raw}};
constexpr std::pair<const char*, TiePolicy> kTies[] = {{"ordinal", TiePolicy::Ordinal},
                                                       {"expected", TiePolicy::Expected}};
constexpr std::pair<const char*, Partition> kPartitions[] = {{"test", Partition::Test}, {"valid", Partition::Valid}};

}  // namespace

std::string to_string(ScoreMode mode) { return enum_name(mode, kModes); }
std::string to_string(IdfNormalization mode) { return enum_name(mode, kIdf); }
std::string to_string(ImportancePosition mode) { return enum_name(mode, kPositions); }
std::string to_string(RankingMode mode) { return enum_name(mode, kRanking); }
std::string to_string(TiePolicy mode) { return enum_name(mode, kTies); }
std::string to_string(Partition mode) { return enum_name(mode, kPartitions); }

ScoreMode parse_score_mode(const std::string& text) { return parse_enum(text, kModes, "mode"); }
IdfNormalization parse_idf_normalization(const std::string& text) {
  return parse_enum(text, kIdf, "idf normalization");
}
ImportancePosition parse_importance_position(const std::string& text) {
  return parse_enum(text, kPositions, "importance position");
}
RankingMode parse_ranking_mode(const std::string& text) { return parse_enum(text, kRanking, "ranking"); }
TiePolicy parse_tie_policy(const std::string& text) { return parse_enum(text, kTies, "tie policy"); }
Partition parse_partition(const std::string& text) { return parse_enum(text, kPartitions, "partition"); }

void RunConfig::validate() const {
  const auto& p = predictor;
  if (p.cases.n_head == 0) throw ConfigError("cases-head must be positive");
  if (p.cases.n_cov >= p.cases.n_head) throw ConfigError("cases-cov must be smaller than cases-head");
  if (p.n_paths == 0) throw ConfigError("n-paths must be positive");
  if (!(p.epsilon >= 0)) throw ConfigError("epsilon must be non-negative");
  if (p.bag_cap == 0) throw ConfigError("bag-cap must be positive");
  if (p.attempts_per_path == 0) throw ConfigError("attempts-per-path must be positive");
  for (int k : hits_at)
    if (k <= 0) throw ConfigError("hits@K needs positive K");
}

nlohmann::ordered_json RunConfig::to_json() const {
  nlohmann::ordered_json j;
  j["subclass_relation"] = graph.subclass_relation;
  j["type_relation"] = graph.type_relation;
  j["idf_normalization"] = to_string(stats.idf_normalization);
  j["importance_position"] = to_string(stats.importance_position);
  j["expand_type_superclasses"] = stats.expand_type_superclasses;
  j["cases_head"] = predictor.cases.n_head;
  j["cases_cov"] = predictor.cases.n_cov;
  j["distinct_causes_across_passes"] = predictor.cases.distinct_causes_across_passes;
  j["n_paths"] = predictor.n_paths;
  j["epsilon"] = predictor.epsilon;
  j["bag_cap"] = predictor.bag_cap;
  j["seed"] = predictor.seed;
  j["attempts_per_path"] = predictor.attempts_per_path;
  j["allow_revisits"] = predictor.allow_revisits;
  j["refine_top_k"] = predictor.refine_top_k;
  j["mode"] = to_string(predictor.mode);
  j["ranking"] = to_string(ranking);
  j["ties"] = to_string(ties);
  j["partition"] = to_string(partition);
  j["hits_at"] = hits_at;
  return j;
}

void RunConfig::merge_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "subclass_relation") graph.subclass_relation = value.get<std::string>();
      else if (key == "type_relation") graph.type_relation = value.get<std::string>();
      else if (key == "idf_normalization") stats.idf_normalization = parse_idf_normalization(value.get<std::string>());
      else if (key == "importance_position") stats.importance_position = parse_importance_position(value.get<std::string>());
      else if (key == "expand_type_superclasses") stats.expand_type_superclasses = value.get<bool>();
      else if (key == "cases_head") predictor.cases.n_head = value.get<std::size_t>();
      else if (key == "cases_cov") predictor.cases.n_cov = value.get<std::size_t>();
      else if (key == "distinct_causes_across_passes") predictor.cases.distinct_causes_across_passes = value.get<bool>();
      else if (key == "n_paths") predictor.n_paths = value.get<std::size_t>();
      else if (key == "epsilon") predictor.epsilon = value.get<double>();
      else if (key == "bag_cap") predictor.bag_cap = value.get<std::uint64_t>();
      else if (key == "seed") predictor.seed = value.get<std::uint64_t>();
      else if (key == "attempts_per_path") predictor.attempts_per_path = value.get<std::size_t>();
      else if (key == "allow_revisits") predictor.allow_revisits = value.get<bool>();
      else if (key == "refine_top_k") predictor.refine_top_k = value.get<std::size_t>();
      else if (key == "mode") predictor.mode = parse_score_mode(value.get<std::string>());
      else if (key == "ranking") ranking = parse_ranking_mode(value.get<std::string>());
      else if (key == "ties") ties = parse_tie_policy(value.get<std::string>());
      else if (key == "partition") partition = parse_partition(value.get<std::string>());
      else if (key == "hits_at") hits_at = value.get<std::vector<int>>();
      else if (key == "threads") threads = value.get<std::size_t>();
      else throw ConfigError("unknown config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
}

EvalOptions RunConfig::eval_options() const {
  EvalOptions o;
  o.graph = graph;
  o.stats = stats;
  o.predictor = predictor;
  o.partition = partition;
  o.ties = ties;
  o.hits_at = hits_at;
  o.threads = threads;
  return o;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cannot parse config " + path + ": " + e.what());
  }
  RunConfig config;
  config.merge_json(j);
  return config;
}

}  // namespace evcbr
