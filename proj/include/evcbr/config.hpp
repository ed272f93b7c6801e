#pragma once

#include <string>

#include "evcbr/evaluation.hpp"
#include "json.hpp"

namespace evcbr {

/// Every knob of a run. Serialises to a JSON echo that reproduces the run;
/// the thread count is left out because it never changes results.
struct RunConfig {
  GraphOptions graph;
  StatsOptions stats;
  PredictorParams predictor;
  RankingMode ranking = RankingMode::Filtered;
  TiePolicy ties = TiePolicy::Ordinal;
  Partition partition = Partition::Test;
  std::vector<int> hits_at = {1, 3, 10};
  std::size_t threads = 1;

  /// Throws ConfigError on out-of-range values.
  void validate() const;

  nlohmann::ordered_json to_json() const;
  /// Overrides the fields present in `j`; unknown keys are rejected.
  void merge_json(const nlohmann::json& j);

  EvalOptions eval_options() const;
};

RunConfig load_config_file(const std::string& path);

std::string to_string(ScoreMode mode);
std::string to_string(IdfNormalization mode);
std::string to_string(ImportancePosition mode);
std::string to_string(RankingMode mode);
std::string to_string(TiePolicy mode);
std::string to_string(Partition mode);

ScoreMode parse_score_mode(const std::string& text);
IdfNormalization parse_idf_normalization(const std::string& text);
ImportancePosition parse_importance_position(const std::string& text);
RankingMode parse_ranking_mode(const std::string& text);
TiePolicy parse_tie_policy(const std::string& text);
Partition parse_partition(const std::string& text);

}  // namespace evcbr
