#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "evcbr/cases.hpp"
#include "evcbr/paths.hpp"
#include "evcbr/stats.hpp"

namespace evcbr {

enum class ScoreMode { Base, Refined, RefinedPlusBase };

struct PredictorParams {
  CaseSelectionOptions cases;
  std::size_t n_paths = 100;  // sampled per case and relation, and kept after scoring
  double epsilon = 5.0;
  std::uint64_t bag_cap = 10000;
  std::uint64_t seed = 1;
  std::size_t attempts_per_path = 20;
  bool allow_revisits = false;
  std::size_t refine_top_k = 0;  // 0 = refine every candidate
  ScoreMode mode = ScoreMode::RefinedPlusBase;
  std::size_t threads = 1;
};

struct CandidateScore {
  EntityId entity;
  double e_score = 0;
  std::optional<double> re_score;
  std::optional<double> combined;  // e_score + re_score
  double active = 0;               // the score the list is sorted by
};

struct RelationPrediction {
  RelationId relation;
  std::vector<ScoredPath> paths;             // the kept forward paths
  std::vector<CandidateScore> candidates;    // sorted by (active desc, entity asc)
};

struct RankedPredictions {
  PredictionQuery query;
  std::vector<Case> cases;
  std::vector<RelationPrediction> relations;  // one per target relation, same order
  std::vector<ScoredPath> reverse_paths;      // all kept backward paths, grouped by cause relation
  bool refined = false;
  ScoreMode mode = ScoreMode::Base;
};

/// EScore: for every kept path, each endpoint reached from `start` earns the
/// path's score once per walk reaching it. Returns positive scores only,
/// sorted by entity.
std::vector<std::pair<EntityId, double>> apply_paths(const KnowledgeGraph& graph, EntityId start,
                                                     std::span<const ScoredPath> paths,
                                                     std::uint64_t bag_cap = kUnlimitedBag);

/// RS for one candidate and one cause triple (c, r_c, cause_tail): the unseen
/// effect gets the single triple (effect, target_relation, candidate) and each
/// backward path contributes score * (walks ending at cause_tail) / (walks).
double refinement_score(const KnowledgeGraph& graph, EntityId effect, RelationId target_relation, EntityId candidate,
                        std::span<const ScoredPath> reverse_paths, EntityId cause_tail,
                        std::uint64_t bag_cap = kUnlimitedBag);

/// Re-sorts each relation's candidates by the score selected by `mode`.
/// Refined modes require refine() to have run.
RankedPredictions combine_scores(RankedPredictions predictions, ScoreMode mode);

class Predictor {
 public:
  Predictor(const StatsIndex& stats, PredictorParams params);

  const PredictorParams& params() const { return params_; }

  /// Selects cases, then samples, scores and applies forward paths for every
  /// target relation. Candidates are ranked by EScore.
  RankedPredictions predict(const PredictionQuery& query) const;

  /// Adds ReScore to every candidate by predicting the cause's own properties
  /// back from the unseen effect.
  void refine(RankedPredictions& predictions) const;

  /// predict, refine when the mode needs it, combine.
  RankedPredictions run(const PredictionQuery& query) const;

 private:
  std::vector<ScoredPath> sample_and_score(const PredictionQuery& query, std::span<const Case> cases,
                                           ReasoningDirection direction, RelationId relation) const;

  const StatsIndex* stats_;
  PredictorParams params_;
};

}  // namespace evcbr
