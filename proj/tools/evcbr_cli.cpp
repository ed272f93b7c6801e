#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "evcbr/config.hpp"
#include "evcbr/error.hpp"
#include "evcbr/evaluation.hpp"
#include "evcbr/parallel.hpp"
#include "evcbr/records.hpp"

namespace {

using namespace evcbr;

// Exit codes.
constexpr int kUsage = 2;
constexpr int kInput = 3;     // unreadable or malformed files
constexpr int kConfig = 4;    // invalid parameters or labels
constexpr int kSplit = 5;     // the graph cannot supply the requested split
constexpr int kRuntime = 6;   // missing files, empty splits and other run failures

struct Flags {
  std::vector<std::string> graph_paths;
  std::string config_path;
  std::optional<std::string> subclass_relation, type_relation, idf_norm, importance_position, mode, ranking, ties,
      partition;
  std::optional<std::size_t> cases_head, cases_cov, n_paths, refine_top_k, attempts_per_path, threads;
  std::optional<double> epsilon;
  std::optional<std::uint64_t> bag_cap, seed;
  bool allow_revisits = false;
  bool verbose = false;
  bool runtime = false;

  // predict
  std::string cause, causal_relation, queries_path;
  std::vector<std::string> target_relations, cause_triples;
  std::size_t top = 20;

  // split
  std::size_t n_test = 500, n_valid = 500;
  std::string out_dir;

  // evaluate
  std::string split_dir;
};

void add_model_flags(CLI::App& cmd, Flags& f) {
  cmd.add_option("--config", f.config_path, "JSON config file; flags override it")->check(CLI::ExistingFile);
  cmd.add_option("--subclass-relation", f.subclass_relation, "label of the subclass relation (default P279)");
  cmd.add_option("--type-relation", f.type_relation, "label of the instance-of relation (default P31)");
  cmd.add_option("--idf-norm", f.idf_norm, "max|l2|none");
  cmd.add_option("--importance-position", f.importance_position, "tail|either");
  cmd.add_option("--cases-head", f.cases_head, "cases picked by head similarity");
  cmd.add_option("--cases-cov", f.cases_cov, "of those, cases picked by relation coverage");
  cmd.add_option("--n-paths", f.n_paths, "paths sampled per case and kept per relation");
  cmd.add_option("--epsilon", f.epsilon, "path score smoothing");
  cmd.add_option("--bag-cap", f.bag_cap, "max walks followed per path (0 = unlimited)");
  cmd.add_option("--seed", f.seed, "random seed");
  cmd.add_option("--attempts-per-path", f.attempts_per_path, "walk attempts per requested path");
  cmd.add_flag("--allow-revisits", f.allow_revisits, "let sampled walks revisit nodes");
  cmd.add_option("--mode", f.mode, "base|refined|refined+base");
  cmd.add_option("--refine-top-k", f.refine_top_k, "refine only the top K candidates (0 = all)");
  cmd.add_option("--threads", f.threads, "worker threads (default: all cores)");
}

void add_eval_flags(CLI::App& cmd, Flags& f) {
  cmd.add_option("--ranking", f.ranking, "filtered|raw");
  cmd.add_option("--ties", f.ties, "ordinal|expected");
  cmd.add_option("--partition", f.partition, "test|valid");
  cmd.add_flag("--verbose", f.verbose, "per-link ranks and both ranking modes");
  cmd.add_flag("--runtime", f.runtime, "include wall-clock runtime in the report");
}

RunConfig build_config(const Flags& f) {
  RunConfig c = f.config_path.empty() ? RunConfig{} : load_config_file(f.config_path);
  if (f.subclass_relation) c.graph.subclass_relation = *f.subclass_relation;
  if (f.type_relation) c.graph.type_relation = *f.type_relation;
  if (f.idf_norm) c.stats.idf_normalization = parse_idf_normalization(*f.idf_norm);
  if (f.importance_position) c.stats.importance_position = parse_importance_position(*f.importance_position);
  if (f.cases_head) c.predictor.cases.n_head = *f.cases_head;
  if (f.cases_cov) c.predictor.cases.n_cov = *f.cases_cov;
  if (f.n_paths) c.predictor.n_paths = *f.n_paths;
  if (f.epsilon) c.predictor.epsilon = *f.epsilon;
  if (f.bag_cap) c.predictor.bag_cap = *f.bag_cap == 0 ? kUnlimitedBag : *f.bag_cap;
  if (f.seed) c.predictor.seed = *f.seed;
  if (f.attempts_per_path) c.predictor.attempts_per_path = *f.attempts_per_path;
  if (f.allow_revisits) c.predictor.allow_revisits = true;
  if (f.mode) c.predictor.mode = parse_score_mode(*f.mode);
  if (f.refine_top_k) c.predictor.refine_top_k = *f.refine_top_k;
  if (f.ranking) c.ranking = parse_ranking_mode(*f.ranking);
  if (f.ties) c.ties = parse_tie_policy(*f.ties);
  if (f.partition) c.partition = parse_partition(*f.partition);
  c.threads = f.threads ? *f.threads : (f.config_path.empty() ? default_thread_count() : c.threads);
  if (c.threads == 0) c.threads = default_thread_count();
  c.validate();
  return c;
}

void print(const nlohmann::ordered_json& j) { std::cout << j.dump() << '\n'; }

int cmd_ingest(const Flags& f) {
  const RunConfig config = build_config(f);
  const auto graph = ingest_files(f.graph_paths, config.graph);
  print(ingest_summary(graph, config));
  return 0;
}

int cmd_split(const Flags& f) {
  const RunConfig config = build_config(f);
  const auto graph = ingest_files(f.graph_paths, config.graph);
  const auto split = make_split(graph, f.n_test, f.n_valid, config.predictor.seed);
  write_split(split, f.out_dir);
  nlohmann::ordered_json j;
  j["config"] = config.to_json();
  j["out_dir"] = f.out_dir;
  j["n_test"] = f.n_test;
  j["n_valid"] = f.n_valid;
  j["train"] = split.train.size();
  j["test_connections"] = split.test_connections.size();
  j["test_triples"] = split.test_triples.size();
  j["valid_connections"] = split.valid_connections.size();
  j["valid_triples"] = split.valid_triples.size();
  print(j);
  return 0;
}

QuerySpec spec_from_flags(const Flags& f) {
  if (f.cause.empty() || f.causal_relation.empty() || f.target_relations.empty())
    throw ConfigError("predict needs --queries, or --cause, --causal-relation and --target-relations");
  QuerySpec spec;
  spec.cause = f.cause;
  spec.causal_relation = f.causal_relation;
  spec.target_relations = f.target_relations;
  for (const auto& text : f.cause_triples) {
    auto sep = text.find(':');
    if (sep == std::string::npos || sep == 0 || sep + 1 == text.size())
      throw ConfigError("--cause-triple expects RELATION:TAIL, got '" + text + "'");
    spec.cause_triples.push_back({f.cause, text.substr(0, sep), text.substr(sep + 1)});
  }
  return spec;
}

int cmd_predict(const Flags& f) {
  const RunConfig config = build_config(f);
  std::vector<QuerySpec> specs;
  if (!f.queries_path.empty()) {
    std::ifstream in(f.queries_path);
    if (!in) throw Error("cannot open " + f.queries_path);
    specs = read_query_specs(in, f.queries_path);
  } else {
    specs.push_back(spec_from_flags(f));
  }

  const auto base = ingest_files(f.graph_paths, config.graph);
  const StatsIndex base_stats(base, config.stats);
  PredictorParams params = config.predictor;
  params.threads = config.threads;

  for (const auto& spec : specs) {
    // A query that brings its own cause triples gets its own graph, so the
    // shared index never sees them.
    std::unique_ptr<KnowledgeGraph> extended;
    std::unique_ptr<StatsIndex> extended_stats;
    const StatsIndex* stats = &base_stats;
    if (!spec.cause_triples.empty()) {
      extended = std::make_unique<KnowledgeGraph>(base.with_triples(spec.cause_triples));
      extended_stats = std::make_unique<StatsIndex>(*extended, config.stats);
      stats = extended_stats.get();
    }
    const Predictor predictor(*stats, params);
    const auto query = resolve_query(stats->graph(), spec);
    const auto predictions = predictor.run(query);
    for (const auto& rec : prediction_records(stats->graph(), spec, predictions, config, f.top)) print(rec);
  }
  return 0;
}

int cmd_evaluate(const Flags& f) {
  const RunConfig config = build_config(f);
  const auto split = read_split(f.split_dir);
  const auto report = evaluate(split, config.eval_options());
  print(report_record(report, config, f.verbose, f.runtime));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Case-based effect prediction over knowledge graphs"};
  app.require_subcommand(1);
  // A repeated scalar flag keeps its last value, so flags can be appended to
  // a saved command line.
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  Flags f;

  auto* ingest = app.add_subcommand("ingest", "load triple files and print a summary");
  ingest->add_option("--graph", f.graph_paths, "TSV triple files")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)->required()->check(CLI::ExistingFile);
  add_model_flags(*ingest, f);

  auto* split = app.add_subcommand("split", "hold out entities for inductive evaluation");
  split->add_option("--graph", f.graph_paths, "TSV triple files")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)->required()->check(CLI::ExistingFile);
  split->add_option("--n-test", f.n_test, "test entities");
  split->add_option("--n-valid", f.n_valid, "validation entities");
  split->add_option("--out-dir", f.out_dir, "directory for the split files")->required();
  add_model_flags(*split, f);

  auto* predict = app.add_subcommand("predict", "predict the properties of an unseen effect");
  predict->add_option("--graph", f.graph_paths, "TSV triple files")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)->required()->check(CLI::ExistingFile);
  predict->add_option("--cause", f.cause, "cause entity label");
  predict->add_option("--causal-relation", f.causal_relation, "relation linking causes to effects");
  predict->add_option("--target-relations", f.target_relations, "relations to predict for the effect")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)
      ->delimiter(',');
  predict->add_option("--cause-triple", f.cause_triples, "extra RELATION:TAIL property of the cause (repeatable)")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  predict->add_option("--queries", f.queries_path, "JSON lines of queries")->check(CLI::ExistingFile);
  predict->add_option("--top", f.top, "candidates per record (0 = all)");
  add_model_flags(*predict, f);

  auto* evaluate_cmd = app.add_subcommand("evaluate", "rank held-out links of a split");
  evaluate_cmd->add_option("--split-dir", f.split_dir, "directory written by split")->required();
  add_model_flags(*evaluate_cmd, f);
  add_eval_flags(*evaluate_cmd, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kUsage;
  }

  try {
    if (*ingest) return cmd_ingest(f);
    if (*split) return cmd_split(f);
    if (*predict) return cmd_predict(f);
    return cmd_evaluate(f);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInput;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const QueryError& e) {
    std::cerr << "query error: " << e.what() << '\n';
    return kConfig;
  } catch (const SplitError& e) {
    std::cerr << "split error: " << e.what() << " (selected " << e.selected() << ")\n";
    return kSplit;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
