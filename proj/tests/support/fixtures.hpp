#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "evcbr/evaluation.hpp"
#include "evcbr/graph.hpp"

namespace evcbr::testing {

std::string data_path(const std::string& name);

// Earthquake/tsunami toy graph. The new cause is not part of it; its two
// properties come from new_cause_triples().
std::vector<NamedTriple> running_example();
GraphOptions running_example_options();
std::vector<NamedTriple> new_cause_triples();

struct RandomGraphShape {
  std::size_t max_entities = 50;
  std::size_t max_triples = 300;
  std::size_t relations = 5;  // besides "sub" and "type"
};

// Uniformly wired small graph with a sprinkling of "sub"/"type" edges, self
// loops, duplicates and subclass cycles.
std::vector<NamedTriple> random_graph(std::mt19937_64& rng, const RandomGraphShape& shape = {});
GraphOptions random_graph_options();

// Skewed-degree graph with the entity, relation and triple counts of the
// common FB15k-237 benchmark.
std::vector<NamedTriple> fb15k_like(std::uint64_t seed);

// Event graph where effects follow class-level causal rules and mostly share
// the cause's country. Effects of `n_test` causes are held out.
struct SurrogateOptions {
  std::size_t causes = 1800;
  std::size_t n_test = 150;
  std::uint64_t seed = 7;
};
InductiveSplit causal_surrogate(const SurrogateOptions& options);
GraphOptions causal_surrogate_options();

}  // namespace evcbr::testing
