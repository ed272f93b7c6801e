#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace evcbr::testing {

std::string data_path(const std::string& name) { return std::string(EVCBR_TEST_DATA_DIR) + "/" + name; }

std::vector<NamedTriple> running_example() { return read_triples_file(data_path("running_example.tsv")); }

GraphOptions running_example_options() { return {"subclassOf", "instanceOf"}; }

std::vector<NamedTriple> new_cause_triples() {
  return {{"NewCause", "instanceOf", "MegathrustEarthquake"}, {"NewCause", "country", "Japan"}};
}

GraphOptions random_graph_options() { return {"sub", "type"}; }

std::vector<NamedTriple> random_graph(std::mt19937_64& rng, const RandomGraphShape& shape) {
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  const std::size_t n_entities = 5 + pick(shape.max_entities - 4);
  const std::size_t n_triples = 1 + pick(shape.max_triples);
  std::vector<std::string> relations;
  for (std::size_t r = 0; r < shape.relations; ++r) relations.push_back("r" + std::to_string(r));
  relations.push_back("sub");
  relations.push_back("type");

  std::vector<NamedTriple> out;
  for (std::size_t i = 0; i < n_triples; ++i) {
    const std::size_t h = pick(n_entities);
    // Self loops and duplicates are rare but present.
    const std::size_t t = pick(20) == 0 ? h : pick(n_entities);
    const std::size_t r = pick(8) == 0 ? shape.relations + pick(2) : pick(shape.relations);
    out.push_back({"e" + std::to_string(h), relations[r], "e" + std::to_string(t)});
    if (pick(30) == 0) out.push_back(out.back());
  }
  return out;
}

std::vector<NamedTriple> fb15k_like(std::uint64_t seed) {
  constexpr std::size_t kEntities = 14541, kRelations = 237, kTriples = 272115;
  std::mt19937_64 rng(seed);
  // Zipf-like popularity via a power of a uniform draw.
  auto skewed = [&](std::size_t n, double power) {
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    return std::min(n - 1, static_cast<std::size_t>(std::pow(u, power) * static_cast<double>(n)));
  };
  std::set<std::tuple<std::size_t, std::size_t, std::size_t>> seen;
  std::vector<NamedTriple> out;
  out.reserve(kTriples);
  while (out.size() < kTriples) {
    const std::size_t h = skewed(kEntities, 2.0);
    const std::size_t t = skewed(kEntities, 3.0);
    const std::size_t r = skewed(kRelations, 2.5);
    if (h == t || !seen.emplace(h, r, t).second) continue;
    out.push_back({"/m/" + std::to_string(h), "/rel/" + std::to_string(r), "/m/" + std::to_string(t)});
  }
  return out;
}

GraphOptions causal_surrogate_options() { return {"subclassOf", "instanceOf"}; }

InductiveSplit causal_surrogate(const SurrogateOptions& options) {
  std::mt19937_64 rng(options.seed);
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  auto chance = [&](double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p; };

  std::vector<NamedTriple> background;
  // Taxonomy: 6 families of 6 leaf classes each.
  constexpr std::size_t kFamilies = 6, kLeaves = 6, kCountries = 40, kRegions = 8;
  std::vector<std::string> leaves;
  for (std::size_t f = 0; f < kFamilies; ++f) {
    const std::string family = "Family" + std::to_string(f);
    background.push_back({family, "subclassOf", "Occurrence"});
    for (std::size_t l = 0; l < kLeaves; ++l) {
      leaves.push_back("Class" + std::to_string(f) + "_" + std::to_string(l));
      background.push_back({leaves.back(), "subclassOf", family});
    }
  }
  for (std::size_t c = 0; c < kCountries; ++c)
    background.push_back({"Country" + std::to_string(c), "partOf", "Region" + std::to_string(c % kRegions)});

  // Each leaf class causes one or two effect classes; half of the rules are
  // also stated at class level.
  std::vector<std::vector<std::size_t>> rules(leaves.size());
  for (std::size_t a = 0; a < leaves.size(); ++a) {
    const std::size_t n = 1 + pick(2);
    while (rules[a].size() < n) {
      const std::size_t b = pick(leaves.size());
      if (b != a && std::find(rules[a].begin(), rules[a].end(), b) == rules[a].end()) rules[a].push_back(b);
    }
    for (std::size_t b : rules[a])
      if (chance(0.5)) background.push_back({leaves[b], "hasCause", leaves[a]});
  }

  InductiveSplit split = {};
  split.train = background;
  std::size_t effect_id = 0;
  for (std::size_t i = 0; i < options.causes; ++i) {
    const bool held = i < options.n_test;
    const std::string cause = "Event" + std::to_string(i);
    const std::size_t cls = pick(leaves.size());
    const std::size_t country = pick(kCountries);
    split.train.push_back({cause, "instanceOf", leaves[cls]});
    split.train.push_back({cause, "country", "Country" + std::to_string(country)});
    if (chance(0.3)) split.train.push_back({cause, "year", "Year" + std::to_string(1900 + pick(120))});

    const std::size_t n_effects = held ? 1 : 1 + pick(2);
    for (std::size_t k = 0; k < n_effects; ++k) {
      const std::string effect = "Effect" + std::to_string(effect_id++);
      const std::size_t effect_cls = chance(0.85) ? rules[cls][pick(rules[cls].size())] : pick(leaves.size());
      const std::size_t effect_country = chance(0.9) ? country : pick(kCountries);
      const std::vector<NamedTriple> props = {
          {effect, "instanceOf", leaves[effect_cls]},
          {effect, "country", "Country" + std::to_string(effect_country)}};
      const NamedTriple link{cause, "hasEffect", effect};
      if (held) {
        split.test_connections.push_back(link);
        split.test_triples.insert(split.test_triples.end(), props.begin(), props.end());
      } else {
        split.train.push_back(link);
        split.train.insert(split.train.end(), props.begin(), props.end());
      }
    }
  }
  return split;
}

}  // namespace evcbr::testing
