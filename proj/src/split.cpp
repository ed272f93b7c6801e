#include <algorithm>
#include <numeric>
#include <unordered_map>

#include "evcbr/error.hpp"
#include "evcbr/evaluation.hpp"
#include "evcbr/random.hpp"

namespace evcbr {

namespace {

// Distinct neighbours of x (either direction, self excluded) with the number
// of triples linking them to x.
std::vector<std::pair<EntityId, std::size_t>> linked(const KnowledgeGraph& g, EntityId x) {
  std::vector<EntityId> nodes;
  auto out = g.out_edges(x);
  auto in = g.in_edges(x);
  nodes.insert(nodes.end(), out.nodes().begin(), out.nodes().end());
  nodes.insert(nodes.end(), in.nodes().begin(), in.nodes().end());
  std::sort(nodes.begin(), nodes.end());
  std::vector<std::pair<EntityId, std::size_t>> result;
  for (EntityId n : nodes) {
    if (n == x) continue;
    if (!result.empty() && result.back().first == n)
      ++result.back().second;
    else
      result.emplace_back(n, 1);
  }
  return result;
}

}  // namespace

InductiveSplit make_split(const KnowledgeGraph& graph, std::size_t n_test, std::size_t n_valid, std::uint64_t seed) {
  const std::size_t n = graph.num_entities();
  const std::size_t wanted = n_test + n_valid;

  // Triples from each entity to a different, still-training entity.
  std::vector<std::size_t> live(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& [nb, m] : linked(graph, EntityId{static_cast<std::uint32_t>(i)})) live[i] += m;

  std::vector<char> held(n, 0);
  std::vector<EntityId> selected;
  if (wanted > 0) {
    Rng rng(derive_seed(seed, {0x5b11u}));
    std::vector<EntityId> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = EntityId{static_cast<std::uint32_t>(i)};
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    for (EntityId x : order) {
      if (selected.size() == wanted) break;
      auto out = graph.out_edges(x);
      auto in = graph.in_edges(x);
      const bool has_out = std::any_of(out.nodes().begin(), out.nodes().end(), [&](EntityId t) { return t != x; });
      const bool has_in = std::any_of(in.nodes().begin(), in.nodes().end(), [&](EntityId h) { return h != x; });
      if (!has_out || !has_in) continue;

      auto nbs = linked(graph, x);
      bool ok = true;
      for (const auto& [y, m] : nbs) {
        if (held[y.index()] || live[y.index()] < m + 1) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;

      held[x.index()] = 1;
      selected.push_back(x);
      for (const auto& [y, m] : nbs) live[y.index()] -= m;
    }
    if (selected.size() < wanted)
      throw SplitError("only " + std::to_string(selected.size()) + " of " + std::to_string(wanted) +
                           " entities satisfy the hold-out conditions",
                       selected.size());
    for (std::size_t i = selected.size(); i > 1; --i) std::swap(selected[i - 1], selected[rng.below(i)]);
  }

  // 1 = validation, 2 = test
  std::vector<char> part(n, 0);
  for (std::size_t i = 0; i < selected.size(); ++i) part[selected[i].index()] = i < n_valid ? 1 : 2;

  InductiveSplit split;
  for (const Triple& t : graph.triples()) {
    const char hp = part[t.head.index()];
    const char tp = part[t.tail.index()];
    if (hp && tp) continue;  // only self-loops of held-out entities reach here
    if (hp)
      (hp == 1 ? split.valid_triples : split.test_triples).push_back(graph.named(t));
    else if (tp)
      (tp == 1 ? split.valid_connections : split.test_connections).push_back(graph.named(t));
    else
      split.train.push_back(graph.named(t));
  }
  return split;
}

void write_split(const InductiveSplit& split, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_triples_file((dir / split_files::kTrain).string(), split.train);
  write_triples_file((dir / split_files::kValidConnections).string(), split.valid_connections);
  write_triples_file((dir / split_files::kValidTriples).string(), split.valid_triples);
  write_triples_file((dir / split_files::kTestConnections).string(), split.test_connections);
  write_triples_file((dir / split_files::kTestTriples).string(), split.test_triples);
}

InductiveSplit read_split(const std::filesystem::path& dir) {
  auto read = [&](const char* name) {
    auto path = dir / name;
    if (!std::filesystem::exists(path)) throw Error("missing split file " + path.string());
    return read_triples_file(path.string());
  };
  InductiveSplit split;
  split.train = read(split_files::kTrain);
  split.valid_connections = read(split_files::kValidConnections);
  split.valid_triples = read(split_files::kValidTriples);
  split.test_connections = read(split_files::kTestConnections);
  split.test_triples = read(split_files::kTestTriples);
  return split;
}

}  // namespace evcbr
