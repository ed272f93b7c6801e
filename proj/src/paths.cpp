#include "evcbr/paths.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "evcbr/error.hpp"

namespace evcbr {

RelationPath::RelationPath(std::initializer_list<DirectedStep> steps) {
  for (const auto& s : steps) push_back(s);
}

void RelationPath::push_back(DirectedStep step) {
  if (size_ == kMaxPathLength) throw std::length_error("relation paths hold at most 3 steps");
  steps_[size_++] = step;
}

bool operator==(const RelationPath& a, const RelationPath& b) {
  return std::equal(a.steps().begin(), a.steps().end(), b.steps().begin(), b.steps().end());
}

std::strong_ordering operator<=>(const RelationPath& a, const RelationPath& b) {
  return std::lexicographical_compare_three_way(a.steps().begin(), a.steps().end(), b.steps().begin(),
                                                b.steps().end());
}

std::size_t RelationPathHash::operator()(const RelationPath& p) const noexcept {
  std::uint64_t h = p.size();
  for (const auto& s : p.steps())
    h = mix64(h ^ ((static_cast<std::uint64_t>(s.relation.value) << 1) | (s.direction == Direction::Inverse)));
  return static_cast<std::size_t>(h);
}

std::string RelationPath::to_string(const KnowledgeGraph& graph) const {
  std::string out = "[";
  for (std::size_t i = 0; i < size_; ++i) {
    if (i) out += ", ";
    out += graph.relation_label(steps_[i].relation);
    if (steps_[i].direction == Direction::Inverse) out += "^-1";
  }
  return out + "]";
}

RelationPath parse_relation_path(const KnowledgeGraph& graph, std::string_view text) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    return s;
  };
  text = trim(text);
  if (text.size() < 2 || text.front() != '[' || text.back() != ']')
    throw ConfigError("relation path must be written as [r1, r2^-1, ...]");
  text = text.substr(1, text.size() - 2);

  RelationPath path;
  while (!text.empty()) {
    auto comma = text.find(',');
    auto token = trim(text.substr(0, comma));
    text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
    Direction dir = Direction::Forward;
    if (token.size() > 3 && token.substr(token.size() - 3) == "^-1") {
      dir = Direction::Inverse;
      token.remove_suffix(3);
    }
    auto rel = graph.find_relation(token);
    if (!rel) throw ConfigError("unknown relation '" + std::string(token) + "' in relation path");
    if (path.size() == kMaxPathLength) throw ConfigError("relation path longer than 3 steps");
    path.push_back({*rel, dir});
  }
  if (path.empty()) throw ConfigError("empty relation path");
  return path;
}

std::uint64_t PathBag::size() const {
  std::uint64_t n = 0;
  for (const auto& [e, m] : entries) n += m;
  return n;
}

std::uint64_t PathBag::multiplicity(EntityId e) const {
  auto it = std::lower_bound(entries.begin(), entries.end(), e,
                             [](const auto& entry, EntityId key) { return entry.first < key; });
  return it != entries.end() && it->first == e ? it->second : 0;
}

PathBag follow(const KnowledgeGraph& graph, EntityId start, const RelationPath& path, std::uint64_t bag_cap,
               const Triple* extra) {
  if (extra && graph.contains(*extra)) extra = nullptr;

  PathBag bag;
  std::vector<std::pair<EntityId, std::uint64_t>> frontier{{start, 1}};
  std::vector<std::pair<EntityId, std::uint64_t>> next;
  for (const DirectedStep& step : path.steps()) {
    next.clear();
    for (const auto& [node, mult] : frontier) {
      for (EntityId nb : graph.neighbors_via(node, step)) next.emplace_back(nb, mult);
      if (extra && extra->relation == step.relation) {
        if (step.direction == Direction::Forward && node == extra->head) next.emplace_back(extra->tail, mult);
        if (step.direction == Direction::Inverse && node == extra->tail) next.emplace_back(extra->head, mult);
      }
    }
    std::sort(next.begin(), next.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

    frontier.clear();
    std::uint64_t kept = 0;
    for (const auto& [node, mult] : next) {
      if (kept == bag_cap) {
        bag.truncated = true;
        break;
      }
      std::uint64_t take = mult;
      if (bag_cap - kept < take) {
        take = bag_cap - kept;
        bag.truncated = true;
      }
      kept += take;
      if (!frontier.empty() && frontier.back().first == node)
        frontier.back().second += take;
      else
        frontier.emplace_back(node, take);
    }
    if (frontier.empty()) break;
  }
  bag.entries = std::move(frontier);
  return bag;
}

namespace {

struct WalkOption {
  DirectedStep step;
  EntityId dest;
};

class WalkSampler {
 public:
  WalkSampler(const KnowledgeGraph& graph, const SamplingRequest& request) : graph_(graph), req_(request) {
    for (EntityId t : request.targets) {
      auto out = graph.out_edges(t);
      auto in = graph.in_edges(t);
      near_targets_.insert(out.nodes().begin(), out.nodes().end());
      near_targets_.insert(in.nodes().begin(), in.nodes().end());
    }
  }

  std::optional<RelationPath> walk(Rng& rng) {
    const std::size_t length = 1 + rng.below(kMaxPathLength);
    RelationPath path;
    std::array<EntityId, kMaxPathLength + 1> visited{};
    std::size_t n_visited = 0;
    visited[n_visited++] = req_.from;
    EntityId cur = req_.from;

    for (std::size_t hop = 0; hop < length; ++hop) {
      const auto& opts = options(cur, hop == 0, length - 1 - hop);
      if (opts.empty()) return std::nullopt;
      auto is_visited = [&](EntityId e) {
        return std::find(visited.begin(), visited.begin() + static_cast<std::ptrdiff_t>(n_visited), e) !=
               visited.begin() + static_cast<std::ptrdiff_t>(n_visited);
      };

      const WalkOption* pick = nullptr;
      if (req_.allow_revisits) {
        pick = &opts[rng.below(opts.size())];
      } else {
        for (int tries = 0; tries < 4 && !pick; ++tries) {
          const auto& o = opts[rng.below(opts.size())];
          if (!is_visited(o.dest)) pick = &o;
        }
        if (!pick) {
          std::vector<const WalkOption*> open;
          for (const auto& o : opts)
            if (!is_visited(o.dest)) open.push_back(&o);
          if (open.empty()) return std::nullopt;
          pick = open[rng.below(open.size())];
        }
      }
      path.push_back(pick->step);
      cur = pick->dest;
      visited[n_visited++] = cur;
    }
    return path;
  }

 private:
  bool is_target(EntityId e) const { return std::binary_search(req_.targets.begin(), req_.targets.end(), e); }

  bool admissible(EntityId dest, std::size_t remaining) const {
    if (req_.forbidden && dest == *req_.forbidden) return false;
    if (remaining == 0) return is_target(dest);
    if (remaining == 1) return near_targets_.count(dest) > 0;
    return true;
  }

  const std::vector<WalkOption>& options(EntityId node, bool first, std::size_t remaining) {
    const std::uint64_t key = (static_cast<std::uint64_t>(node.value) << 3) | (first ? 4u : 0u) | remaining;
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;

    std::vector<WalkOption> opts;
    auto out = graph_.out_edges(node);
    for (std::size_t i = 0; i < out.size(); ++i) {
      Edge e = out[i];
      if (first && !std::binary_search(req_.first_step_relations.begin(), req_.first_step_relations.end(),
                                       e.relation))
        continue;
      if (admissible(e.node, remaining)) opts.push_back({{e.relation, Direction::Forward}, e.node});
    }
    if (!first) {
      auto in = graph_.in_edges(node);
      for (std::size_t i = 0; i < in.size(); ++i) {
        Edge e = in[i];
        if (admissible(e.node, remaining)) opts.push_back({{e.relation, Direction::Inverse}, e.node});
      }
    }
    return memo_.emplace(key, std::move(opts)).first->second;
  }

  const KnowledgeGraph& graph_;
  const SamplingRequest& req_;
  std::unordered_set<EntityId> near_targets_;
  std::unordered_map<std::uint64_t, std::vector<WalkOption>> memo_;
};

}  // namespace

std::vector<RelationPath> sample_paths(const KnowledgeGraph& graph, const SamplingRequest& request, Rng& rng) {
  std::vector<RelationPath> out;
  if (request.targets.empty() || request.budget == 0 || !graph.contains(request.from)) return out;
  if (request.forbidden && request.from == *request.forbidden) return out;

  WalkSampler sampler(graph, request);
  std::unordered_set<RelationPath, RelationPathHash> found;
  const std::size_t attempts = request.attempts_per_path * request.budget;
  for (std::size_t a = 0; a < attempts && found.size() < request.budget; ++a)
    if (auto p = sampler.walk(rng)) found.insert(*p);

  out.assign(found.begin(), found.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<ScoredPath> score_paths(const KnowledgeGraph& graph, std::span<const Case> cases,
                                    std::span<const std::vector<RelationPath>> per_case_paths,
                                    ReasoningDirection direction, RelationId target_relation, double epsilon,
                                    std::size_t keep, std::uint64_t bag_cap) {
  if (epsilon < 0) throw std::invalid_argument("epsilon must be non-negative");
  std::vector<RelationPath> paths;
  for (const auto& v : per_case_paths) paths.insert(paths.end(), v.begin(), v.end());
  std::sort(paths.begin(), paths.end());
  paths.erase(std::unique(paths.begin(), paths.end()), paths.end());

  const bool forward = direction == ReasoningDirection::CauseToEffect;
  std::vector<ScoredPath> scored;
  for (const auto& path : paths) {
    ScoredPath sp{path, target_relation, 0.0, 0, 0};
    for (const Case& c : cases) {
      const EntityId start = forward ? c.cause : c.effect;
      const EntityId owner = forward ? c.effect : c.cause;
      auto gold = graph.neighbors_via(owner, {target_relation, Direction::Forward});
      auto bag = follow(graph, start, path, bag_cap);
      for (const auto& [e, m] : bag.entries) {
        sp.total += m;
        if (std::binary_search(gold.begin(), gold.end(), e)) sp.hits += m;
      }
    }
    if (sp.total == 0) continue;
    sp.score = static_cast<double>(sp.hits) / (epsilon + static_cast<double>(sp.total));
    scored.push_back(sp);
  }
  std::stable_sort(scored.begin(), scored.end(), [](const ScoredPath& a, const ScoredPath& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.path < b.path;
  });
  if (keep > 0 && scored.size() > keep) scored.resize(keep);
  return scored;
}

}  // namespace evcbr
