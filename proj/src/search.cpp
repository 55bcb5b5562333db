#include "evbandit/search.hpp"

#include <algorithm>
#include <queue>
#include <string>
#include <tuple>

#include "evbandit/errors.hpp"

namespace evbandit::search {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Entry = std::pair<double, std::size_t>;
using MinQueue = std::priority_queue<Entry, std::vector<Entry>, std::greater<>>;

}  // namespace

Digraph::Digraph(std::size_t node_count,
                 std::vector<std::pair<std::size_t, std::size_t>> arcs)
    : arcs_(std::move(arcs)), offsets_(node_count + 1, 0) {
  for (const auto& [from, to] : arcs_) {
    if (from >= node_count || to >= node_count) throw DomainError("arc endpoint out of range");
    ++offsets_[from + 1];
  }
  for (std::size_t i = 0; i < node_count; ++i) offsets_[i + 1] += offsets_[i];
  adjacency_.resize(arcs_.size());
  auto fill = offsets_;
  for (std::size_t a = 0; a < arcs_.size(); ++a) adjacency_[fill[arcs_[a].first]++] = a;
  for (std::size_t n = 0; n < node_count; ++n) {
    std::sort(adjacency_.begin() + static_cast<std::ptrdiff_t>(offsets_[n]),
              adjacency_.begin() + static_cast<std::ptrdiff_t>(offsets_[n + 1]),
              [this](std::size_t a, std::size_t b) {
                return std::tie(arcs_[a].second, a) < std::tie(arcs_[b].second, b);
              });
  }
}

ShortestPathTree dijkstra(const Digraph& graph, std::size_t source,
                          std::span<const double> weights) {
  const std::size_t n = graph.node_count();
  if (source >= n) throw DomainError("dijkstra source out of range");
  if (weights.size() != graph.arc_count()) throw DomainError("one weight per arc required");

  ShortestPathTree tree{std::vector<double>(n, kInf), std::vector<std::size_t>(n, npos)};
  std::vector<char> done(n, 0);
  MinQueue queue;
  tree.distance[source] = 0.0;
  queue.emplace(0.0, source);
  while (!queue.empty()) {
    const auto [d, u] = queue.top();
    queue.pop();
    if (done[u]) continue;
    done[u] = 1;
    for (const std::size_t arc : graph.out_arcs(u)) {
      const double w = weights[arc];
      if (w < 0.0) throw DomainError("negative arc weight");
      const std::size_t v = graph.head(arc);
      const double candidate = d + w;
      if (candidate < tree.distance[v]) {
        tree.distance[v] = candidate;
        tree.parent_arc[v] = arc;
        queue.emplace(candidate, v);
      }
    }
  }
  return tree;
}

std::vector<std::size_t> path_to(const ShortestPathTree& tree, const Digraph& graph,
                                 std::size_t target) {
  std::vector<std::size_t> arcs;
  for (std::size_t v = target; tree.parent_arc[v] != npos; v = graph.tail(tree.parent_arc[v])) {
    arcs.push_back(tree.parent_arc[v]);
  }
  std::reverse(arcs.begin(), arcs.end());
  return arcs;
}

SearchPath a_star(const Digraph& graph, std::size_t source, std::size_t target,
                  std::span<const double> weights, const Heuristic& heuristic) {
  const std::size_t n = graph.node_count();
  if (source >= n || target >= n) throw DomainError("a_star endpoint out of range");
  if (weights.size() != graph.arc_count()) throw DomainError("one weight per arc required");

  std::vector<double> g(n, kInf);
  std::vector<std::size_t> parent(n, npos);
  MinQueue open;
  g[source] = 0.0;
  open.emplace(heuristic(source), source);
  while (!open.empty()) {
    const auto [f, u] = open.top();
    open.pop();
    if (u == target) break;
    if (f > g[u] + heuristic(u)) continue;  // stale entry
    for (const std::size_t arc : graph.out_arcs(u)) {
      const double w = weights[arc];
      if (w < 0.0) throw DomainError("negative arc weight");
      const std::size_t v = graph.head(arc);
      const double candidate = g[u] + w;
      if (candidate < g[v]) {
        g[v] = candidate;
        parent[v] = arc;
        open.emplace(candidate + heuristic(v), v);
      }
    }
  }
  if (g[target] == kInf) {
    throw Unreachable("node " + std::to_string(target) + " unreachable from " +
                      std::to_string(source));
  }
  SearchPath path;
  path.cost = g[target];
  for (std::size_t v = target; v != source; v = graph.tail(parent[v])) {
    path.arcs.push_back(parent[v]);
  }
  std::reverse(path.arcs.begin(), path.arcs.end());
  return path;
}

}  // namespace evbandit::search
