#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <utility>
#include <vector>

namespace evbandit::search {

inline constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

/// Static directed multigraph over dense node indices with CSR adjacency.
/// Out-arcs of a node are ordered by (head index, arc index), which makes
/// every search below deterministic.
class Digraph {
 public:
  Digraph() = default;
  Digraph(std::size_t node_count, std::vector<std::pair<std::size_t, std::size_t>> arcs);

  std::size_t node_count() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t arc_count() const noexcept { return arcs_.size(); }
  std::size_t tail(std::size_t arc) const { return arcs_[arc].first; }
  std::size_t head(std::size_t arc) const { return arcs_[arc].second; }

  std::span<const std::size_t> out_arcs(std::size_t node) const {
    return {adjacency_.data() + offsets_[node], adjacency_.data() + offsets_[node + 1]};
  }

 private:
  std::vector<std::pair<std::size_t, std::size_t>> arcs_;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> adjacency_;
};

struct ShortestPathTree {
  std::vector<double> distance;       // +inf when unreachable
  std::vector<std::size_t> parent_arc;  // npos for the source and unreachable nodes
};

/// Single-source shortest paths; weights must be nonnegative.
ShortestPathTree dijkstra(const Digraph& graph, std::size_t source,
                          std::span<const double> weights);

/// Arc sequence from the tree's source to `target`; empty when target is
/// the source or unreachable.
std::vector<std::size_t> path_to(const ShortestPathTree& tree, const Digraph& graph,
                                 std::size_t target);

struct SearchPath {
  std::vector<std::size_t> arcs;
  double cost = 0.0;
};

using Heuristic = std::function<double(std::size_t)>;

/// A* with node reopening, so an admissible heuristic is enough for an
/// optimal result. Throws Unreachable when target cannot be reached.
SearchPath a_star(const Digraph& graph, std::size_t source, std::size_t target,
                  std::span<const double> weights, const Heuristic& heuristic);

}  // namespace evbandit::search
