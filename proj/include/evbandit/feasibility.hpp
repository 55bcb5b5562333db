#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "evbandit/road_graph.hpp"
#include "evbandit/search.hpp"

namespace evbandit::feasibility {

/// A vertex of the feasibility graph: a charging station, or a trip
/// terminal injected by connect_terminals (which may have no charger).
struct Station {
  road::NodeId id = 0;
  double lat = 0.0;
  double lon = 0.0;
  std::optional<road::ChargerSpec> charger;
};

/// Time-optimal road path between two stations that fits in the battery window.
struct FeasibilityEdge {
  std::size_t from = 0;  // station index
  std::size_t to = 0;
  double path_time_s = 0.0;
  double path_energy_ws = 0.0;
  std::optional<road::RoadPath> road_path;
};

/// Charger-to-charger graph. Stations are sorted by node id and edges by
/// (from id, to id), so two builds of the same input compare equal.
class FeasibilityGraph {
 public:
  FeasibilityGraph() = default;
  FeasibilityGraph(std::vector<Station> stations, std::vector<FeasibilityEdge> edges,
                   double usable_window_ws, double max_speed_mps);

  std::span<const Station> stations() const { return stations_; }
  std::span<const FeasibilityEdge> edges() const { return edges_; }
  const search::Digraph& topology() const { return topology_; }
  double usable_window_ws() const noexcept { return usable_window_ws_; }
  double max_speed_mps() const noexcept { return max_speed_mps_; }

  std::optional<std::size_t> station_index(road::NodeId id) const;

  std::optional<std::size_t> source() const noexcept { return source_; }
  std::optional<std::size_t> target() const noexcept { return target_; }
  void set_terminals(std::size_t source, std::size_t target);

  /// True when arriving over `edge` incurs a queue and a charging session:
  /// the head has a charger and is not the trip target.
  bool charges_at_head(std::size_t edge) const;

  /// Beeline time from a station to the trip target at max_speed_mps().
  double heuristic_to_target(std::size_t station) const;

 private:
  std::vector<Station> stations_;
  std::vector<FeasibilityEdge> edges_;
  search::Digraph topology_;
  double usable_window_ws_ = 0.0;
  double max_speed_mps_ = 0.0;
  std::optional<std::size_t> source_;
  std::optional<std::size_t> target_;
};

/// (soc_max - soc_min) * capacity.
double usable_window(const road::VehicleParams& vehicle);

/// Travel time and energy of the time-optimal path from one road node to
/// every node; ties in time are broken by energy, then by predecessor id.
struct FastestPaths {
  std::vector<double> time_s;     // +inf when unreachable
  std::vector<double> energy_ws;
  std::vector<std::size_t> parent_edge;  // search::npos at source / unreachable
};

FastestPaths fastest_paths_from(const road::RoadGraph& road, std::size_t source,
                                std::span<const double> times, std::span<const double> energies);

struct BuildOptions {
  bool retain_road_paths = false;
};

FeasibilityGraph build_feasibility_graph(const road::RoadGraph& road,
                                         const road::VehicleParams& vehicle,
                                         BuildOptions options = {});

/// Injects the trip source (outgoing edges only) and target (incoming edges
/// only) as pseudo-stations, reusing existing stations. Throws
/// IsolatedTerminal when either ends up without a feasible edge.
FeasibilityGraph connect_terminals(const FeasibilityGraph& graph, const road::RoadGraph& road,
                                   road::NodeId source, road::NodeId target,
                                   const road::VehicleParams& vehicle);

void save_feasibility(const FeasibilityGraph& graph, const std::filesystem::path& stations_file,
                      const std::filesystem::path& edges_file);

/// Loads a saved graph; throws ValidationError when an edge exceeds the
/// window (the cache was built for a different vehicle).
FeasibilityGraph load_feasibility(const std::filesystem::path& stations_file,
                                  const std::filesystem::path& edges_file,
                                  double usable_window_ws, double max_speed_mps);

}  // namespace evbandit::feasibility
