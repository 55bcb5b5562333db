#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "evbandit/search.hpp"

namespace evbandit::road {

using NodeId = std::int64_t;

/// Chargers below this rated power are dropped at load time.
inline constexpr double kMinChargerPowerW = 10'000.0;
inline constexpr double kEarthRadiusM = 6'371'000.0;

struct ChargerSpec {
  double max_power_w = 0.0;
  double min_power_w = 0.0;
};

struct RoadNode {
  NodeId id = 0;
  double lat = 0.0;
  double lon = 0.0;
  std::optional<ChargerSpec> charger;
};

/// Directed road segment; the opposite direction is a separate edge.
struct RoadEdge {
  NodeId from = 0;
  NodeId to = 0;
  double length_m = 0.0;
  double speed_mps = 0.0;
};

/// Longitudinal dynamics parameters. Defaults describe a heavy electric
/// truck; the usable window is soc_max - soc_min of the capacity.
struct VehicleParams {
  double mass_kg = 13'700.0;
  double gravity_mps2 = 9.81;
  double rolling_coeff = 0.0064;
  double drag_coeff = 0.7;
  double frontal_area_m2 = 8.0;
  double air_density_kgm3 = 1.2;
  double efficiency = 1.0;
  double battery_capacity_ws = 2.5e8;
  double soc_min_frac = 0.1;
  double soc_max_frac = 0.8;

  /// Throws ValidationError when a field is out of range.
  void validate() const;
};

struct RoadPath {
  std::vector<std::size_t> edges;  // indices into RoadGraph::edges()
  double total_time_s = 0.0;
  double total_energy_ws = 0.0;
};

/// Energy for traversing `edge` at its speed limit, in watt-seconds.
double edge_energy(const RoadEdge& edge, const VehicleParams& vehicle);

double edge_travel_time(const RoadEdge& edge);

/// Haversine distance in metres.
double great_circle_m(double lat1, double lon1, double lat2, double lon2);

/// Lower bound on travel time between two nodes at speed `v_max`.
double beeline_heuristic(const RoadNode& a, const RoadNode& b, double v_max);

/// Immutable validated road network. Nodes keep their file order; the
/// index of a node is its position in nodes().
class RoadGraph {
 public:
  /// Validates ids, coordinates, endpoints, lengths and speeds.
  RoadGraph(std::vector<RoadNode> nodes, std::vector<RoadEdge> edges);

  std::span<const RoadNode> nodes() const { return nodes_; }
  std::span<const RoadEdge> edges() const { return edges_; }
  const search::Digraph& topology() const { return topology_; }

  std::optional<std::size_t> index_of(NodeId id) const;
  std::size_t require_index(NodeId id) const;

  /// Node indices carrying a charger, ordered by node id.
  std::span<const std::size_t> charger_indices() const { return chargers_; }

  /// Largest speed limit in the network (heuristic speed bound).
  double max_speed_mps() const noexcept { return max_speed_; }

  std::vector<double> travel_times() const;
  std::vector<double> energies(const VehicleParams& vehicle) const;

  /// Totals summed in path order.
  RoadPath make_path(std::vector<std::size_t> edges, const VehicleParams& vehicle) const;

 private:
  std::vector<RoadNode> nodes_;
  std::vector<RoadEdge> edges_;
  std::unordered_map<NodeId, std::size_t> index_;
  std::vector<std::size_t> chargers_;
  search::Digraph topology_;
  double max_speed_ = 0.0;
};

/// Shortest travel-time path between two road nodes with the beeline heuristic.
RoadPath fastest_path(const RoadGraph& graph, NodeId from, NodeId to,
                      const VehicleParams& vehicle);

/// Parses the nodes/edges CSV pair. Chargers below kMinChargerPowerW lose
/// their charger but keep the node; repeated rows for the same id at the same
/// coordinates are merged keeping the highest-power charger.
RoadGraph load_instance(const std::filesystem::path& nodes_file,
                        const std::filesystem::path& edges_file);

void save_instance(const RoadGraph& graph, const std::filesystem::path& nodes_file,
                   const std::filesystem::path& edges_file);

std::string nodes_csv(std::span<const RoadNode> nodes);
std::string edges_csv(std::span<const RoadEdge> edges);

}  // namespace evbandit::road
