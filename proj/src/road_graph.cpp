#include "evbandit/road_graph.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "evbandit/csv.hpp"
#include "evbandit/errors.hpp"

namespace evbandit::road {

namespace {

double radians(double deg) { return deg * std::numbers::pi / 180.0; }

const std::vector<std::string> kNodesHeader{"id", "lat", "lon", "max_power_w", "min_power_w"};
const std::vector<std::string> kEdgesHeader{"from", "to", "length_m", "speed_mps"};

}  // namespace

void VehicleParams::validate() const {
  const double positive[] = {mass_kg,          gravity_mps2,     rolling_coeff,
                             drag_coeff,       frontal_area_m2,  air_density_kgm3,
                             efficiency,       battery_capacity_ws};
  for (const double v : positive) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ValidationError("vehicle parameters must be positive and finite");
    }
  }
  if (!(soc_min_frac >= 0.0 && soc_min_frac < soc_max_frac && soc_max_frac <= 1.0)) {
    throw ValidationError("vehicle state-of-charge window must satisfy 0 <= min < max <= 1");
  }
}

double edge_energy(const RoadEdge& edge, const VehicleParams& vehicle) {
  const double d = edge.length_m;
  const double v = edge.speed_mps;
  const double rolling = vehicle.mass_kg * vehicle.gravity_mps2 * vehicle.rolling_coeff * d;
  const double drag =
      0.5 * vehicle.drag_coeff * vehicle.frontal_area_m2 * vehicle.air_density_kgm3 * d * v * v;
  return (rolling + drag) / vehicle.efficiency;
}

double edge_travel_time(const RoadEdge& edge) { return edge.length_m / edge.speed_mps; }

double great_circle_m(double lat1, double lon1, double lat2, double lon2) {
  const double phi1 = radians(lat1);
  const double phi2 = radians(lat2);
  const double dphi = radians(lat2 - lat1);
  const double dlambda = radians(lon2 - lon1);
  const double s = std::sin(dphi / 2.0);
  const double t = std::sin(dlambda / 2.0);
  const double a = s * s + std::cos(phi1) * std::cos(phi2) * t * t;
  return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(a)));
}

double beeline_heuristic(const RoadNode& a, const RoadNode& b, double v_max) {
  return great_circle_m(a.lat, a.lon, b.lat, b.lon) / v_max;
}

RoadGraph::RoadGraph(std::vector<RoadNode> nodes, std::vector<RoadEdge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
  index_.reserve(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const RoadNode& n = nodes_[i];
    if (!index_.emplace(n.id, i).second) {
      throw ValidationError("duplicate node id " + std::to_string(n.id));
    }
    if (!(n.lat >= -90.0 && n.lat <= 90.0 && n.lon >= -180.0 && n.lon <= 180.0)) {
      throw ValidationError("node " + std::to_string(n.id) + " has coordinates out of range");
    }
    if (n.charger) {
      const auto& c = *n.charger;
      if (!(c.min_power_w > 0.0 && c.min_power_w <= c.max_power_w) ||
          !std::isfinite(c.max_power_w)) {
        throw ValidationError("node " + std::to_string(n.id) +
                              " charger needs 0 < min_power_w <= max_power_w");
      }
    }
  }

  std::vector<std::pair<std::size_t, std::size_t>> arcs;
  arcs.reserve(edges_.size());
  for (const RoadEdge& e : edges_) {
    const auto from = index_of(e.from);
    const auto to = index_of(e.to);
    if (!from) throw ValidationError("edge references unknown node id " + std::to_string(e.from));
    if (!to) throw ValidationError("edge references unknown node id " + std::to_string(e.to));
    if (!(e.length_m > 0.0) || !std::isfinite(e.length_m)) {
      throw ValidationError("edge " + std::to_string(e.from) + "->" + std::to_string(e.to) +
                            " has nonpositive length");
    }
    if (!(e.speed_mps > 0.0) || !std::isfinite(e.speed_mps)) {
      throw ValidationError("edge " + std::to_string(e.from) + "->" + std::to_string(e.to) +
                            " has nonpositive speed");
    }
    max_speed_ = std::max(max_speed_, e.speed_mps);
    arcs.emplace_back(*from, *to);
  }
  topology_ = search::Digraph(nodes_.size(), std::move(arcs));

  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].charger) chargers_.push_back(i);
  }
  std::sort(chargers_.begin(), chargers_.end(),
            [this](std::size_t a, std::size_t b) { return nodes_[a].id < nodes_[b].id; });
}

std::optional<std::size_t> RoadGraph::index_of(NodeId id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t RoadGraph::require_index(NodeId id) const {
  const auto idx = index_of(id);
  if (!idx) throw ValidationError("unknown node id " + std::to_string(id));
  return *idx;
}

std::vector<double> RoadGraph::travel_times() const {
  std::vector<double> out;
  out.reserve(edges_.size());
  for (const auto& e : edges_) out.push_back(edge_travel_time(e));
  return out;
}

std::vector<double> RoadGraph::energies(const VehicleParams& vehicle) const {
  std::vector<double> out;
  out.reserve(edges_.size());
  for (const auto& e : edges_) out.push_back(edge_energy(e, vehicle));
  return out;
}

RoadPath RoadGraph::make_path(std::vector<std::size_t> edges, const VehicleParams& vehicle) const {
  RoadPath path;
  for (const std::size_t e : edges) {
    path.total_time_s += edge_travel_time(edges_.at(e));
    path.total_energy_ws += edge_energy(edges_[e], vehicle);
  }
  path.edges = std::move(edges);
  return path;
}

RoadPath fastest_path(const RoadGraph& graph, NodeId from, NodeId to,
                      const VehicleParams& vehicle) {
  const std::size_t source = graph.require_index(from);
  const std::size_t target = graph.require_index(to);
  const auto weights = graph.travel_times();
  const RoadNode& goal = graph.nodes()[target];
  const double v_max = graph.max_speed_mps();
  auto found = search::a_star(graph.topology(), source, target, weights,
                              [&](std::size_t n) {
                                return beeline_heuristic(graph.nodes()[n], goal, v_max);
                              });
  return graph.make_path(std::move(found.arcs), vehicle);
}

RoadGraph load_instance(const std::filesystem::path& nodes_file,
                        const std::filesystem::path& edges_file) {
  const auto node_table = io::read_csv(nodes_file);
  io::expect_header(node_table, kNodesHeader);

  std::vector<RoadNode> nodes;
  std::unordered_map<NodeId, std::size_t> seen;
  for (const auto& row : node_table.rows) {
    RoadNode node;
    node.id = io::parse_int(node_table, row, 0);
    node.lat = io::parse_double(node_table, row, 1);
    node.lon = io::parse_double(node_table, row, 2);
    const bool has_max = !row.fields[3].empty();
    const bool has_min = !row.fields[4].empty();
    if (has_min && !has_max) {
      throw ParseError(node_table.source, row.line, "min_power_w given without max_power_w");
    }
    if (has_max) {
      ChargerSpec spec;
      spec.max_power_w = io::parse_double(node_table, row, 3);
      spec.min_power_w =
          has_min ? io::parse_double(node_table, row, 4) : spec.max_power_w / 2.0;
      if (spec.max_power_w >= kMinChargerPowerW) node.charger = spec;
    }

    const auto [it, fresh] = seen.emplace(node.id, nodes.size());
    if (fresh) {
      nodes.push_back(node);
      continue;
    }
    RoadNode& existing = nodes[it->second];
    if (existing.lat != node.lat || existing.lon != node.lon) {
      throw ValidationError("duplicate node id " + std::to_string(node.id) +
                            " with different coordinates (line " + std::to_string(row.line) + ")");
    }
    if (node.charger &&
        (!existing.charger || node.charger->max_power_w > existing.charger->max_power_w)) {
      existing.charger = node.charger;
    }
  }

  const auto edge_table = io::read_csv(edges_file);
  io::expect_header(edge_table, kEdgesHeader);
  std::vector<RoadEdge> edges;
  edges.reserve(edge_table.rows.size());
  for (const auto& row : edge_table.rows) {
    edges.push_back(RoadEdge{io::parse_int(edge_table, row, 0), io::parse_int(edge_table, row, 1),
                             io::parse_double(edge_table, row, 2),
                             io::parse_double(edge_table, row, 3)});
  }
  return RoadGraph(std::move(nodes), std::move(edges));
}

std::string nodes_csv(std::span<const RoadNode> nodes) {
  std::string out = "id,lat,lon,max_power_w,min_power_w\n";
  for (const auto& n : nodes) {
    out += std::to_string(n.id) + ',' + io::format_double(n.lat) + ',' + io::format_double(n.lon);
    if (n.charger) {
      out += ',' + io::format_double(n.charger->max_power_w) + ',' +
             io::format_double(n.charger->min_power_w);
    } else {
      out += ",,";
    }
    out += '\n';
  }
  return out;
}

std::string edges_csv(std::span<const RoadEdge> edges) {
  std::string out = "from,to,length_m,speed_mps\n";
  for (const auto& e : edges) {
    out += std::to_string(e.from) + ',' + std::to_string(e.to) + ',' +
           io::format_double(e.length_m) + ',' + io::format_double(e.speed_mps) + '\n';
  }
  return out;
}

void save_instance(const RoadGraph& graph, const std::filesystem::path& nodes_file,
                   const std::filesystem::path& edges_file) {
  io::write_file_atomic(nodes_file, nodes_csv(graph.nodes()));
  io::write_file_atomic(edges_file, edges_csv(graph.edges()));
}

}  // namespace evbandit::road
