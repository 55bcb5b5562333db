#include "evbandit/feasibility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <tuple>
#include <unordered_map>

#include "evbandit/csv.hpp"
#include "evbandit/errors.hpp"

namespace evbandit::feasibility {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const std::vector<std::string> kStationsHeader{"id", "lat", "lon", "max_power_w", "min_power_w"};
const std::vector<std::string> kEdgesHeader{"from", "to", "path_time_s", "path_energy_ws"};

Station station_from(const road::RoadNode& node) {
  return Station{node.id, node.lat, node.lon, node.charger};
}

// Edges keyed by endpoint node ids, re-indexed once the station set is final.
struct RawEdge {
  road::NodeId from;
  road::NodeId to;
  double time_s;
  double energy_ws;
  std::optional<road::RoadPath> road_path;
};

FeasibilityGraph assemble(std::vector<Station> stations, std::vector<RawEdge> raw,
                          double window, double max_speed) {
  std::sort(stations.begin(), stations.end(),
            [](const Station& a, const Station& b) { return a.id < b.id; });
  std::unordered_map<road::NodeId, std::size_t> index;
  for (std::size_t i = 0; i < stations.size(); ++i) index.emplace(stations[i].id, i);
  std::sort(raw.begin(), raw.end(), [](const RawEdge& a, const RawEdge& b) {
    return std::tie(a.from, a.to) < std::tie(b.from, b.to);
  });
  std::vector<FeasibilityEdge> edges;
  edges.reserve(raw.size());
  for (auto& r : raw) {
    edges.push_back(FeasibilityEdge{index.at(r.from), index.at(r.to), r.time_s, r.energy_ws,
                                    std::move(r.road_path)});
  }
  return FeasibilityGraph(std::move(stations), std::move(edges), window, max_speed);
}

std::vector<std::size_t> trace(const road::RoadGraph& road, const FastestPaths& paths,
                               std::size_t target) {
  std::vector<std::size_t> edges;
  for (std::size_t v = target; paths.parent_edge[v] != search::npos;
       v = road.topology().tail(paths.parent_edge[v])) {
    edges.push_back(paths.parent_edge[v]);
  }
  std::reverse(edges.begin(), edges.end());
  return edges;
}

std::optional<road::RoadPath> maybe_path(const road::RoadGraph& road, const FastestPaths& paths,
                                         std::size_t target, bool retain) {
  if (!retain) return std::nullopt;
  road::RoadPath p;
  p.edges = trace(road, paths, target);
  p.total_time_s = paths.time_s[target];
  p.total_energy_ws = paths.energy_ws[target];
  return p;
}

}  // namespace

FeasibilityGraph::FeasibilityGraph(std::vector<Station> stations,
                                   std::vector<FeasibilityEdge> edges, double usable_window_ws,
                                   double max_speed_mps)
    : stations_(std::move(stations)),
      edges_(std::move(edges)),
      usable_window_ws_(usable_window_ws),
      max_speed_mps_(max_speed_mps) {
  std::vector<std::pair<std::size_t, std::size_t>> arcs;
  arcs.reserve(edges_.size());
  for (const auto& e : edges_) {
    if (e.from >= stations_.size() || e.to >= stations_.size()) {
      throw ValidationError("feasibility edge endpoint is not a station");
    }
    if (e.from == e.to) throw ValidationError("feasibility graph cannot contain self-loops");
    arcs.emplace_back(e.from, e.to);
  }
  topology_ = search::Digraph(stations_.size(), std::move(arcs));
}

std::optional<std::size_t> FeasibilityGraph::station_index(road::NodeId id) const {
  const auto it = std::lower_bound(stations_.begin(), stations_.end(), id,
                                   [](const Station& s, road::NodeId v) { return s.id < v; });
  if (it == stations_.end() || it->id != id) return std::nullopt;
  return static_cast<std::size_t>(it - stations_.begin());
}

void FeasibilityGraph::set_terminals(std::size_t source, std::size_t target) {
  if (source >= stations_.size() || target >= stations_.size()) {
    throw DomainError("terminal index out of range");
  }
  source_ = source;
  target_ = target;
}

bool FeasibilityGraph::charges_at_head(std::size_t edge) const {
  const std::size_t head = edges_.at(edge).to;
  return stations_[head].charger.has_value() && head != target_;
}

double FeasibilityGraph::heuristic_to_target(std::size_t station) const {
  if (!target_ || !(max_speed_mps_ > 0.0)) return 0.0;
  const Station& a = stations_[station];
  const Station& b = stations_[*target_];
  return road::great_circle_m(a.lat, a.lon, b.lat, b.lon) / max_speed_mps_;
}

double usable_window(const road::VehicleParams& vehicle) {
  return vehicle.soc_max_frac * vehicle.battery_capacity_ws -
         vehicle.soc_min_frac * vehicle.battery_capacity_ws;
}

FastestPaths fastest_paths_from(const road::RoadGraph& road, std::size_t source,
                                std::span<const double> times,
                                std::span<const double> energies) {
  const auto& graph = road.topology();
  const std::size_t n = graph.node_count();
  FastestPaths out{std::vector<double>(n, kInf), std::vector<double>(n, kInf),
                   std::vector<std::size_t>(n, search::npos)};
  auto node_id = [&](std::size_t i) { return road.nodes()[i].id; };

  using Key = std::tuple<double, double, road::NodeId, std::size_t>;
  std::priority_queue<Key, std::vector<Key>, std::greater<>> queue;
  std::vector<char> done(n, 0);
  out.time_s[source] = 0.0;
  out.energy_ws[source] = 0.0;
  queue.emplace(0.0, 0.0, node_id(source), source);
  while (!queue.empty()) {
    const auto [t, e, id, u] = queue.top();
    queue.pop();
    if (done[u]) continue;
    done[u] = 1;
    for (const std::size_t arc : graph.out_arcs(u)) {
      const std::size_t v = graph.head(arc);
      if (done[v]) continue;
      const double ct = t + times[arc];
      const double ce = e + energies[arc];
      bool better = std::tie(ct, ce) < std::tie(out.time_s[v], out.energy_ws[v]);
      if (!better && ct == out.time_s[v] && ce == out.energy_ws[v]) {
        better = node_id(u) < node_id(graph.tail(out.parent_edge[v]));
      }
      if (better) {
        out.time_s[v] = ct;
        out.energy_ws[v] = ce;
        out.parent_edge[v] = arc;
        queue.emplace(ct, ce, node_id(v), v);
      }
    }
  }
  return out;
}

FeasibilityGraph build_feasibility_graph(const road::RoadGraph& road,
                                         const road::VehicleParams& vehicle,
                                         BuildOptions options) {
  vehicle.validate();
  const double window = usable_window(vehicle);
  const auto times = road.travel_times();
  const auto energies = road.energies(vehicle);

  std::vector<Station> stations;
  std::vector<RawEdge> raw;
  for (const std::size_t s : road.charger_indices()) {
    stations.push_back(station_from(road.nodes()[s]));
    const FastestPaths paths = fastest_paths_from(road, s, times, energies);
    for (const std::size_t t : road.charger_indices()) {
      if (t == s || paths.time_s[t] == kInf || paths.energy_ws[t] > window) continue;
      raw.push_back(RawEdge{road.nodes()[s].id, road.nodes()[t].id, paths.time_s[t],
                            paths.energy_ws[t],
                            maybe_path(road, paths, t, options.retain_road_paths)});
    }
  }
  return assemble(std::move(stations), std::move(raw), window, road.max_speed_mps());
}

FeasibilityGraph connect_terminals(const FeasibilityGraph& graph, const road::RoadGraph& road,
                                   road::NodeId source, road::NodeId target,
                                   const road::VehicleParams& vehicle) {
  vehicle.validate();
  if (source == target) throw ValidationError("trip source and target must differ");
  const std::size_t src_road = road.require_index(source);
  const std::size_t trg_road = road.require_index(target);
  const double window = graph.usable_window_ws();
  const auto times = road.travel_times();
  const auto energies = road.energies(vehicle);

  std::vector<Station> stations(graph.stations().begin(), graph.stations().end());
  std::vector<RawEdge> raw;
  raw.reserve(graph.edges().size());
  for (const auto& e : graph.edges()) {
    raw.push_back(RawEdge{graph.stations()[e.from].id, graph.stations()[e.to].id, e.path_time_s,
                          e.path_energy_ws, e.road_path});
  }
  const bool src_known = graph.station_index(source).has_value();
  const bool trg_known = graph.station_index(target).has_value();
  const bool retain = std::any_of(graph.edges().begin(), graph.edges().end(),
                                  [](const FeasibilityEdge& e) { return e.road_path.has_value(); });
  auto feasible = [&](const FastestPaths& p, std::size_t t) {
    return p.time_s[t] != kInf && p.energy_ws[t] <= window;
  };

  if (!src_known) {
    // Departs fully charged: outgoing edges to every station and the target.
    const road::RoadNode& node = road.nodes()[src_road];
    stations.push_back(Station{node.id, node.lat, node.lon, std::nullopt});
    const FastestPaths paths = fastest_paths_from(road, src_road, times, energies);
    for (const auto& st : graph.stations()) {
      const std::size_t t = road.require_index(st.id);
      if (feasible(paths, t)) {
        raw.push_back(RawEdge{source, st.id, paths.time_s[t], paths.energy_ws[t],
                              maybe_path(road, paths, t, retain)});
      }
    }
    if (!trg_known && feasible(paths, trg_road)) {
      raw.push_back(RawEdge{source, target, paths.time_s[trg_road], paths.energy_ws[trg_road],
                            maybe_path(road, paths, trg_road, retain)});
    }
  }
  if (!trg_known) {
    const road::RoadNode& node = road.nodes()[trg_road];
    stations.push_back(Station{node.id, node.lat, node.lon, std::nullopt});
    for (const auto& st : graph.stations()) {
      const std::size_t s = road.require_index(st.id);
      const FastestPaths paths = fastest_paths_from(road, s, times, energies);
      if (feasible(paths, trg_road)) {
        raw.push_back(RawEdge{st.id, target, paths.time_s[trg_road], paths.energy_ws[trg_road],
                              maybe_path(road, paths, trg_road, retain)});
      }
    }
  }

  FeasibilityGraph out = assemble(std::move(stations), std::move(raw), window,
                                  road.max_speed_mps());
  const std::size_t src = *out.station_index(source);
  const std::size_t trg = *out.station_index(target);
  out.set_terminals(src, trg);
  if (out.topology().out_arcs(src).empty()) {
    throw IsolatedTerminal("source " + std::to_string(source) +
                           " has no feasible outgoing edge");
  }
  const bool has_incoming = std::any_of(out.edges().begin(), out.edges().end(),
                                        [&](const FeasibilityEdge& e) { return e.to == trg; });
  if (!has_incoming) {
    throw IsolatedTerminal("target " + std::to_string(target) + " has no feasible incoming edge");
  }
  return out;
}

void save_feasibility(const FeasibilityGraph& graph, const std::filesystem::path& stations_file,
                      const std::filesystem::path& edges_file) {
  std::vector<road::RoadNode> nodes;
  for (const auto& s : graph.stations()) nodes.push_back(road::RoadNode{s.id, s.lat, s.lon, s.charger});
  io::write_file_atomic(stations_file, road::nodes_csv(nodes));

  std::string out = "from,to,path_time_s,path_energy_ws\n";
  for (const auto& e : graph.edges()) {
    out += std::to_string(graph.stations()[e.from].id) + ',' +
           std::to_string(graph.stations()[e.to].id) + ',' + io::format_double(e.path_time_s) +
           ',' + io::format_double(e.path_energy_ws) + '\n';
  }
  io::write_file_atomic(edges_file, out);
}

FeasibilityGraph load_feasibility(const std::filesystem::path& stations_file,
                                  const std::filesystem::path& edges_file,
                                  double usable_window_ws, double max_speed_mps) {
  const auto st = io::read_csv(stations_file);
  io::expect_header(st, kStationsHeader);
  std::vector<Station> stations;
  for (const auto& row : st.rows) {
    Station s{io::parse_int(st, row, 0), io::parse_double(st, row, 1), io::parse_double(st, row, 2),
              std::nullopt};
    if (!row.fields[3].empty()) {
      s.charger = road::ChargerSpec{io::parse_double(st, row, 3),
                                    row.fields[4].empty() ? io::parse_double(st, row, 3) / 2.0
                                                          : io::parse_double(st, row, 4)};
    }
    stations.push_back(s);
  }
  std::unordered_map<road::NodeId, bool> known;
  for (const auto& s : stations) {
    if (!known.emplace(s.id, true).second) {
      throw ValidationError("duplicate station id " + std::to_string(s.id));
    }
  }

  const auto et = io::read_csv(edges_file);
  io::expect_header(et, kEdgesHeader);
  std::vector<RawEdge> raw;
  for (const auto& row : et.rows) {
    RawEdge r{io::parse_int(et, row, 0), io::parse_int(et, row, 1), io::parse_double(et, row, 2),
              io::parse_double(et, row, 3), std::nullopt};
    if (!known.count(r.from) || !known.count(r.to)) {
      throw ValidationError("feasibility edge on line " + std::to_string(row.line) +
                            " references an unknown station");
    }
    if (r.energy_ws > usable_window_ws) {
      throw ValidationError("feasibility edge on line " + std::to_string(row.line) +
                            " exceeds the usable battery window");
    }
    raw.push_back(std::move(r));
  }
  return assemble(std::move(stations), std::move(raw), usable_window_ws, max_speed_mps);
}

}  // namespace evbandit::feasibility
