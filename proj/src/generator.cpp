#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "evbandit/errors.hpp"
#include "evbandit/experiment.hpp"
#include "evbandit/numerics.hpp"

namespace evbandit::experiment {

namespace {

constexpr int kMaxAttempts = 32;
constexpr double kMetresPerDegree = road::kEarthRadiusM * std::numbers::pi / 180.0;

bool connected(std::size_t n, const std::vector<road::RoadEdge>& edges) {
  std::vector<std::vector<std::size_t>> adj(n);
  for (const auto& e : edges) {
    adj[static_cast<std::size_t>(e.from - 1)].push_back(static_cast<std::size_t>(e.to - 1));
  }
  std::vector<char> seen(n, 0);
  std::vector<std::size_t> stack{0};
  seen[0] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    const auto u = stack.back();
    stack.pop_back();
    for (const auto v : adj[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        ++count;
        stack.push_back(v);
      }
    }
  }
  return count == n;
}

road::NodeId nearest(const std::vector<road::RoadNode>& nodes, double lat, double lon) {
  const auto it = std::min_element(nodes.begin(), nodes.end(), [&](const auto& a, const auto& b) {
    return road::great_circle_m(a.lat, a.lon, lat, lon) <
           road::great_circle_m(b.lat, b.lon, lat, lon);
  });
  return it->id;
}

}  // namespace

void GeneratorSpec::validate() const {
  if (node_count < 2) throw ValidationError("generator needs at least 2 nodes");
  if (!(charger_fraction >= 0.0 && charger_fraction <= 1.0)) {
    throw ValidationError("charger_fraction must lie in [0, 1]");
  }
  if (!(extent_lat_deg > 0.0 && extent_lon_deg > 0.0)) {
    throw ValidationError("generator extent must be positive");
  }
  if (!(lat0 >= -90.0 && lat0 + extent_lat_deg <= 90.0 && lon0 >= -180.0 &&
        lon0 + extent_lon_deg <= 180.0)) {
    throw ValidationError("generator extent leaves the coordinate range");
  }
  if (!(connection_radius_m >= 0.0)) throw ValidationError("connection radius must be >= 0");
  if (!(speed_min_mps > 0.0 && speed_min_mps <= speed_max_mps)) {
    throw ValidationError("generator speeds need 0 < min <= max");
  }
  if (max_power_choices_w.empty()) throw ValidationError("max_power_choices_w is empty");
  for (const double p : max_power_choices_w) {
    if (!(p > 0.0)) throw ValidationError("charger powers must be positive");
  }
}

GeneratedInstance generate_instance(const GeneratorSpec& spec) {
  spec.validate();
  const std::size_t n = spec.node_count;
  const double mid_lat = (spec.lat0 + 0.5 * spec.extent_lat_deg) * std::numbers::pi / 180.0;
  const double area_m2 = spec.extent_lat_deg * kMetresPerDegree * spec.extent_lon_deg *
                         kMetresPerDegree * std::cos(mid_lat);
  // Mean degree 2 ln n keeps the draw connected with high probability.
  const double mean_degree = std::max(6.0, 2.0 * std::log(static_cast<double>(n)));
  const double radius = spec.connection_radius_m > 0.0
                            ? spec.connection_radius_m
                            : std::sqrt(mean_degree * area_m2 /
                                        (std::numbers::pi * static_cast<double>(n)));
  const numerics::Rng root(spec.seed);

  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    numerics::Rng rng = root.child({static_cast<std::uint64_t>(attempt)});
    GeneratedInstance inst;
    inst.nodes.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      road::RoadNode node;
      node.id = static_cast<road::NodeId>(i + 1);
      node.lat = spec.lat0 + rng.uniform() * spec.extent_lat_deg;
      node.lon = spec.lon0 + rng.uniform() * spec.extent_lon_deg;
      inst.nodes.push_back(node);
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const auto& a = inst.nodes[i];
        const auto& b = inst.nodes[j];
        const double d = road::great_circle_m(a.lat, a.lon, b.lat, b.lon);
        if (d > radius || d == 0.0) continue;
        // Roads are longer than the beeline.
        const double length = d * (1.05 + 0.25 * rng.uniform());
        const double speed =
            spec.speed_min_mps + rng.uniform() * (spec.speed_max_mps - spec.speed_min_mps);
        inst.edges.push_back(road::RoadEdge{a.id, b.id, length, speed});
        inst.edges.push_back(road::RoadEdge{b.id, a.id, length, speed});
      }
    }
    if (!connected(n, inst.edges)) continue;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.uniform_index(i + 1)]);
    const auto chargers = static_cast<std::size_t>(
        std::llround(spec.charger_fraction * static_cast<double>(n)));
    for (std::size_t k = 0; k < chargers; ++k) {
      const double p =
          spec.max_power_choices_w[rng.uniform_index(spec.max_power_choices_w.size())];
      inst.nodes[order[k]].charger = road::ChargerSpec{p, p / 2.0};
    }

    inst.source = nearest(inst.nodes, spec.lat0, spec.lon0);
    inst.target =
        nearest(inst.nodes, spec.lat0 + spec.extent_lat_deg, spec.lon0 + spec.extent_lon_deg);
    return inst;
  }
  throw GenerationFailure("no connected road network after 32 attempts; increase the "
                          "connection radius or node count");
}

}  // namespace evbandit::experiment
