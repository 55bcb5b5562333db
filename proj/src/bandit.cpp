#include "evbandit/bandit.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "evbandit/errors.hpp"

namespace evbandit::bandit {

namespace {

// Deficits at or below zero (power at the rated maximum) enter the update
// at this floor so the log stays finite.
constexpr double kMinDeficitW = 1e-9;

constexpr int kExplorationRetries = 16;

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

}  // namespace

std::string_view policy_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::greedy: return "greedy";
    case PolicyKind::epsilon_greedy: return "epsilon_greedy";
    case PolicyKind::thompson_sampling: return "thompson_sampling";
    case PolicyKind::bayes_ucb: return "bayes_ucb";
  }
  return "unknown";
}

std::string_view policy_label(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::greedy: return "GR";
    case PolicyKind::epsilon_greedy: return "E-GR";
    case PolicyKind::thompson_sampling: return "TS";
    case PolicyKind::bayes_ucb: return "B-UCB";
  }
  return "?";
}

std::optional<PolicyKind> parse_policy(std::string_view name) {
  for (const PolicyKind kind : kAllPolicies) {
    if (iequals(name, policy_name(kind)) || iequals(name, policy_label(kind))) return kind;
  }
  return std::nullopt;
}

double exploration_probability(std::int64_t t) {
  if (t < 1) throw DomainError("iteration index starts at 1");
  return 1.0 / std::sqrt(static_cast<double>(t));
}

double edge_weight(const feasibility::FeasibilityGraph& graph, std::size_t edge,
                   const std::optional<StationEstimate>& head) {
  const auto& e = graph.edges()[edge];
  if (!graph.charges_at_head(edge)) return e.path_time_s;
  return e.path_time_s + head->queue_s + e.path_energy_ws / head->power_w;
}

search::SearchPath shortest_feasible_path(const feasibility::FeasibilityGraph& graph,
                                          std::size_t from, std::size_t to,
                                          std::span<const double> weights) {
  const auto& goal = graph.stations()[to];
  const double v_max = graph.max_speed_mps();
  return search::a_star(graph.topology(), from, to, weights, [&](std::size_t s) {
    if (!(v_max > 0.0)) return 0.0;
    const auto& st = graph.stations()[s];
    return road::great_circle_m(st.lat, st.lon, goal.lat, goal.lon) / v_max;
  });
}

std::vector<road::NodeId> station_ids(const feasibility::FeasibilityGraph& graph,
                                      std::span<const std::size_t> edges) {
  std::vector<road::NodeId> ids;
  if (edges.empty()) return ids;
  ids.push_back(graph.stations()[graph.edges()[edges.front()].from].id);
  for (const std::size_t e : edges) ids.push_back(graph.stations()[graph.edges()[e].to].id);
  return ids;
}

Policy::Policy(PolicyKind kind, const feasibility::FeasibilityGraph& graph,
               const environment::Priors& priors)
    : kind_(kind) {
  beliefs_.reserve(graph.stations().size());
  for (const auto& station : graph.stations()) {
    if (station.charger) {
      beliefs_.emplace_back(posteriors::StationBelief(priors.queue, priors.charge));
    } else {
      beliefs_.emplace_back(std::nullopt);
    }
  }
}

Policy::Policy(PolicyKind kind, std::vector<std::optional<posteriors::StationBelief>> beliefs)
    : kind_(kind), beliefs_(std::move(beliefs)) {}

posteriors::StationBelief& Policy::belief(std::size_t station) {
  auto& b = beliefs_.at(station);
  if (!b) throw DomainError("station " + std::to_string(station) + " has no charger");
  return *b;
}

std::vector<std::optional<StationEstimate>> Policy::estimate_stations(
    const feasibility::FeasibilityGraph& graph, numerics::Rng& rng) {
  if (beliefs_.size() != graph.stations().size()) {
    throw DomainError("policy state does not cover the feasibility graph");
  }
  std::vector<std::optional<StationEstimate>> out(beliefs_.size());
  for (std::size_t s = 0; s < beliefs_.size(); ++s) {
    if (!beliefs_[s]) continue;
    auto& b = *beliefs_[s];
    const auto& charger = *graph.stations()[s].charger;
    StationEstimate est;
    switch (kind_) {
      case PolicyKind::greedy:
      case PolicyKind::epsilon_greedy:
        est.queue_s = posteriors::queue_map_expected_time(b.queue());
        est.power_w = b.map_power(charger);
        break;
      case PolicyKind::thompson_sampling:
        est.queue_s = posteriors::queue_sample_expected_time(b.queue(), rng);
        est.power_w = b.sample_power(rng, charger);
        break;
      case PolicyKind::bayes_ucb:
        est.queue_s = posteriors::queue_ucb_expected_time(b.queue(), t_);
        est.power_w = b.ucb_power(t_, charger);
        break;
    }
    out[s] = est;
  }
  return out;
}

std::vector<EdgeWeightEstimate> Policy::estimate_weights(
    const feasibility::FeasibilityGraph& graph, numerics::Rng& rng) {
  const auto stations = estimate_stations(graph, rng);
  std::vector<EdgeWeightEstimate> out;
  out.reserve(graph.edges().size());
  for (std::size_t e = 0; e < graph.edges().size(); ++e) {
    out.push_back(EdgeWeightEstimate{e, edge_weight(graph, e, stations[graph.edges()[e].to])});
  }
  return out;
}

Selection Policy::select_path(const feasibility::FeasibilityGraph& graph, numerics::Rng& rng) {
  if (!graph.source() || !graph.target()) {
    throw ValidationError("feasibility graph has no trip terminals");
  }
  const std::size_t src = *graph.source();
  const std::size_t trg = *graph.target();
  const auto estimates = estimate_weights(graph, rng);
  std::vector<double> weights(estimates.size());
  for (const auto& est : estimates) weights[est.edge] = est.tau_hat_s;

  Selection sel;
  if (kind_ == PolicyKind::epsilon_greedy && rng.bernoulli(exploration_probability(t_))) {
    for (int attempt = 0; attempt < kExplorationRetries; ++attempt) {
      const std::size_t via = rng.uniform_index(graph.stations().size());
      try {
        auto first = shortest_feasible_path(graph, src, via, weights);
        auto second = shortest_feasible_path(graph, via, trg, weights);
        sel.edges = std::move(first.arcs);
        sel.edges.insert(sel.edges.end(), second.arcs.begin(), second.arcs.end());
        sel.explored = true;
        sel.random_station = via;
        ++explorations_;
        return sel;
      } catch (const Unreachable&) {
        // resample
      }
    }
  }
  sel.edges = shortest_feasible_path(graph, src, trg, weights).arcs;
  return sel;
}

void Policy::observe(const feasibility::FeasibilityGraph& graph, std::span<const std::size_t> path,
                     std::span<const environment::Feedback> feedback) {
  if (path.size() != feedback.size()) {
    throw MismatchedFeedback("got feedback for " + std::to_string(feedback.size()) +
                             " edges, path has " + std::to_string(path.size()));
  }
  for (std::size_t i = 0; i < path.size(); ++i) {
    const std::size_t e = path[i];
    if (e >= graph.edges().size()) throw MismatchedFeedback("feedback for an unknown edge");
    if (!graph.charges_at_head(e)) continue;
    const auto& edge = graph.edges()[e];
    const auto& fb = feedback[i];
    auto& b = belief(edge.to);
    b.observe_queue(fb.queue_s);
    if (b.charge().deficit_scale > 0.0 && fb.charge_s > 0.0) {
      const double power = edge.path_energy_ws / fb.charge_s;
      const double deficit = graph.stations()[edge.to].charger->max_power_w - power;
      b.observe_deficit(std::max(deficit, kMinDeficitW));
    }
  }
  ++t_;
}

}  // namespace evbandit::bandit
