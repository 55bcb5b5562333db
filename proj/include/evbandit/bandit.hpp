#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "evbandit/environment.hpp"
#include "evbandit/feasibility.hpp"
#include "evbandit/numerics.hpp"
#include "evbandit/posteriors.hpp"

namespace evbandit::bandit {

enum class PolicyKind { greedy, epsilon_greedy, thompson_sampling, bayes_ucb };

inline constexpr PolicyKind kAllPolicies[] = {PolicyKind::greedy, PolicyKind::epsilon_greedy,
                                              PolicyKind::thompson_sampling,
                                              PolicyKind::bayes_ucb};

/// Stable identifier used in file names and CSV columns.
std::string_view policy_name(PolicyKind kind);
/// Short label for plots and tables (GR, E-GR, TS, B-UCB).
std::string_view policy_label(PolicyKind kind);
/// Accepts the identifier or the label, case-insensitive.
std::optional<PolicyKind> parse_policy(std::string_view name);

/// Exploration probability of epsilon-greedy at iteration t: 1/sqrt(t).
double exploration_probability(std::int64_t t);

struct StationEstimate {
  double queue_s = 0.0;
  double power_w = 0.0;
};

struct EdgeWeightEstimate {
  std::size_t edge = 0;
  double tau_hat_s = 0.0;
};

struct Selection {
  std::vector<std::size_t> edges;
  bool explored = false;
  std::optional<std::size_t> random_station;
};

/// Per-iteration learner: station posteriors, iteration counter and the
/// estimate rule of one policy kind. Iterations start at t = 1.
class Policy {
 public:
  /// Every charging station starts from the same priors.
  Policy(PolicyKind kind, const feasibility::FeasibilityGraph& graph,
         const environment::Priors& priors);

  /// Explicit per-station beliefs (one per station index; nullopt where the
  /// station has no charger).
  Policy(PolicyKind kind, std::vector<std::optional<posteriors::StationBelief>> beliefs);

  PolicyKind kind() const noexcept { return kind_; }
  std::int64_t t() const noexcept { return t_; }
  std::size_t explorations() const noexcept { return explorations_; }

  std::span<const std::optional<posteriors::StationBelief>> beliefs() const { return beliefs_; }
  posteriors::StationBelief& belief(std::size_t station);

  /// Station-level estimates for every charger under the policy's rule.
  std::vector<std::optional<StationEstimate>> estimate_stations(
      const feasibility::FeasibilityGraph& graph, numerics::Rng& rng);

  /// One estimate per feasibility edge; station estimates are computed once
  /// and shared by all edges into that station.
  std::vector<EdgeWeightEstimate> estimate_weights(const feasibility::FeasibilityGraph& graph,
                                                   numerics::Rng& rng);

  /// Path for the current iteration (A* over the estimated weights, or the
  /// epsilon-greedy detour through a random station).
  Selection select_path(const feasibility::FeasibilityGraph& graph, numerics::Rng& rng);

  /// Semi-bandit update from per-edge feedback of the traveled path; t += 1.
  void observe(const feasibility::FeasibilityGraph& graph, std::span<const std::size_t> path,
               std::span<const environment::Feedback> feedback);

 private:
  PolicyKind kind_;
  std::vector<std::optional<posteriors::StationBelief>> beliefs_;
  std::int64_t t_ = 1;
  std::size_t explorations_ = 0;
};

/// tau_path + queue + energy / power at the head, or tau_path alone when the
/// head does not charge.
double edge_weight(const feasibility::FeasibilityGraph& graph, std::size_t edge,
                   const std::optional<StationEstimate>& head);

/// Least-weight path between two stations with the beeline heuristic.
search::SearchPath shortest_feasible_path(const feasibility::FeasibilityGraph& graph,
                                          std::size_t from, std::size_t to,
                                          std::span<const double> weights);

/// Station ids along an edge sequence, starting at the first tail.
std::vector<road::NodeId> station_ids(const feasibility::FeasibilityGraph& graph,
                                      std::span<const std::size_t> edges);

}  // namespace evbandit::bandit
