#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evbandit/feasibility.hpp"
#include "evbandit/numerics.hpp"
#include "evbandit/posteriors.hpp"

namespace evbandit::environment {

struct Priors {
  posteriors::QueuePosterior queue;
  posteriors::ChargePosterior charge;  // its deficit_scale is the environment's scale too
};

/// Hidden parameters of one charging station.
struct StationTruth {
  double lambda_queue = 0.0;  // 1/s
  double alpha_charge = 0.0;
  double beta_charge = 0.0;
};

/// Ground truth for a feasibility graph, indexed by station index.
/// Stations without a charger have no entry.
struct TruthParams {
  std::vector<std::optional<StationTruth>> stations;
  double deficit_scale = 300.0;
  /// Truncate delivered power below the charger minimum (and clamp the mean
  /// power in the expected loss). When false the raw deficit is used and
  /// power is only kept strictly positive.
  bool truncate = true;
};

/// Draws every charger's parameters from the priors. Each station uses its
/// own child stream of `rng` keyed by node id. SamplerFailure propagates.
TruthParams draw_truth(const feasibility::FeasibilityGraph& graph, const Priors& priors,
                       numerics::Rng& rng, bool truncate = true);

struct Feedback {
  double queue_s = 0.0;
  double charge_s = 0.0;
};

/// Delivered power for a deficit draw z under the truncation rule.
double delivered_power(const road::ChargerSpec& charger, double deficit_scale, double z,
                       bool truncate);

/// One stochastic traversal of `edge`; zero queue and charge time when the
/// head does not charge (trip target).
Feedback sample_feedback(const TruthParams& truth, const feasibility::FeasibilityGraph& graph,
                         std::size_t edge, numerics::Rng& rng);

/// Mean power used by the expected loss.
double mean_power(const TruthParams& truth, const road::ChargerSpec& charger,
                  const StationTruth& station);

double expected_edge_loss(const TruthParams& truth, const feasibility::FeasibilityGraph& graph,
                          std::size_t edge);

double expected_path_loss(const TruthParams& truth, const feasibility::FeasibilityGraph& graph,
                          std::span<const std::size_t> edges);

struct OptimalPath {
  std::vector<std::size_t> edges;
  double expected_loss = 0.0;
};

/// Expected-loss optimal path between the graph's terminals.
OptimalPath optimal_expected_path(const TruthParams& truth,
                                  const feasibility::FeasibilityGraph& graph);

/// f(chosen) - f(optimal), with differences above -1e-9 relative floored to 0.
double regret_step(const TruthParams& truth, const feasibility::FeasibilityGraph& graph,
                   std::span<const std::size_t> chosen, double optimal_loss);

struct RegretRow {
  std::uint64_t seed = 0;
  std::string policy;
  std::int64_t t = 0;
  std::vector<road::NodeId> path;  // station ids visited, source first
  double instant_regret_s = 0.0;
  double cumulative_regret_s = 0.0;
};

class RegretTrace {
 public:
  void append(std::uint64_t seed, std::string policy, std::vector<road::NodeId> path,
              double instant_regret_s);

  std::span<const RegretRow> rows() const { return rows_; }
  double cumulative() const { return rows_.empty() ? 0.0 : rows_.back().cumulative_regret_s; }

  /// `seed,policy,t,instant_regret_s,cumulative_regret_s`
  std::string to_csv() const;
  static RegretTrace from_csv(const std::filesystem::path& file);

 private:
  std::vector<RegretRow> rows_;
};

}  // namespace evbandit::environment
