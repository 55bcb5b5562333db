#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "evbandit/bandit.hpp"
#include "evbandit/environment.hpp"
#include "evbandit/feasibility.hpp"
#include "evbandit/road_graph.hpp"

namespace evbandit::experiment {

/// Random geometric road network parameters.
struct GeneratorSpec {
  std::size_t node_count = 300;
  double charger_fraction = 0.2;
  double lat0 = 58.0;
  double lon0 = 12.0;
  double extent_lat_deg = 1.6;
  double extent_lon_deg = 2.8;
  double connection_radius_m = 0.0;  // 0 picks a radius for mean degree 2 ln n
  double speed_min_mps = 16.0;
  double speed_max_mps = 30.0;
  std::vector<double> max_power_choices_w{50'000.0, 150'000.0, 350'000.0};
  std::uint64_t seed = 1;

  void validate() const;
};

struct GeneratedInstance {
  std::vector<road::RoadNode> nodes;
  std::vector<road::RoadEdge> edges;
  road::NodeId source = 0;  // node nearest the south-west corner
  road::NodeId target = 0;  // node nearest the north-east corner
};

/// Deterministic per seed; retries disconnected draws up to 32 times, then
/// throws GenerationFailure.
GeneratedInstance generate_instance(const GeneratorSpec& spec);

struct ExperimentConfig {
  // Instance: CSV files, or the generator when nodes_file is empty.
  std::filesystem::path nodes_file;
  std::filesystem::path edges_file;
  std::filesystem::path feasibility_stations_file;  // optional preprocessing cache
  std::filesystem::path feasibility_edges_file;
  std::optional<road::NodeId> source;
  std::optional<road::NodeId> target;
  GeneratorSpec generator;

  road::VehicleParams vehicle;
  environment::Priors priors;  // charge prior carries the deficit scale

  std::int64_t horizon = 1000;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::vector<bandit::PolicyKind> policies{std::begin(bandit::kAllPolicies),
                                           std::end(bandit::kAllPolicies)};
  bool truncation = true;
  /// Replace the priors by near point masses at each seed's truth.
  bool oracle_priors = false;
  double oracle_concentration = 1e8;
  unsigned jobs = 1;
  std::filesystem::path output_dir = "out";

  /// Throws ConfigError on invalid settings; returns advisory warnings.
  std::vector<std::string> validate() const;
};

/// Parses an INI file with [instance], [generator], [vehicle], [prior] and
/// [experiment] sections. Relative paths resolve against the file's folder.
ExperimentConfig load_config(const std::filesystem::path& file);

/// Applies one `section.key = value` setting; throws ConfigError on unknown keys.
void apply_setting(ExperimentConfig& cfg, const std::string& section, const std::string& key,
                   const std::string& value, const std::filesystem::path& base_dir = {});

std::vector<std::uint64_t> parse_seed_list(const std::string& text);
std::vector<bandit::PolicyKind> parse_policy_list(const std::string& text);

/// Road graph plus trip terminals resolved from the config.
struct Instance {
  road::RoadGraph road;
  road::NodeId source;
  road::NodeId target;
};

Instance load_or_generate_instance(const ExperimentConfig& cfg);

/// Charger-only feasibility graph, read from the cache files when present.
feasibility::FeasibilityGraph preprocess(const ExperimentConfig& cfg, const Instance& instance);

/// Feasibility graph with terminals connected, ready for the bandit loop.
feasibility::FeasibilityGraph prepare_trip_graph(const ExperimentConfig& cfg,
                                                 const Instance& instance);

struct RunResult {
  std::uint64_t seed = 0;
  bandit::PolicyKind policy = bandit::PolicyKind::greedy;
  environment::RegretTrace trace;
  std::vector<std::optional<posteriors::StationBelief>> beliefs;
  std::vector<bool> explored;  // per iteration
  double optimal_loss = 0.0;
};

/// One (seed, policy) run of `horizon` iterations against the seed's truth.
RunResult run_single(const ExperimentConfig& cfg, const feasibility::FeasibilityGraph& graph,
                     std::uint64_t seed, bandit::PolicyKind policy);

/// All (seed, policy) runs; results ordered by seed, then policy order.
std::vector<RunResult> run_all(const ExperimentConfig& cfg,
                               const feasibility::FeasibilityGraph& graph);

std::string trace_file_name(bandit::PolicyKind policy, std::uint64_t seed);
std::string posterior_file_name(bandit::PolicyKind policy, std::uint64_t seed);

/// `station_id,queue_alpha,queue_beta,charge_ln_pi,charge_gamma,charge_xi,map_fallback`
std::string posterior_snapshot_csv(const feasibility::FeasibilityGraph& graph,
                                   const RunResult& result);

/// Runs everything and writes trace and posterior snapshot files.
std::vector<std::filesystem::path> run_experiment(const ExperimentConfig& cfg,
                                                  const std::filesystem::path& out_dir);

struct PolicySummary {
  std::string policy;
  std::size_t runs = 0;
  std::int64_t horizon = 0;
  double mean_final = 0.0;
  double std_final = 0.0;            // sample standard deviation, 0 for one run
  std::vector<double> mean_cumulative;  // per t over the common horizon
};

/// Reads every trace_*.csv in `trace_dir`. Throws EmptyInput when none exist.
std::vector<PolicySummary> summarize(const std::filesystem::path& trace_dir);

std::string summary_csv(const std::vector<PolicySummary>& summaries);

/// Line chart of mean cumulative regret against t, 800x600 viewBox.
std::string regret_svg(const std::vector<PolicySummary>& summaries);

/// Writes summary.csv and regret.svg into out_dir.
std::vector<std::filesystem::path> report(const std::filesystem::path& trace_dir,
                                          const std::filesystem::path& out_dir);

}  // namespace evbandit::experiment
