#include <algorithm>
#include <filesystem>
#include <future>
#include <sstream>
#include <thread>

#include "evbandit/csv.hpp"
#include "evbandit/errors.hpp"
#include "evbandit/experiment.hpp"

namespace evbandit::experiment {

namespace {

// Stream tags for Rng::child.
constexpr std::uint64_t kTruthTag = 0x7472757468ULL;
constexpr std::uint64_t kPolicyTag = 0x706f6c696379ULL;
constexpr std::uint64_t kFeedbackTag = 0x66656564ULL;

std::uint64_t policy_tag(bandit::PolicyKind kind) {
  return static_cast<std::uint64_t>(kind);
}

std::vector<std::optional<posteriors::StationBelief>> oracle_beliefs(
    const environment::TruthParams& truth, double deficit_scale, double concentration) {
  std::vector<std::optional<posteriors::StationBelief>> out(truth.stations.size());
  for (std::size_t s = 0; s < truth.stations.size(); ++s) {
    const auto& st = truth.stations[s];
    if (!st) continue;
    out[s].emplace(posteriors::QueuePosterior::point_mass(st->lambda_queue, concentration),
                   posteriors::ChargePosterior::point_mass(st->alpha_charge, st->beta_charge,
                                                           deficit_scale, concentration));
  }
  return out;
}

}  // namespace

Instance load_or_generate_instance(const ExperimentConfig& cfg) {
  if (!cfg.nodes_file.empty()) {
    return Instance{road::load_instance(cfg.nodes_file, cfg.edges_file), *cfg.source,
                    *cfg.target};
  }
  auto gen = generate_instance(cfg.generator);
  Instance inst{road::RoadGraph(std::move(gen.nodes), std::move(gen.edges)), gen.source,
                gen.target};
  if (cfg.source) inst.source = *cfg.source;
  if (cfg.target) inst.target = *cfg.target;
  return inst;
}

feasibility::FeasibilityGraph preprocess(const ExperimentConfig& cfg, const Instance& instance) {
  if (!cfg.feasibility_stations_file.empty() &&
      std::filesystem::exists(cfg.feasibility_stations_file) &&
      std::filesystem::exists(cfg.feasibility_edges_file)) {
    return feasibility::load_feasibility(cfg.feasibility_stations_file, cfg.feasibility_edges_file,
                                         feasibility::usable_window(cfg.vehicle),
                                         instance.road.max_speed_mps());
  }
  return feasibility::build_feasibility_graph(instance.road, cfg.vehicle);
}

feasibility::FeasibilityGraph prepare_trip_graph(const ExperimentConfig& cfg,
                                                 const Instance& instance) {
  const auto base = preprocess(cfg, instance);
  return feasibility::connect_terminals(base, instance.road, instance.source, instance.target,
                                        cfg.vehicle);
}

RunResult run_single(const ExperimentConfig& cfg, const feasibility::FeasibilityGraph& graph,
                     std::uint64_t seed, bandit::PolicyKind policy) {
  const numerics::Rng root(seed);
  numerics::Rng truth_rng = root.child({kTruthTag});
  const auto truth = environment::draw_truth(graph, cfg.priors, truth_rng, cfg.truncation);
  const auto optimum = environment::optimal_expected_path(truth, graph);

  bandit::Policy learner =
      cfg.oracle_priors
          ? bandit::Policy(policy, oracle_beliefs(truth, cfg.priors.charge.deficit_scale,
                                                  cfg.oracle_concentration))
          : bandit::Policy(policy, graph, cfg.priors);
  numerics::Rng policy_rng = root.child({kPolicyTag, policy_tag(policy)});

  // One feedback stream per station, shared in distribution across policies.
  const auto stations = graph.stations();
  std::vector<numerics::Rng> feedback_rng;
  feedback_rng.reserve(stations.size());
  for (const auto& st : stations) {
    feedback_rng.push_back(root.child({kFeedbackTag, static_cast<std::uint64_t>(st.id)}));
  }

  RunResult result;
  result.seed = seed;
  result.policy = policy;
  result.optimal_loss = optimum.expected_loss;
  result.explored.reserve(static_cast<std::size_t>(cfg.horizon));
  const std::string name(bandit::policy_name(policy));
  std::vector<environment::Feedback> feedback;
  for (std::int64_t t = 1; t <= cfg.horizon; ++t) {
    const auto selection = learner.select_path(graph, policy_rng);
    feedback.clear();
    for (const auto e : selection.edges) {
      const auto head = graph.edges()[e].to;
      feedback.push_back(environment::sample_feedback(truth, graph, e, feedback_rng[head]));
    }
    learner.observe(graph, selection.edges, feedback);
    const double r =
        environment::regret_step(truth, graph, selection.edges, optimum.expected_loss);
    result.trace.append(seed, name, bandit::station_ids(graph, selection.edges), r);
    result.explored.push_back(selection.explored);
  }
  const auto beliefs = learner.beliefs();
  result.beliefs.assign(beliefs.begin(), beliefs.end());
  return result;
}

std::vector<RunResult> run_all(const ExperimentConfig& cfg,
                               const feasibility::FeasibilityGraph& graph) {
  struct Job {
    std::uint64_t seed;
    bandit::PolicyKind policy;
  };
  std::vector<Job> jobs;
  for (const auto seed : cfg.seeds) {
    for (const auto p : cfg.policies) jobs.push_back({seed, p});
  }
  std::vector<RunResult> results(jobs.size());
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(cfg.jobs, jobs.size()));
  if (workers == 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      results[i] = run_single(cfg, graph, jobs[i].seed, jobs[i].policy);
    }
    return results;
  }
  // Strided assignment; every result lands in its fixed slot.
  std::vector<std::future<void>> pending;
  for (std::size_t w = 0; w < workers; ++w) {
    pending.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < jobs.size(); i += workers) {
        results[i] = run_single(cfg, graph, jobs[i].seed, jobs[i].policy);
      }
    }));
  }
  for (auto& f : pending) f.get();
  return results;
}

std::string trace_file_name(bandit::PolicyKind policy, std::uint64_t seed) {
  return "trace_" + std::string(bandit::policy_name(policy)) + "_seed" + std::to_string(seed) +
         ".csv";
}

std::string posterior_file_name(bandit::PolicyKind policy, std::uint64_t seed) {
  return "posteriors_" + std::string(bandit::policy_name(policy)) + "_seed" +
         std::to_string(seed) + ".csv";
}

std::string posterior_snapshot_csv(const feasibility::FeasibilityGraph& graph,
                                   const RunResult& result) {
  std::ostringstream out;
  out << "station_id,queue_alpha,queue_beta,charge_ln_pi,charge_gamma,charge_xi,map_fallback\n";
  const auto stations = graph.stations();
  for (std::size_t s = 0; s < result.beliefs.size(); ++s) {
    const auto& b = result.beliefs[s];
    if (!b) continue;
    out << stations[s].id << ',' << io::format_double(b->queue().alpha) << ','
        << io::format_double(b->queue().beta) << ',' << io::format_double(b->charge().ln_pi)
        << ',' << io::format_double(b->charge().gamma_p) << ','
        << io::format_double(b->charge().xi) << ',' << (b->map_fallback() ? 1 : 0) << '\n';
  }
  return out.str();
}

std::vector<std::filesystem::path> run_experiment(const ExperimentConfig& cfg,
                                                  const std::filesystem::path& out_dir) {
  cfg.validate();
  const auto instance = load_or_generate_instance(cfg);
  const auto graph = prepare_trip_graph(cfg, instance);
  const auto results = run_all(cfg, graph);
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;
  for (const auto& r : results) {
    auto trace = out_dir / trace_file_name(r.policy, r.seed);
    io::write_file_atomic(trace, r.trace.to_csv());
    written.push_back(std::move(trace));
    auto post = out_dir / posterior_file_name(r.policy, r.seed);
    io::write_file_atomic(post, posterior_snapshot_csv(graph, r));
    written.push_back(std::move(post));
  }
  return written;
}

}  // namespace evbandit::experiment
