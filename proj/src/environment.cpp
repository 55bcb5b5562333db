#include "evbandit/environment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "evbandit/csv.hpp"
#include "evbandit/errors.hpp"

namespace evbandit::environment {

namespace {

// Lower bound on delivered power when truncation is off.
constexpr double kMinPositivePowerW = 1.0;

const std::vector<std::string> kTraceHeader{"seed", "policy", "t", "instant_regret_s",
                                            "cumulative_regret_s"};

}  // namespace

TruthParams draw_truth(const feasibility::FeasibilityGraph& graph, const Priors& priors,
                       numerics::Rng& rng, bool truncate) {
  priors.queue.validate();
  priors.charge.validate();
  TruthParams truth;
  truth.deficit_scale = priors.charge.deficit_scale;
  truth.truncate = truncate;
  truth.stations.resize(graph.stations().size());

  const posteriors::ChargePosterior& prior = priors.charge;
  const double mode = posteriors::charge_mode_alpha(prior);

  for (std::size_t i = 0; i < graph.stations().size(); ++i) {
    const auto& station = graph.stations()[i];
    if (!station.charger) continue;
    numerics::Rng local = rng.child({static_cast<std::uint64_t>(station.id)});
    StationTruth st;
    st.lambda_queue = numerics::sample_gamma(local, priors.queue.alpha, priors.queue.beta);
    st.alpha_charge = posteriors::charge_sample_alpha(prior, local, mode);
    st.beta_charge = numerics::sample_gamma(local, prior.xi * st.alpha_charge, prior.gamma_p);
    truth.stations[i] = st;
  }
  return truth;
}

double delivered_power(const road::ChargerSpec& charger, double deficit_scale, double z,
                       bool truncate) {
  const double raw = charger.max_power_w - deficit_scale * z;
  return truncate ? std::max(charger.min_power_w, raw) : std::max(kMinPositivePowerW, raw);
}

Feedback sample_feedback(const TruthParams& truth, const feasibility::FeasibilityGraph& graph,
                         std::size_t edge, numerics::Rng& rng) {
  if (!graph.charges_at_head(edge)) return {};
  const auto& e = graph.edges()[edge];
  const auto& charger = *graph.stations()[e.to].charger;
  const auto& st = truth.stations.at(e.to).value();
  Feedback fb;
  fb.queue_s = numerics::sample_exponential(rng, st.lambda_queue);
  const double z = numerics::sample_gamma(rng, st.alpha_charge, st.beta_charge);
  fb.charge_s = e.path_energy_ws / delivered_power(charger, truth.deficit_scale, z, truth.truncate);
  return fb;
}

double mean_power(const TruthParams& truth, const road::ChargerSpec& charger,
                  const StationTruth& station) {
  const double raw =
      charger.max_power_w - truth.deficit_scale * station.alpha_charge / station.beta_charge;
  if (truth.truncate) return std::clamp(raw, charger.min_power_w, charger.max_power_w);
  return std::max(kMinPositivePowerW, raw);
}

double expected_edge_loss(const TruthParams& truth, const feasibility::FeasibilityGraph& graph,
                          std::size_t edge) {
  const auto& e = graph.edges()[edge];
  if (!graph.charges_at_head(edge)) return e.path_time_s;
  const auto& st = truth.stations.at(e.to).value();
  const auto& charger = *graph.stations()[e.to].charger;
  return e.path_time_s + 1.0 / st.lambda_queue +
         e.path_energy_ws / mean_power(truth, charger, st);
}

double expected_path_loss(const TruthParams& truth, const feasibility::FeasibilityGraph& graph,
                          std::span<const std::size_t> edges) {
  double total = 0.0;
  for (const std::size_t e : edges) total += expected_edge_loss(truth, graph, e);
  return total;
}

OptimalPath optimal_expected_path(const TruthParams& truth,
                                  const feasibility::FeasibilityGraph& graph) {
  if (!graph.source() || !graph.target()) {
    throw ValidationError("feasibility graph has no trip terminals");
  }
  std::vector<double> weights(graph.edges().size());
  for (std::size_t e = 0; e < weights.size(); ++e) weights[e] = expected_edge_loss(truth, graph, e);
  auto found = search::a_star(graph.topology(), *graph.source(), *graph.target(), weights,
                              [&graph](std::size_t s) { return graph.heuristic_to_target(s); });
  OptimalPath out;
  out.expected_loss = expected_path_loss(truth, graph, found.arcs);
  out.edges = std::move(found.arcs);
  return out;
}

double regret_step(const TruthParams& truth, const feasibility::FeasibilityGraph& graph,
                   std::span<const std::size_t> chosen, double optimal_loss) {
  const double diff = expected_path_loss(truth, graph, chosen) - optimal_loss;
  if (diff >= 0.0) return diff;
  if (diff >= -1e-9 * std::max(1.0, std::abs(optimal_loss))) return 0.0;
  throw std::logic_error("chosen path beats the expected-loss optimum by " +
                         std::to_string(-diff) + " s");
}

void RegretTrace::append(std::uint64_t seed, std::string policy, std::vector<road::NodeId> path,
                         double instant_regret_s) {
  RegretRow row;
  row.seed = seed;
  row.policy = std::move(policy);
  row.t = static_cast<std::int64_t>(rows_.size()) + 1;
  row.path = std::move(path);
  row.instant_regret_s = instant_regret_s;
  row.cumulative_regret_s = cumulative() + instant_regret_s;
  rows_.push_back(std::move(row));
}

std::string RegretTrace::to_csv() const {
  std::string out = "seed,policy,t,instant_regret_s,cumulative_regret_s\n";
  for (const auto& r : rows_) {
    out += std::to_string(r.seed) + ',' + r.policy + ',' + std::to_string(r.t) + ',' +
           io::format_double(r.instant_regret_s) + ',' + io::format_double(r.cumulative_regret_s) +
           '\n';
  }
  return out;
}

RegretTrace RegretTrace::from_csv(const std::filesystem::path& file) {
  const auto table = io::read_csv(file);
  io::expect_header(table, kTraceHeader);
  RegretTrace trace;
  for (const auto& row : table.rows) {
    RegretRow r;
    r.seed = static_cast<std::uint64_t>(io::parse_int(table, row, 0));
    r.policy = row.fields[1];
    r.t = io::parse_int(table, row, 2);
    r.instant_regret_s = io::parse_double(table, row, 3);
    r.cumulative_regret_s = io::parse_double(table, row, 4);
    trace.rows_.push_back(std::move(r));
  }
  return trace;
}

}  // namespace evbandit::environment
