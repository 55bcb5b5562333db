// Acceptance checks. Prints one PASS/FAIL line per criterion.
//
//   acceptance [--expect-fail N,...]
//
// Exit status is 0 when the failing criteria are exactly the expected ones.
#include <chrono>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include "evbandit/errors.hpp"
#include "evbandit/experiment.hpp"
#include "support.hpp"

using namespace evbandit;

namespace {

std::set<int> failed;

void verdict(int id, bool ok, const std::string& what, const std::string& detail) {
  if (!ok) failed.insert(id);
  std::printf("criterion %2d: %s  %s (%s)\n", id, ok ? "PASS" : "FAIL", what.c_str(),
              detail.c_str());
  std::fflush(stdout);
}

// Informational line that does not count as a criterion.
void note(int id, const std::string& text) {
  std::printf("criterion %2d:       note: %s\n", id, text.c_str());
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

void conjugacy() {
  numerics::Rng rng(2024);
  double worst_queue = 0.0;
  for (const int n : {1, 5, 50}) {
    std::vector<double> obs(static_cast<std::size_t>(n));
    for (auto& y : obs) y = numerics::sample_exponential(rng, 1.0 / 900.0);
    const auto post =
        posteriors::queue_update_batch(posteriors::QueuePosterior{2.0, 2400.0}, obs);
    const auto grid = testsupport::queue_grid_posterior(2.0, 2400.0, obs);
    worst_queue = std::max({worst_queue, rel(grid.mean, post.alpha / post.beta),
                            rel(grid.variance, post.alpha / (post.beta * post.beta))});
  }

  // Joint (alpha, beta) density after three deficits against prior x likelihood.
  const posteriors::ChargePosterior prior;
  const std::vector<double> deficits{24'000.0, 9'000.0, 41'000.0};
  const auto post = posteriors::charge_update_batch(prior, deficits);
  const std::size_t na = 400;
  const std::size_t nb = 400;
  const double amax = 25.0;
  const double bmax = 0.3;
  auto a_at = [&](std::size_t i) { return amax * (static_cast<double>(i) + 0.5) / na; };
  auto b_at = [&](std::size_t j) { return bmax * (static_cast<double>(j) + 0.5) / nb; };
  auto lib_log = [&](double a, double b) {
    return posteriors::charge_log_density_alpha(post, a) + post.xi * a * std::log(post.gamma_p) -
           numerics::log_gamma(post.xi * a) + (post.xi * a - 1.0) * std::log(b) -
           post.gamma_p * b;
  };
  auto oracle_log = [&](double a, double b) {
    double lp = testsupport::gamcon_joint_log_density(prior.ln_pi, prior.gamma_p, prior.xi, a, b);
    for (const double d : deficits) {
      lp += testsupport::gamma_log_likelihood(a, b, d / prior.deficit_scale);
    }
    return lp;
  };
  double lib_peak = -INFINITY;
  double orc_peak = -INFINITY;
  for (std::size_t i = 0; i < na; ++i) {
    for (std::size_t j = 0; j < nb; ++j) {
      lib_peak = std::max(lib_peak, lib_log(a_at(i), b_at(j)));
      orc_peak = std::max(orc_peak, oracle_log(a_at(i), b_at(j)));
    }
  }
  double lib_z = 0.0;
  double orc_z = 0.0;
  for (std::size_t i = 0; i < na; ++i) {
    for (std::size_t j = 0; j < nb; ++j) {
      lib_z += std::exp(lib_log(a_at(i), b_at(j)) - lib_peak);
      orc_z += std::exp(oracle_log(a_at(i), b_at(j)) - orc_peak);
    }
  }
  // 20 points around the posterior bulk.
  double worst_charge = 0.0;
  int points = 0;
  while (points < 20) {
    const double a = a_at(rng.uniform_index(na / 4));
    const double b = b_at(rng.uniform_index(nb / 2));
    const double orc = std::exp(oracle_log(a, b) - orc_peak) / orc_z;
    if (orc < 1e-12) continue;
    const double lib = std::exp(lib_log(a, b) - lib_peak) / lib_z;
    worst_charge = std::max(worst_charge, rel(lib, orc));
    ++points;
  }
  verdict(1, worst_queue < 1e-3 && worst_charge < 1e-3, "conjugacy against grid Bayes",
          fmt("queue worst rel err %.2e, charge worst rel err %.2e at 20 points", worst_queue,
              worst_charge));
}

void samplers() {
  const posteriors::ChargePosterior prior;
  const testsupport::ShapeMarginalCdf cdf(prior, 60.0, 200000);
  numerics::Rng rng(31337);
  const double mode = posteriors::charge_mode_alpha(prior);
  std::vector<double> xs(10000);
  for (auto& x : xs) x = posteriors::charge_sample_alpha(prior, rng, mode);
  const double d_tdr = testsupport::ks_statistic(xs, cdf);

  double d_gamma = 0.0;
  for (const auto [shape, rate] : {std::pair{0.7, 2.0}, std::pair{3.0, 300.0}}) {
    for (auto& x : xs) x = numerics::sample_gamma(rng, shape, rate);
    d_gamma = std::max(d_gamma, testsupport::ks_statistic(xs, [&](double x) {
                         return numerics::reg_lower_incomplete_gamma(shape, rate * x);
                       }));
  }
  verdict(2, d_tdr < testsupport::kKsCritical && d_gamma < testsupport::kKsCritical,
          "KS tests, n=1e4, D < 0.0163",
          fmt("shape sampler D=%.4f, gamma sampler worst D=%.4f", d_tdr, d_gamma));
}

void mode_oracle() {
  const posteriors::ChargePosterior prior;
  const double mode = posteriors::charge_mode_alpha(prior);
  const double grid = testsupport::grid_mode(prior, 1e-4, 50.0);
  const double g = posteriors::charge_log_density_alpha_slope(prior, mode);
  verdict(3, std::abs(mode - grid) <= 0.1 && std::abs(g) < 1e-10, "shape mode",
          fmt("mode %.12f, grid %.4f, |g| %.1e", mode, grid, std::abs(g)));
}

void quantiles() {
  double worst = 0.0;
  for (const double shape : {0.5, 1.0, 2.0, 10.0, 100.0}) {
    for (int k = 1; k <= 99; ++k) {
      const double nu = k / 100.0;
      for (const double rate : {1.0, 1.0 / 2400.0}) {
        const double q = numerics::gamma_quantile(nu, shape, rate);
        worst = std::max(worst, std::abs(numerics::reg_lower_incomplete_gamma(shape, rate * q) - nu));
      }
    }
  }
  verdict(4, worst < 1e-10, "quantile inversion", fmt("worst |P(Q(nu)) - nu| %.1e", worst));
}

void routing() {
  int mismatches = 0;
  int queries = 0;
  numerics::Rng rng(55);
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto inst = testsupport::geometric_instance(200, 0.1, seed);
    const road::RoadGraph g(inst.nodes, inst.edges);
    const auto times = g.travel_times();
    std::vector<std::pair<std::size_t, std::size_t>> pairs{
        {*g.index_of(inst.source), *g.index_of(inst.target)}};
    for (int k = 0; k < 4; ++k) pairs.emplace_back(rng.uniform_index(200), rng.uniform_index(200));
    for (const auto [s, t] : pairs) {
      const auto tree = search::dijkstra(g.topology(), s, times);
      const auto path = search::a_star(g.topology(), s, t, times, [&](std::size_t v) {
        return road::beeline_heuristic(g.nodes()[v], g.nodes()[t], g.max_speed_mps());
      });
      ++queries;
      if (path.cost != tree.distance[t]) ++mismatches;
    }
  }
  verdict(5, mismatches == 0, "A* equals Dijkstra on 100 instances of 200 nodes",
          fmt("%g of %g queries differ", mismatches, queries));
}

void feasibility_oracle() {
  int mismatches = 0;
  std::size_t max_chargers = 0;
  std::size_t edges = 0;
  const road::VehicleParams v;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const std::size_t n = 100 + 5 * seed;  // 105..200
    const auto inst = testsupport::geometric_instance(n, 10.0 / static_cast<double>(n), seed, 1.0);
    const road::RoadGraph road(inst.nodes, inst.edges);
    max_chargers = std::max(max_chargers, road.charger_indices().size());
    const auto fg = feasibility::build_feasibility_graph(road, v);
    edges += fg.edges().size();
    if (testsupport::edge_map(fg) != testsupport::brute_force_feasibility(road, v)) ++mismatches;
  }
  verdict(6, mismatches == 0 && max_chargers <= 10,
          "feasibility graph equals brute-force enumeration on 20 instances",
          fmt("%g mismatching instances, at most %g chargers, %g edges in total", mismatches,
              static_cast<double>(max_chargers), static_cast<double>(edges)));
}

void energy() {
  const double e = road::edge_energy(road::RoadEdge{1, 2, 1000.0, 20.0}, road::VehicleParams{});
  const double err = rel(e, 2'204'140.8);
  verdict(7, err < 1e-9, "energy of 1 km at 20 m/s", fmt("%.4f Ws, rel err %.1e", e, err));
}

struct Runs {
  std::vector<experiment::RunResult> results;
  experiment::ExperimentConfig cfg;
};

unsigned worker_count() { return std::max(1u, std::thread::hardware_concurrency()); }

void regret_shape() {
  experiment::ExperimentConfig cfg;  // ~300 nodes, 60 chargers, default priors, T=1000, 5 seeds
  cfg.jobs = worker_count();
  const auto start = std::chrono::steady_clock::now();
  const auto instance = experiment::load_or_generate_instance(cfg);
  const auto graph = experiment::prepare_trip_graph(cfg, instance);
  const auto results = experiment::run_all(cfg, graph);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::map<bandit::PolicyKind, double> final_regret;
  std::map<bandit::PolicyKind, double> early;
  std::map<bandit::PolicyKind, double> late;
  for (const auto& r : results) {
    const auto& rows = r.trace.rows();
    final_regret[r.policy] += rows.back().cumulative_regret_s / cfg.seeds.size();
    for (std::size_t i = 0; i < 100; ++i) {
      early[r.policy] += rows[i].instant_regret_s / (100.0 * cfg.seeds.size());
      late[r.policy] += rows[900 + i].instant_regret_s / (100.0 * cfg.seeds.size());
    }
  }
  using bandit::PolicyKind;
  const double gr = final_regret[PolicyKind::greedy];
  const double egr = final_regret[PolicyKind::epsilon_greedy];
  const double ts = final_regret[PolicyKind::thompson_sampling];
  const double ucb = final_regret[PolicyKind::bayes_ucb];
  std::ostringstream d8;
  d8 << instance.road.nodes().size() << " nodes, " << instance.road.charger_indices().size()
     << " chargers, " << cfg.seeds.size() << " seeds, " << fmt("%.1f s; ", secs)
     << fmt("mean final regret GR %.0f, E-GR %.0f, TS %.0f", gr, egr, ts)
     << fmt(", B-UCB %.0f", ucb);
  verdict(8, ts < 0.5 * gr && ts < 0.5 * egr && ucb < gr && ucb < egr,
          "regret ordering TS < GR/2, TS < E-GR/2, B-UCB < GR, B-UCB < E-GR", d8.str());

  auto ratio = [&](PolicyKind k) { return late[k] / early[k]; };
  std::ostringstream d9;
  d9 << "late/early instant regret: TS " << fmt("%.3f", ratio(PolicyKind::thompson_sampling))
     << ", B-UCB " << fmt("%.3f", ratio(PolicyKind::bayes_ucb)) << ", GR "
     << fmt("%.3f", ratio(PolicyKind::greedy));
  verdict(9,
          ratio(PolicyKind::thompson_sampling) < 0.5 && ratio(PolicyKind::bayes_ucb) < 0.5 &&
              ratio(PolicyKind::greedy) > 0.8,
          "sublinearity, TS and B-UCB < 0.5, GR > 0.8", d9.str());
}

void zero_regret() {
  experiment::ExperimentConfig cfg;
  cfg.horizon = 100;
  cfg.oracle_priors = true;
  cfg.jobs = worker_count();
  const auto graph =
      experiment::prepare_trip_graph(cfg, experiment::load_or_generate_instance(cfg));
  const auto results = experiment::run_all(cfg, graph);
  std::map<bandit::PolicyKind, double> worst;
  double exploit_worst = 0.0;
  std::size_t explorations = 0;
  for (const auto& r : results) {
    worst[r.policy] = std::max(worst[r.policy], r.trace.cumulative());
    if (r.policy != bandit::PolicyKind::epsilon_greedy) continue;
    for (std::size_t i = 0; i < r.explored.size(); ++i) {
      if (r.explored[i]) {
        ++explorations;
      } else {
        exploit_worst = std::max(exploit_worst, r.trace.rows()[i].instant_regret_s);
      }
    }
  }
  bool ok = true;
  std::ostringstream d;
  d << "worst cumulative regret over " << cfg.seeds.size() << " seeds:";
  for (const auto kind : bandit::kAllPolicies) {
    ok = ok && worst[kind] < 1e-6;
    d << ' ' << bandit::policy_label(kind) << ' ' << fmt("%g", worst[kind]);
  }
  verdict(10, ok, "point-mass posteriors at truth give regret < 1e-6 s over T=100", d.str());
  note(10, "E-GR explores a random station with probability 1/sqrt(t) whatever its beliefs (" +
               std::to_string(explorations) +
               " exploration steps here); its greedy steps have worst instant regret " +
               fmt("%g", exploit_worst) + " s");
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void determinism() {
  experiment::ExperimentConfig cfg;
  cfg.horizon = 200;
  cfg.jobs = worker_count();
  testsupport::TempDir a("accept_a");
  testsupport::TempDir b("accept_b");
  std::size_t compared = 0;
  bool same = true;
  for (const auto* dir : {&a, &b}) {
    experiment::run_experiment(cfg, dir->path());
    experiment::report(dir->path(), dir->path());
  }
  for (const auto& e : std::filesystem::directory_iterator(a.path())) {
    const auto name = e.path().filename();
    if (!name.string().starts_with("trace_") && name != "regret.svg") continue;
    ++compared;
    same = same && slurp(e.path()) == slurp(b.path() / name);
  }
  verdict(11, same && compared == 21, "two end-to-end runs are byte-identical",
          fmt("%g trace CSVs and SVG compared", static_cast<double>(compared)));
}

std::set<int> parse_expected(int argc, char** argv) {
  std::set<int> out;
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) != "--expect-fail") continue;
    std::stringstream list(argv[i + 1]);
    std::string item;
    while (std::getline(list, item, ',')) out.insert(std::stoi(item));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  const auto expected = parse_expected(argc, argv);
  struct Check {
    std::vector<int> ids;
    void (*run)();
  };
  const std::vector<Check> checks{{{1}, conjugacy},     {{2}, samplers},
                                  {{3}, mode_oracle},   {{4}, quantiles},
                                  {{5}, routing},       {{6}, feasibility_oracle},
                                  {{7}, energy},        {{8, 9}, regret_shape},
                                  {{10}, zero_regret},  {{11}, determinism}};
  for (const auto& check : checks) {
    try {
      check.run();
    } catch (const std::exception& e) {
      for (const int id : check.ids) verdict(id, false, "threw", e.what());
    }
  }
  std::printf("%zu of 11 criteria pass\n", 11 - failed.size());
  if (failed != expected) {
    if (!expected.empty()) std::printf("failing set differs from --expect-fail\n");
    return 1;
  }
  return 0;
}
