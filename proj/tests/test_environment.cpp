#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "evbandit/environment.hpp"
#include "evbandit/errors.hpp"
#include "evbandit/numerics.hpp"
#include "support.hpp"

using namespace evbandit;
using namespace evbandit::environment;
using feasibility::FeasibilityEdge;
using feasibility::FeasibilityGraph;
using feasibility::Station;

namespace {

const road::ChargerSpec kCharger{150'000.0, 75'000.0};

// Stations share one coordinate so the A* heuristic is zero.
Station station(road::NodeId id, bool charger = true) {
  return Station{id, 58.0, 12.0, charger ? std::optional(kCharger) : std::nullopt};
}

FeasibilityGraph hand_graph(std::vector<Station> stations, std::vector<FeasibilityEdge> edges,
                            std::size_t src, std::size_t trg) {
  FeasibilityGraph g(std::move(stations), std::move(edges), 1e9, 30.0);
  g.set_terminals(src, trg);
  return g;
}

TruthParams uniform_truth(const FeasibilityGraph& g, StationTruth st, double scale = 300.0) {
  TruthParams t;
  t.deficit_scale = scale;
  t.stations.resize(g.stations().size());
  for (std::size_t i = 0; i < g.stations().size(); ++i) {
    if (g.stations()[i].charger) t.stations[i] = st;
  }
  return t;
}

}  // namespace

TEST_CASE("delivered power") {
  CHECK(delivered_power(kCharger, 300.0, 0.0, true) == 150'000.0);
  CHECK(delivered_power(kCharger, 300.0, 100.0, true) == 120'000.0);
  CHECK(delivered_power(kCharger, 300.0, 1000.0, true) == 75'000.0);
  CHECK(delivered_power(kCharger, 300.0, 1000.0, false) == 1.0);
  CHECK(delivered_power(kCharger, 300.0, 300.0, false) == 60'000.0);
}

TEST_CASE("expected edge loss") {
  // Source 1 -> station 2 -> target 3.
  const auto g = hand_graph({station(1, false), station(2), station(3, false)},
                            {{0, 1, 3600.0, 1.8e8, {}}, {1, 2, 1000.0, 1e8, {}}}, 0, 2);
  auto truth = uniform_truth(g, StationTruth{1.0 / 600.0, 2.0, 0.02});  // mean deficit 30 kW
  CHECK(expected_edge_loss(truth, g, 0) == doctest::Approx(5700.0).epsilon(1e-14));
  CHECK(expected_edge_loss(truth, g, 1) == 1000.0);  // target: travel only
  const std::vector<std::size_t> path{0, 1};
  CHECK(expected_path_loss(truth, g, path) ==
        expected_edge_loss(truth, g, 0) + expected_edge_loss(truth, g, 1));

  truth.deficit_scale = 0.0;
  CHECK(expected_edge_loss(truth, g, 0) == 3600.0 + 600.0 + 1.8e8 / 150'000.0);

  // Mean deficit beyond the power window: truncated clamps, raw does not.
  truth.deficit_scale = 300.0;
  truth.stations[1]->beta_charge = 0.005;  // 120 kW mean deficit
  CHECK(expected_edge_loss(truth, g, 0) == 3600.0 + 600.0 + 1.8e8 / 75'000.0);
  truth.truncate = false;
  CHECK(expected_edge_loss(truth, g, 0) == doctest::Approx(3600.0 + 600.0 + 1.8e8 / 30'000.0));
}

TEST_CASE("regret of a detour through a slower queue") {
  // 0 -> 1 -> 3 and 0 -> 2 -> 3, identical except for the queue at 1 and 2.
  const auto g = hand_graph({station(10, false), station(11), station(12), station(13, false)},
                            {{0, 1, 1000.0, 1e7, {}},
                             {0, 2, 1000.0, 1e7, {}},
                             {1, 3, 500.0, 1e7, {}},
                             {2, 3, 500.0, 1e7, {}}},
                            0, 3);
  auto truth = uniform_truth(g, StationTruth{1.0 / 600.0, 2.0, 0.02});
  truth.stations[2]->lambda_queue = 1.0 / 1200.0;
  const auto opt = optimal_expected_path(truth, g);
  CHECK(opt.edges == std::vector<std::size_t>{0, 2});
  const std::vector<std::size_t> worse{1, 3};
  CHECK(regret_step(truth, g, worse, opt.expected_loss) == doctest::Approx(600.0));
  CHECK(regret_step(truth, g, opt.edges, opt.expected_loss) == 0.0);
  // Tiny negative differences are rounding; large ones are bugs.
  CHECK(regret_step(truth, g, opt.edges, opt.expected_loss + 1e-12) == 0.0);
  CHECK_THROWS_AS(regret_step(truth, g, opt.edges, opt.expected_loss + 1.0), std::logic_error);
}

TEST_CASE("optimal path matches exhaustive enumeration") {
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 20 && checked < 5; ++seed) {
    const auto inst = testsupport::geometric_instance(150, 0.07, seed, 0.8);
    const road::RoadGraph road(inst.nodes, inst.edges);
    const road::VehicleParams v;
    const auto base = feasibility::build_feasibility_graph(road, v);
    FeasibilityGraph g;
    try {
      g = feasibility::connect_terminals(base, road, inst.source, inst.target, v);
      (void)optimal_expected_path(uniform_truth(g, StationTruth{1e-3, 2.0, 0.02}), g);
    } catch (const Error&) {
      continue;  // corners not linked on this draw
    }
    ++checked;
    numerics::Rng rng(seed);
    const auto truth = draw_truth(g, Priors{}, rng);
    const auto opt = optimal_expected_path(truth, g);

    // Depth-first enumeration of simple paths.
    double best = INFINITY;
    std::vector<char> on_path(g.stations().size(), 0);
    std::function<void(std::size_t, double)> dfs = [&](std::size_t u, double cost) {
      if (u == *g.target()) {
        best = std::min(best, cost);
        return;
      }
      on_path[u] = 1;
      for (const auto e : g.topology().out_arcs(u)) {
        const auto w = g.topology().head(e);
        if (!on_path[w]) dfs(w, cost + expected_edge_loss(truth, g, e));
      }
      on_path[u] = 0;
    };
    dfs(*g.source(), 0.0);
    CHECK(opt.expected_loss == doctest::Approx(best).epsilon(1e-12));
    CHECK(opt.edges.size() >= 2);
  }
  CHECK(checked == 5);
}

TEST_CASE("draw_truth") {
  std::vector<Station> stations;
  for (road::NodeId id = 1; id <= 10000; ++id) stations.push_back(station(id));
  const FeasibilityGraph g(stations, {}, 1e9, 30.0);

  numerics::Rng rng(3);
  const auto truth = draw_truth(g, Priors{}, rng);
  double sum = 0.0;
  for (const auto& st : truth.stations) {
    REQUIRE(st);
    CHECK(st->lambda_queue > 0.0);
    CHECK(st->alpha_charge > 0.0);
    CHECK(st->beta_charge > 0.0);
    sum += st->lambda_queue;
  }
  const double sigma = std::sqrt(2.0) / 2400.0;
  CHECK(std::abs(sum / 1e4 - 2.0 / 2400.0) < 3.0 * sigma / 100.0);

  numerics::Rng again(3);
  const auto truth2 = draw_truth(g, Priors{}, again);
  CHECK(truth2.stations[17]->alpha_charge == truth.stations[17]->alpha_charge);

  Priors tight;
  tight.queue = {1e6, 1e6 * 700.0};
  numerics::Rng rng2(8);
  const auto t3 = draw_truth(FeasibilityGraph({station(1)}, {}, 1e9, 30.0), tight, rng2);
  CHECK(std::abs(t3.stations[0]->lambda_queue * 700.0 - 1.0) < 0.01);
}

TEST_CASE("feedback marginals") {
  const auto g = hand_graph({station(1, false), station(2), station(3, false)},
                            {{0, 1, 3600.0, 1.8e8, {}}, {1, 2, 1000.0, 1e8, {}}}, 0, 2);
  const StationTruth st{1.0 / 1200.0, 2.5, 0.01};  // mean deficit 75 kW hits the floor often
  const auto truth = uniform_truth(g, st);

  const int n = 100000;
  numerics::Rng rng(21);
  double q_sum = 0.0, q_sq = 0.0, p_sum = 0.0, p_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto fb = sample_feedback(truth, g, 0, rng);
    const double power = 1.8e8 / fb.charge_s;
    CHECK(power >= kCharger.min_power_w * (1 - 1e-12));
    q_sum += fb.queue_s;
    q_sq += fb.queue_s * fb.queue_s;
    p_sum += power;
    p_sq += power * power;
  }
  const double q_mean = q_sum / n;
  const double q_se = std::sqrt((q_sq / n - q_mean * q_mean) / n);
  CHECK(std::abs(q_mean - 1200.0) < 3.0 * q_se);

  // E[max(min, max - k z)] = max - k E[min(z, c)], c = (max - min) / k.
  const double k = 300.0;
  const double c = (kCharger.max_power_w - kCharger.min_power_w) / k;
  const double a = st.alpha_charge;
  const double b = st.beta_charge;
  const double e_min = a / b * numerics::reg_lower_incomplete_gamma(a + 1.0, b * c) +
                       c * (1.0 - numerics::reg_lower_incomplete_gamma(a, b * c));
  const double expected = kCharger.max_power_w - k * e_min;
  const double p_mean = p_sum / n;
  const double p_se = std::sqrt((p_sq / n - p_mean * p_mean) / n);
  CHECK(std::abs(p_mean - expected) < 3.0 * p_se);

  // Edges into the target carry no queue or charge.
  const auto end = sample_feedback(truth, g, 1, rng);
  CHECK(end.queue_s == 0.0);
  CHECK(end.charge_s == 0.0);
}

TEST_CASE("untruncated loss matches Monte Carlo traversals") {
  const auto g = hand_graph({station(1, false), station(2), station(3, false)},
                            {{0, 1, 3600.0, 1.8e8, {}}, {1, 2, 1000.0, 1e8, {}}}, 0, 2);
  auto truth = uniform_truth(g, StationTruth{1.0 / 900.0, 3.0, 0.03}, 1.0);
  truth.truncate = false;
  const int n = 100000;
  numerics::Rng rng(5);
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto fb = sample_feedback(truth, g, 0, rng);
    const double loss = 3600.0 + fb.queue_s + fb.charge_s;
    sum += loss;
    sq += loss * loss;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sq / n - mean * mean) / n);
  CHECK(std::abs(mean - expected_edge_loss(truth, g, 0)) < 3.0 * se);
}

TEST_CASE("regret trace bookkeeping") {
  RegretTrace trace;
  const std::vector<double> steps{3.5, 0.0, 1.25, 1e-3};
  double running = 0.0;
  for (const double s : steps) {
    trace.append(4, "greedy", {1, 2}, s);
    running += s;
    CHECK(trace.cumulative() == running);
  }
  CHECK(trace.rows().back().t == 4);

  testsupport::TempDir dir("trace");
  const auto file = dir.write("trace.csv", trace.to_csv());
  const auto back = RegretTrace::from_csv(file);
  REQUIRE(back.rows().size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(back.rows()[i].instant_regret_s == trace.rows()[i].instant_regret_s);
    CHECK(back.rows()[i].cumulative_regret_s == trace.rows()[i].cumulative_regret_s);
    CHECK(back.rows()[i].policy == "greedy");
  }
  CHECK(trace.to_csv().rfind("seed,policy,t,instant_regret_s,cumulative_regret_s\n", 0) == 0);
}
