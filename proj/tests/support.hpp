#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "evbandit/experiment.hpp"
#include "evbandit/road_graph.hpp"
#include "evbandit/search.hpp"

namespace testsupport {

/// Kolmogorov-Smirnov statistic of a sample against a continuous CDF.
inline double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const auto n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, std::abs(f - static_cast<double>(i + 1) / n),
                  std::abs(f - static_cast<double>(i) / n)});
  }
  return d;
}

/// Critical value at alpha = 0.01 for n = 1e4, as pinned by the acceptance list.
inline constexpr double kKsCritical = 0.0163;

/// Bellman-Ford distances with the same left-to-right summation as Dijkstra.
inline std::vector<double> bellman_ford(const evbandit::search::Digraph& g, std::size_t source,
                                        const std::vector<double>& w) {
  std::vector<double> dist(g.node_count(), std::numeric_limits<double>::infinity());
  dist[source] = 0.0;
  for (std::size_t round = 0; round + 1 < g.node_count(); ++round) {
    bool changed = false;
    for (std::size_t a = 0; a < g.arc_count(); ++a) {
      const double cand = dist[g.tail(a)] + w[a];
      if (cand < dist[g.head(a)]) {
        dist[g.head(a)] = cand;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return dist;
}

/// Small connected geometric instance from the library generator.
inline evbandit::experiment::GeneratedInstance geometric_instance(std::size_t nodes,
                                                                  double charger_fraction,
                                                                  std::uint64_t seed,
                                                                  double extent_deg = 0.6) {
  evbandit::experiment::GeneratorSpec spec;
  spec.node_count = nodes;
  spec.charger_fraction = charger_fraction;
  spec.extent_lat_deg = extent_deg;
  spec.extent_lon_deg = extent_deg * 1.75;
  spec.seed = seed;
  return evbandit::experiment::generate_instance(spec);
}

}  // namespace testsupport

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

namespace testsupport {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("evbandit_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path write(const std::string& name, const std::string& content) const {
    const auto p = path_ / name;
    std::ofstream(p, std::ios::binary) << content;
    return p;
  }

 private:
  std::filesystem::path path_;
};

}  // namespace testsupport

#include <map>
#include <utility>

#include "evbandit/feasibility.hpp"

namespace testsupport {

/// (time, energy) of the lexicographically smallest road path, by Bellman-Ford.
inline std::vector<std::pair<double, double>> lexicographic_bellman_ford(
    const evbandit::road::RoadGraph& road, std::size_t source,
    const evbandit::road::VehicleParams& vehicle) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const auto& g = road.topology();
  const auto times = road.travel_times();
  const auto energies = road.energies(vehicle);
  std::vector<std::pair<double, double>> best(g.node_count(), {inf, inf});
  best[source] = {0.0, 0.0};
  for (std::size_t round = 0; round + 1 < g.node_count(); ++round) {
    bool changed = false;
    for (std::size_t a = 0; a < g.arc_count(); ++a) {
      const auto& from = best[g.tail(a)];
      if (std::isinf(from.first)) continue;
      const std::pair<double, double> cand{from.first + times[a], from.second + energies[a]};
      if (cand < best[g.head(a)]) {
        best[g.head(a)] = cand;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return best;
}

using EdgeKey = std::pair<evbandit::road::NodeId, evbandit::road::NodeId>;

/// Feasible charger pairs by enumerating every station as a search source.
inline std::map<EdgeKey, std::pair<double, double>> brute_force_feasibility(
    const evbandit::road::RoadGraph& road, const evbandit::road::VehicleParams& vehicle) {
  const double window = vehicle.soc_max_frac * vehicle.battery_capacity_ws -
                        vehicle.soc_min_frac * vehicle.battery_capacity_ws;
  std::map<EdgeKey, std::pair<double, double>> out;
  for (const auto s : road.charger_indices()) {
    const auto best = lexicographic_bellman_ford(road, s, vehicle);
    for (const auto t : road.charger_indices()) {
      if (t == s || std::isinf(best[t].first) || best[t].second > window) continue;
      out[{road.nodes()[s].id, road.nodes()[t].id}] = best[t];
    }
  }
  return out;
}

inline std::map<EdgeKey, std::pair<double, double>> edge_map(
    const evbandit::feasibility::FeasibilityGraph& fg) {
  std::map<EdgeKey, std::pair<double, double>> out;
  for (const auto& e : fg.edges()) {
    out[{fg.stations()[e.from].id, fg.stations()[e.to].id}] = {e.path_time_s, e.path_energy_ws};
  }
  return out;
}

}  // namespace testsupport

#include "evbandit/posteriors.hpp"

namespace testsupport {

struct Moments {
  double mean;
  double variance;
};

/// Posterior moments of an exponential rate by Bayes' rule on a uniform
/// lambda grid [1e-6, 1e-1] (1e5 points), trapezoid rule.
inline Moments queue_grid_posterior(double alpha0, double beta0, const std::vector<double>& obs) {
  const std::size_t n = 100000;
  const double lo = 1e-6;
  const double hi = 1e-1;
  const double h = (hi - lo) / static_cast<double>(n - 1);
  std::vector<double> logp(n);
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double lam = lo + h * static_cast<double>(i);
    double lp = (alpha0 - 1.0) * std::log(lam) - beta0 * lam;
    for (const double y : obs) lp += std::log(lam) - lam * y;
    logp[i] = lp;
    peak = std::max(peak, lp);
  }
  double z = 0.0, m1 = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lam = lo + h * static_cast<double>(i);
    const double w = ((i == 0 || i + 1 == n) ? 0.5 : 1.0) * std::exp(logp[i] - peak);
    z += w;
    m1 += w * lam;
    m2 += w * lam * lam;
  }
  const double mean = m1 / z;
  return {mean, m2 / z - mean * mean};
}

/// Joint Gamcon-II log-density, written out independently of the library:
/// alpha ln pi + (xi alpha - 1) ln beta - gamma beta - xi ln Gamma(alpha).
inline double gamcon_joint_log_density(double ln_pi, double gamma_p, double xi, double alpha,
                                       double beta) {
  return alpha * ln_pi + (xi * alpha - 1.0) * std::log(beta) - gamma_p * beta -
         xi * std::lgamma(alpha);
}

/// Gamma(alpha, beta) log-likelihood of one observation x.
inline double gamma_log_likelihood(double alpha, double beta, double x) {
  return alpha * std::log(beta) + (alpha - 1.0) * std::log(x) - beta * x - std::lgamma(alpha);
}

/// Numerically normalized CDF of the shape marginal on (0, upper] with the
/// trapezoid rule on `points` nodes.
class ShapeMarginalCdf {
 public:
  ShapeMarginalCdf(const evbandit::posteriors::ChargePosterior& c, double upper,
                   std::size_t points)
      : h_(upper / static_cast<double>(points - 1)), cdf_(points, 0.0) {
    std::vector<double> logp(points);
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < points; ++i) {
      const double a = h_ * static_cast<double>(i);
      logp[i] = a * c.ln_pi - c.xi * a * std::log(c.gamma_p) - c.xi * std::lgamma(a) +
                std::lgamma(c.xi * a);
      peak = std::max(peak, logp[i]);
    }
    double prev = 0.0;  // density vanishes at 0 for these priors
    for (std::size_t i = 1; i < points; ++i) {
      const double cur = std::exp(logp[i] - peak);
      cdf_[i] = cdf_[i - 1] + 0.5 * h_ * (prev + cur);
      prev = cur;
    }
    const double total = cdf_.back();
    for (auto& v : cdf_) v /= total;
  }

  double operator()(double a) const {
    if (a <= 0.0) return 0.0;
    const double pos = a / h_;
    const auto i = static_cast<std::size_t>(pos);
    if (i + 1 >= cdf_.size()) return 1.0;
    const double f = pos - static_cast<double>(i);
    return cdf_[i] + f * (cdf_[i + 1] - cdf_[i]);
  }

 private:
  double h_;
  std::vector<double> cdf_;
};

/// Maximizer of the shape log-density over a uniform grid.
inline double grid_mode(const evbandit::posteriors::ChargePosterior& c, double step, double upper) {
  double best = -std::numeric_limits<double>::infinity();
  double arg = step;
  for (double a = step; a <= upper; a += step) {
    const double v = a * c.ln_pi - c.xi * a * std::log(c.gamma_p) - c.xi * std::lgamma(a) +
                     std::lgamma(c.xi * a);
    if (v > best) {
      best = v;
      arg = a;
    }
  }
  return arg;
}

}  // namespace testsupport
