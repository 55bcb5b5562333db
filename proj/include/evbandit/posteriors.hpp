#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "evbandit/numerics.hpp"
#include "evbandit/road_graph.hpp"

namespace evbandit::posteriors {

/// Quantile level used by the optimistic (UCB) queries at iteration t:
/// 1 - 1/t, and 0.5 at t = 1 where that would be zero.
double ucb_level(std::int64_t t);

/// Gamma posterior over an exponential queue rate (shape alpha, rate beta in s).
struct QueuePosterior {
  double alpha = 2.0;
  double beta = 2400.0;

  /// Near point mass at `lambda`: shape `concentration`, mean lambda.
  static QueuePosterior point_mass(double lambda, double concentration);

  void validate() const;
};

QueuePosterior queue_update(QueuePosterior q, double observed_queue_s);
QueuePosterior queue_update_batch(QueuePosterior q, std::span<const double> observed_queue_s);

/// beta / (alpha - 1); DegenerateMap unless alpha > 1.
double queue_map_expected_time(const QueuePosterior& q);
double queue_sample_expected_time(const QueuePosterior& q, numerics::Rng& rng);
double queue_ucb_expected_time(const QueuePosterior& q, std::int64_t t);

/// Gamcon-II posterior over the (shape, rate) of the gamma-distributed
/// charging-power deficit. Observations are divided by `deficit_scale`
/// before entering the update and estimates are multiplied back by it.
/// The product parameter is kept as its logarithm.
struct ChargePosterior {
  double ln_pi = 13.5;
  double gamma_p = 300.0;
  double xi = 3.0;
  double deficit_scale = 300.0;

  /// Posterior equivalent to `concentration` observations with the moments
  /// of Gamma(alpha, beta); it concentrates on (alpha, beta).
  static ChargePosterior point_mass(double alpha, double beta, double deficit_scale,
                                    double concentration);

  /// ln_pi / xi + ln xi < ln gamma_p, the condition for the shape marginal
  /// to be normalizable.
  bool integrable() const;

  void validate() const;
};

ChargePosterior charge_update(ChargePosterior c, double deficit_w);
ChargePosterior charge_update_batch(ChargePosterior c, std::span<const double> deficits_w);

/// Unnormalized log-density of the shape marginal.
double charge_log_density_alpha(const ChargePosterior& c, double alpha);

/// d/d alpha of charge_log_density_alpha.
double charge_log_density_alpha_slope(const ChargePosterior& c, double alpha);

/// Root of the slope by bisection on (1e-8, 1e8). Throws NoInteriorMode
/// when the slope does not change sign there.
double charge_mode_alpha(const ChargePosterior& c);

/// max_power - scale * alpha / beta, clamped to the charger's power range.
double expected_power(const road::ChargerSpec& charger, double deficit_scale, double alpha,
                      double beta);

double charge_map_expected_power(const ChargePosterior& c, const road::ChargerSpec& charger);

/// Optional precomputed mode skips the bisection.
double charge_map_expected_power(const ChargePosterior& c, const road::ChargerSpec& charger,
                                 double mode_alpha);

/// Exact draw from the shape marginal; throws SamplerFailure.
double charge_sample_alpha(const ChargePosterior& c, numerics::Rng& rng,
                           std::optional<double> mode_alpha = std::nullopt);

/// Throws SamplerFailure when the shape sampler cannot produce a draw.
double charge_sample_expected_power(const ChargePosterior& c, numerics::Rng& rng,
                                    const road::ChargerSpec& charger,
                                    std::optional<double> mode_alpha = std::nullopt);

double charge_ucb_expected_power(const ChargePosterior& c, std::int64_t t,
                                 const road::ChargerSpec& charger,
                                 std::optional<double> mode_alpha = std::nullopt);

/// Per-station learner state: both posteriors, a cached charge mode and
/// the sticky switch to MAP once shape sampling has failed.
class StationBelief {
 public:
  StationBelief(QueuePosterior queue, ChargePosterior charge);

  const QueuePosterior& queue() const noexcept { return queue_; }
  const ChargePosterior& charge() const noexcept { return charge_; }
  bool map_fallback() const noexcept { return map_fallback_; }
  void force_map_fallback() noexcept { map_fallback_ = true; }

  void observe_queue(double queue_s);
  void observe_deficit(double deficit_w);

  double mode_alpha() const;

  double map_power(const road::ChargerSpec& charger) const;
  /// Thompson draw; absorbs SamplerFailure by switching to MAP for good.
  double sample_power(numerics::Rng& rng, const road::ChargerSpec& charger);
  double ucb_power(std::int64_t t, const road::ChargerSpec& charger) const;

 private:
  QueuePosterior queue_;
  ChargePosterior charge_;
  bool map_fallback_ = false;
  mutable std::optional<double> mode_;
};

}  // namespace evbandit::posteriors
