#include "evbandit/posteriors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "evbandit/errors.hpp"

namespace evbandit::posteriors {

using numerics::digamma;
using numerics::log_gamma;

double ucb_level(std::int64_t t) {
  if (t < 1) throw DomainError("iteration index starts at 1");
  return t == 1 ? 0.5 : 1.0 - 1.0 / static_cast<double>(t);
}

// ---------------------------------------------------------------------------
// Queue

QueuePosterior QueuePosterior::point_mass(double lambda, double concentration) {
  return QueuePosterior{concentration, concentration / lambda};
}

void QueuePosterior::validate() const {
  if (!(alpha > 0.0 && beta > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta)) {
    throw ValidationError("queue posterior needs alpha > 0 and beta > 0");
  }
}

QueuePosterior queue_update(QueuePosterior q, double observed_queue_s) {
  if (!(observed_queue_s >= 0.0)) throw DomainError("queue observation must be nonnegative");
  q.alpha += 1.0;
  q.beta += observed_queue_s;
  return q;
}

QueuePosterior queue_update_batch(QueuePosterior q, std::span<const double> observed_queue_s) {
  for (const double y : observed_queue_s) q = queue_update(q, y);
  return q;
}

double queue_map_expected_time(const QueuePosterior& q) {
  if (!(q.alpha > 1.0)) {
    throw DegenerateMap("queue MAP needs alpha > 1, got " + std::to_string(q.alpha));
  }
  return q.beta / (q.alpha - 1.0);
}

double queue_sample_expected_time(const QueuePosterior& q, numerics::Rng& rng) {
  return 1.0 / numerics::sample_gamma(rng, q.alpha, q.beta);
}

double queue_ucb_expected_time(const QueuePosterior& q, std::int64_t t) {
  return 1.0 / numerics::gamma_quantile(ucb_level(t), q.alpha, q.beta);
}

// ---------------------------------------------------------------------------
// Charge

ChargePosterior ChargePosterior::point_mass(double alpha, double beta, double deficit_scale,
                                            double concentration) {
  // Sufficient statistics of `concentration` draws: E[x] = a/b, E[ln x] = psi(a) - ln b.
  return ChargePosterior{concentration * (digamma(alpha) - std::log(beta)),
                         concentration * alpha / beta, concentration, deficit_scale};
}

bool ChargePosterior::integrable() const {
  return ln_pi / xi + std::log(xi) < std::log(gamma_p);
}

void ChargePosterior::validate() const {
  if (!(gamma_p > 0.0 && xi > 0.0 && deficit_scale >= 0.0) || !std::isfinite(ln_pi)) {
    throw ValidationError("charge posterior needs gamma > 0, xi > 0, scale >= 0");
  }
  if (!integrable()) {
    throw ValidationError("charge posterior violates pi^(1/xi) * xi / gamma < 1");
  }
}

ChargePosterior charge_update(ChargePosterior c, double deficit_w) {
  if (!(deficit_w > 0.0)) {
    throw ZeroDeficit("charging-power deficit must be positive, got " + std::to_string(deficit_w));
  }
  if (!(c.deficit_scale > 0.0)) throw DomainError("charge update needs a positive deficit scale");
  const double x = deficit_w / c.deficit_scale;
  c.ln_pi += std::log(x);
  c.gamma_p += x;
  c.xi += 1.0;
  return c;
}

ChargePosterior charge_update_batch(ChargePosterior c, std::span<const double> deficits_w) {
  for (const double d : deficits_w) c = charge_update(c, d);
  return c;
}

double charge_log_density_alpha(const ChargePosterior& c, double alpha) {
  if (!(alpha > 0.0)) throw DomainError("shape must be positive");
  return alpha * c.ln_pi - c.xi * alpha * std::log(c.gamma_p) - c.xi * log_gamma(alpha) +
         log_gamma(c.xi * alpha);
}

double charge_log_density_alpha_slope(const ChargePosterior& c, double alpha) {
  if (!(alpha > 0.0)) throw DomainError("shape must be positive");
  return c.ln_pi - c.xi * std::log(c.gamma_p) - c.xi * digamma(alpha) +
         c.xi * digamma(c.xi * alpha);
}

double charge_mode_alpha(const ChargePosterior& c) {
  double lo = 1e-8;
  double hi = 1e8;
  const double g_lo = charge_log_density_alpha_slope(c, lo);
  const double g_hi = charge_log_density_alpha_slope(c, hi);
  if (!(g_lo > 0.0 && g_hi < 0.0)) {
    throw NoInteriorMode("shape log-density slope has no sign change on (1e-8, 1e8)");
  }
  double best = lo;
  double best_abs = g_lo;
  for (int i = 0; i < 200 && hi / lo - 1.0 > 1e-15; ++i) {
    const double mid = std::sqrt(lo * hi);
    const double g = charge_log_density_alpha_slope(c, mid);
    if (std::abs(g) < best_abs) {
      best = mid;
      best_abs = std::abs(g);
    }
    if (g == 0.0) break;
    if (g > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return best;
}

double expected_power(const road::ChargerSpec& charger, double deficit_scale, double alpha,
                      double beta) {
  const double power = charger.max_power_w - deficit_scale * alpha / beta;
  if (std::isnan(power)) return charger.min_power_w;
  return std::clamp(power, charger.min_power_w, charger.max_power_w);
}

double charge_map_expected_power(const ChargePosterior& c, const road::ChargerSpec& charger,
                                 double mode_alpha) {
  if (c.deficit_scale == 0.0) return charger.max_power_w;
  const double shape = c.xi * mode_alpha;
  if (!(shape > 1.0)) {
    throw DegenerateMap("charge MAP needs xi * alpha > 1, got " + std::to_string(shape));
  }
  const double beta = (shape - 1.0) / c.gamma_p;
  return expected_power(charger, c.deficit_scale, mode_alpha, beta);
}

double charge_map_expected_power(const ChargePosterior& c, const road::ChargerSpec& charger) {
  if (c.deficit_scale == 0.0) return charger.max_power_w;
  return charge_map_expected_power(c, charger, charge_mode_alpha(c));
}

double charge_sample_alpha(const ChargePosterior& c, numerics::Rng& rng,
                           std::optional<double> mode_alpha) {
  const double mode = mode_alpha ? *mode_alpha : charge_mode_alpha(c);
  const numerics::LogConcaveDensity density{
      [&c](double a) { return charge_log_density_alpha(c, a); },
      [&c](double a) { return charge_log_density_alpha_slope(c, a); }};
  return numerics::tdr_sample_log_concave(rng, density, mode);
}

double charge_sample_expected_power(const ChargePosterior& c, numerics::Rng& rng,
                                    const road::ChargerSpec& charger,
                                    std::optional<double> mode_alpha) {
  const double alpha = charge_sample_alpha(c, rng, mode_alpha);
  const double beta = numerics::sample_gamma(rng, c.xi * alpha, c.gamma_p);
  return expected_power(charger, c.deficit_scale, alpha, beta);
}

double charge_ucb_expected_power(const ChargePosterior& c, std::int64_t t,
                                 const road::ChargerSpec& charger,
                                 std::optional<double> mode_alpha) {
  if (c.deficit_scale == 0.0) return charger.max_power_w;
  const double alpha = mode_alpha ? *mode_alpha : charge_mode_alpha(c);
  const double beta = numerics::gamma_quantile(ucb_level(t), c.xi * alpha, c.gamma_p);
  return expected_power(charger, c.deficit_scale, alpha, beta);
}

// ---------------------------------------------------------------------------
// StationBelief

StationBelief::StationBelief(QueuePosterior queue, ChargePosterior charge)
    : queue_(queue), charge_(charge) {
  queue_.validate();
  charge_.validate();
}

void StationBelief::observe_queue(double queue_s) { queue_ = queue_update(queue_, queue_s); }

void StationBelief::observe_deficit(double deficit_w) {
  charge_ = charge_update(charge_, deficit_w);
  mode_.reset();
}

double StationBelief::mode_alpha() const {
  if (!mode_) mode_ = charge_mode_alpha(charge_);
  return *mode_;
}

double StationBelief::map_power(const road::ChargerSpec& charger) const {
  if (charge_.deficit_scale == 0.0) return charger.max_power_w;
  return charge_map_expected_power(charge_, charger, mode_alpha());
}

double StationBelief::sample_power(numerics::Rng& rng, const road::ChargerSpec& charger) {
  if (charge_.deficit_scale == 0.0) return charger.max_power_w;
  if (map_fallback_) return map_power(charger);
  try {
    return charge_sample_expected_power(charge_, rng, charger, mode_alpha());
  } catch (const SamplerFailure&) {
    map_fallback_ = true;
    return map_power(charger);
  }
}

double StationBelief::ucb_power(std::int64_t t, const road::ChargerSpec& charger) const {
  if (charge_.deficit_scale == 0.0) return charger.max_power_w;
  return charge_ucb_expected_power(charge_, t, charger, mode_alpha());
}

}  // namespace evbandit::posteriors
