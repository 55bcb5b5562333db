#include "evbandit/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "evbandit/errors.hpp"

namespace evbandit::numerics {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTemmeShape = 1e6;

// Stirling series for ln Γ(x), accurate to ~1e-16 relative for x >= 7.
double stirling_log_gamma(double x) {
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  const double series =
      inv * (1.0 / 12.0 +
             inv2 * (-1.0 / 360.0 +
                     inv2 * (1.0 / 1260.0 +
                             inv2 * (-1.0 / 1680.0 +
                                     inv2 * (1.0 / 1188.0 +
                                             inv2 * (-691.0 / 360360.0 +
                                                     inv2 * (1.0 / 156.0)))))));
  return (x - 0.5) * std::log(x) - x + 0.5 * std::log(2.0 * std::numbers::pi) + series;
}

// log of the Gamma(a, 1) kernel normalizer: a ln x - x - ln Γ(a).
double log_gamma_kernel(double a, double x) {
  return a * std::log(x) - x - log_gamma(a);
}

double lower_series(double a, double x) {
  const auto max_iter = static_cast<int>(1000 + 50 * std::sqrt(a));
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < max_iter; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-17) break;
  }
  return sum * std::exp(log_gamma_kernel(a, x));
}

// Upper tail Q(a, x) by modified Lentz continued fraction.
double upper_fraction(double a, double x) {
  constexpr double tiny = 1e-300;
  const auto max_iter = static_cast<int>(1000 + 50 * std::sqrt(a));
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < max_iter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(log_gamma_kernel(a, x)) * h;
}

// Leading terms of Temme's uniform expansion; used for very large shapes,
// where the series and continued fraction need O(sqrt(a)) terms.
double temme_lower(double a, double x) {
  const double mu = (x - a) / a;
  double half_eta2;  // mu - log1p(mu)
  if (std::abs(mu) < 1e-3) {
    double term = mu * mu;
    half_eta2 = 0.0;
    for (int k = 2; k < 10; ++k) {
      half_eta2 += (k % 2 == 0 ? 1.0 : -1.0) * term / k;
      term *= mu;
    }
  } else {
    half_eta2 = mu - std::log1p(mu);
  }
  const double eta = std::copysign(std::sqrt(2.0 * half_eta2), mu);
  double c0;
  if (std::abs(eta) < 1e-2) {
    c0 = -1.0 / 3.0 + eta * (1.0 / 12.0 + eta * (-2.0 / 135.0 + eta * (1.0 / 864.0 + eta / 2835.0)));
  } else {
    c0 = 1.0 / mu - 1.0 / eta;
  }
  const double leading = 0.5 * std::erfc(-eta * std::sqrt(0.5 * a));
  const double correction =
      std::exp(-a * half_eta2) / std::sqrt(2.0 * std::numbers::pi * a) * c0;
  return leading - correction;
}

double gamma_pdf_unit(double a, double x) {
  if (x <= 0.0) return 0.0;
  return std::exp((a - 1.0) * std::log(x) - x - log_gamma(a));
}

double standard_gamma(Rng& rng, double shape) {
  if (shape < 1.0) {
    // Boost to shape + 1, then scale by U^(1/shape).
    const double g = standard_gamma(rng, shape + 1.0);
    return g * std::pow(rng.uniform(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || std::isnan(v)) {
    throw DomainError(std::string(what) + " must be positive, got " + std::to_string(v));
  }
}

}  // namespace

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(mix64(seed)) {}

Rng Rng::child(std::initializer_list<std::uint64_t> tags) const {
  std::uint64_t s = mix64(seed_ ^ 0x5851f42d4c957f2dULL);
  for (const auto tag : tags) s = mix64(s ^ mix64(tag));
  return Rng(s);
}

double Rng::uniform() {
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
  for (;;) {
    const double u = 2.0 * uniform() - 1.0;
    const double v = 2.0 * uniform() - 1.0;
    const double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
  }
}

std::size_t Rng::uniform_index(std::size_t n) {
  if (n == 0) throw DomainError("uniform_index over an empty range");
  const std::uint64_t range = n;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t r;
  do {
    r = engine_();
  } while (r >= limit);
  return static_cast<std::size_t>(r % range);
}

double log_gamma(double x) {
  if (!(x > 0.0)) throw DomainError("log_gamma requires x > 0, got " + std::to_string(x));
  if (std::isinf(x)) return kInf;
  if (x >= 7.0) return stirling_log_gamma(x);
  double product = 1.0;
  while (x < 7.0) {
    product *= x;
    x += 1.0;
  }
  return stirling_log_gamma(x) - std::log(product);
}

double digamma(double x) {
  if (!(x > 0.0)) throw DomainError("digamma requires x > 0, got " + std::to_string(x));
  double shift = 0.0;
  while (x < 6.0) {
    shift -= 1.0 / x;
    x += 1.0;
  }
  const double inv2 = 1.0 / (x * x);
  const double series =
      inv2 * (1.0 / 12.0 -
              inv2 * (1.0 / 120.0 -
                      inv2 * (1.0 / 252.0 -
                              inv2 * (1.0 / 240.0 -
                                      inv2 * (1.0 / 132.0 -
                                              inv2 * (691.0 / 32760.0 -
                                                      inv2 * (1.0 / 12.0 -
                                                              inv2 * (3617.0 / 8160.0 -
                                                                      inv2 * 43867.0 / 14364.0))))))));
  return shift + std::log(x) - 0.5 / x - series;
}

double reg_lower_incomplete_gamma(double a, double x) {
  require_positive(a, "incomplete gamma shape");
  if (!(x >= 0.0)) throw DomainError("incomplete gamma requires x >= 0");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (a >= kTemmeShape) return std::clamp(temme_lower(a, x), 0.0, 1.0);
  if (x < a + 1.0) return std::min(1.0, lower_series(a, x));
  return std::clamp(1.0 - upper_fraction(a, x), 0.0, 1.0);
}

double gamma_cdf(double x, double shape, double rate) {
  require_positive(rate, "gamma rate");
  if (x <= 0.0) return 0.0;
  return reg_lower_incomplete_gamma(shape, rate * x);
}

double gamma_quantile(double nu, double shape, double rate) {
  if (!(nu > 0.0 && nu < 1.0)) {
    throw DomainError("gamma_quantile requires 0 < nu < 1, got " + std::to_string(nu));
  }
  require_positive(shape, "gamma shape");
  require_positive(rate, "gamma rate");

  // Bracket on the unit-rate scale, then safeguarded Newton.
  double lo = 0.0;
  double hi = std::max(1.0, shape);
  while (reg_lower_incomplete_gamma(shape, hi) < nu) {
    lo = hi;
    hi *= 2.0;
  }
  double y = std::clamp(shape, lo, hi);
  if (y <= lo || y >= hi) y = 0.5 * (lo + hi);
  for (int iter = 0; iter < 400; ++iter) {
    const double p = reg_lower_incomplete_gamma(shape, y);
    const double residual = p - nu;
    if (std::abs(residual) < 1e-14) break;
    if (residual < 0.0) {
      lo = y;
    } else {
      hi = y;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
    const double pdf = gamma_pdf_unit(shape, y);
    double next = pdf > 0.0 ? y - residual / pdf : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    y = next;
  }
  return y / rate;
}

double sample_gamma(Rng& rng, double shape, double rate) {
  require_positive(shape, "gamma shape");
  require_positive(rate, "gamma rate");
  return standard_gamma(rng, shape) / rate;
}

double exponential_from_uniform(double u, double rate) {
  return -std::log(u) / rate;
}

double sample_exponential(Rng& rng, double rate) {
  require_positive(rate, "exponential rate");
  return exponential_from_uniform(rng.uniform(), rate);
}

// ---------------------------------------------------------------------------
// Transformed density rejection

LogConcaveSampler::LogConcaveSampler(LogConcaveDensity density, double mode_hint)
    : density_(std::move(density)) {
  if (!(mode_hint > 0.0) || !std::isfinite(mode_hint)) {
    throw SamplerFailure("mode hint must be a positive finite value");
  }
  // Scale from the local curvature at the hint; fall back to the hint itself.
  double scale = mode_hint;
  const double step = 1e-4 * mode_hint;
  const double curvature =
      (density_.derivative(mode_hint + step) - density_.derivative(mode_hint - step)) /
      (2.0 * step);
  if (std::isfinite(curvature) && curvature < 0.0) {
    scale = std::min(mode_hint, 1.0 / std::sqrt(-curvature));
  }
  double left = mode_hint - scale;
  if (!(left > 0.0)) left = 0.5 * mode_hint;
  insert(left);
  insert(mode_hint);
  insert(mode_hint + scale);
  if (points_.size() < 3) throw SamplerFailure("could not evaluate initial tangent points");

  // The right tail needs a strictly decreasing tangent to be integrable.
  for (int i = 0; i < 64 && !(points_.back().slope < 0.0); ++i) {
    const double x = points_.back().x + 2.0 * (points_.back().x - points_.front().x) + scale;
    if (!insert(x)) break;
  }
  if (!(points_.back().slope < 0.0)) {
    throw SamplerFailure("no finite envelope: log-density does not decrease on the right");
  }
  rebuild();
}

LogConcaveSampler::Point LogConcaveSampler::evaluate(double x) const {
  return Point{x, density_.log_density(x), density_.derivative(x)};
}

bool LogConcaveSampler::insert(double x) {
  if (points_.size() >= max_points || !(x > 0.0) || !std::isfinite(x)) return false;
  const Point p = evaluate(x);
  if (!std::isfinite(p.h) || !std::isfinite(p.slope)) return false;
  const auto pos = std::lower_bound(points_.begin(), points_.end(), x,
                                    [](const Point& q, double v) { return q.x < v; });
  if (pos != points_.end() && pos->x == x) return false;
  points_.insert(pos, p);
  return true;
}

void LogConcaveSampler::rebuild() {
  const std::size_t k = points_.size();
  std::vector<double> bounds(k + 1);
  bounds[0] = 0.0;
  bounds[k] = kInf;
  for (std::size_t i = 0; i + 1 < k; ++i) {
    const Point& a = points_[i];
    const Point& b = points_[i + 1];
    const double ds = a.slope - b.slope;
    double z;
    if (ds < -1e-12 * (std::abs(a.slope) + std::abs(b.slope) + 1.0)) {
      throw SamplerFailure("tangent slopes increase: density is not log-concave here");
    }
    if (std::abs(ds) <= 1e-12 * (std::abs(a.slope) + std::abs(b.slope))) {
      z = 0.5 * (a.x + b.x);
    } else {
      z = (b.h - a.h - b.x * b.slope + a.x * a.slope) / ds;
      z = std::clamp(z, a.x, b.x);
    }
    bounds[i + 1] = z;
  }

  pieces_.clear();
  double max_log = -kInf;
  for (std::size_t i = 0; i < k; ++i) {
    Piece piece{bounds[i], bounds[i + 1], i, -kInf};
    const Point& p = points_[i];
    const double s = p.slope;
    const double len = piece.hi - piece.lo;
    if (len > 0.0) {
      const double at_lo = p.h + s * (piece.lo - p.x);
      if (std::isinf(len)) {
        piece.log_mass = at_lo - std::log(-s);
      } else if (std::abs(s * len) < 1e-12) {
        piece.log_mass = at_lo + std::log(len);
      } else if (s < 0.0) {
        piece.log_mass = at_lo + std::log(-std::expm1(s * len) / -s);
      } else {
        const double at_hi = p.h + s * (piece.hi - p.x);
        piece.log_mass = at_hi + std::log(-std::expm1(-s * len) / s);
      }
    }
    if (std::isnan(piece.log_mass) || piece.log_mass == kInf) {
      throw SamplerFailure("envelope piece has non-finite mass");
    }
    max_log = std::max(max_log, piece.log_mass);
    pieces_.push_back(piece);
  }
  if (!std::isfinite(max_log)) throw SamplerFailure("envelope has zero mass");

  cumulative_.assign(k, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    total += std::exp(pieces_[i].log_mass - max_log);
    cumulative_[i] = total;
  }
  for (auto& c : cumulative_) c /= total;
}

double LogConcaveSampler::envelope_at(const Piece& piece, double x) const {
  const Point& p = points_[piece.point];
  return p.h + p.slope * (x - p.x);
}

double LogConcaveSampler::draw(Rng& rng) {
  std::size_t stalled = 0;
  for (;;) {
    ++proposals_;
    const double pick = rng.uniform();
    const auto idx = static_cast<std::size_t>(
        std::lower_bound(cumulative_.begin(), cumulative_.end(), pick) - cumulative_.begin());
    const Piece& piece = pieces_[std::min(idx, pieces_.size() - 1)];
    const double s = points_[piece.point].slope;
    const double len = piece.hi - piece.lo;
    const double v = rng.uniform();

    double x;
    if (std::isinf(len)) {
      x = piece.lo + std::log1p(-v) / s;
    } else if (std::abs(s * len) < 1e-12) {
      x = piece.lo + v * len;
    } else if (s < 0.0) {
      x = piece.lo + std::log1p(v * std::expm1(s * len)) / s;
    } else {
      x = piece.hi + std::log1p(v * std::expm1(-s * len)) / s;
    }
    x = std::clamp(x, piece.lo, piece.hi);

    if (x > 0.0 && std::isfinite(x)) {
      const double h = density_.log_density(x);
      const double w = rng.uniform();
      if (std::log(w) <= h - envelope_at(piece, x)) {
        ++accepted_;
        return x;
      }
    }
    if (insert(x)) {
      stalled = 0;
      rebuild();
    } else if (++stalled >= max_stalled_rejections) {
      throw SamplerFailure("64 consecutive rejections without envelope refinement");
    }
  }
}

double tdr_sample_log_concave(Rng& rng, const LogConcaveDensity& density, double mode_hint) {
  LogConcaveSampler sampler(density, mode_hint);
  return sampler.draw(rng);
}

}  // namespace evbandit::numerics
