#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <random>
#include <vector>

namespace evbandit::numerics {

/// Seedable 64-bit generator. Child streams are derived by hashing the
/// parent seed with caller-supplied tags, so a (run seed, station, purpose)
/// triple always yields the same stream regardless of draw order elsewhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const noexcept { return seed_; }

  Rng child(std::initializer_list<std::uint64_t> tags) const;

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1), 53 bits of resolution.
  double uniform();

  /// Standard normal (Marsaglia polar method, spare discarded).
  double normal();

  /// Uniform integer in [0, n). n must be positive.
  std::size_t uniform_index(std::size_t n);

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

/// splitmix64 finalizer; exposed for stream derivation and hashing tags.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// ln Γ(x) for x > 0.
double log_gamma(double x);

/// ψ(x) = d/dx ln Γ(x) for x > 0.
double digamma(double x);

/// Regularized lower incomplete gamma P(a, x).
double reg_lower_incomplete_gamma(double a, double x);

/// CDF of Gamma(shape, rate) at x.
double gamma_cdf(double x, double shape, double rate);

/// Quantile of Gamma(shape, rate) at probability nu in (0, 1).
double gamma_quantile(double nu, double shape, double rate);

/// Gamma(shape, rate) draw, mean shape / rate.
double sample_gamma(Rng& rng, double shape, double rate);

/// Exponential(rate) draw by inversion.
double sample_exponential(Rng& rng, double rate);

/// Inverse-CDF transform used by sample_exponential: -ln(u) / rate.
double exponential_from_uniform(double u, double rate);

/// Unnormalized log-density on (0, inf) together with its derivative. The
/// derivative has to be exact (analytic): tangents built from it must lie
/// above the log-density for the envelope to dominate.
struct LogConcaveDensity {
  std::function<double(double)> log_density;
  std::function<double(double)> derivative;
};

/// Transformed density rejection with T = log on (0, inf).
///
/// The envelope starts from three tangent points around the mode hint and
/// is refined with every rejected proposal, so a sampler kept alive across
/// draws gets cheaper with use. Throws SamplerFailure when no finite
/// envelope can be built or after 64 consecutive rejections that could not
/// refine the envelope. Behaviour on densities that are not log-concave is
/// unspecified.
class LogConcaveSampler {
 public:
  static constexpr std::size_t max_points = 64;
  static constexpr std::size_t max_stalled_rejections = 64;

  LogConcaveSampler(LogConcaveDensity density, double mode_hint);

  double draw(Rng& rng);

  std::size_t proposals() const noexcept { return proposals_; }
  std::size_t accepted() const noexcept { return accepted_; }
  std::size_t envelope_points() const noexcept { return points_.size(); }

 private:
  struct Point {
    double x;
    double h;
    double slope;
  };
  struct Piece {
    double lo;
    double hi;
    std::size_t point;
    double log_mass;
  };

  Point evaluate(double x) const;
  bool insert(double x);
  void rebuild();
  double envelope_at(const Piece& piece, double x) const;

  LogConcaveDensity density_;
  std::vector<Point> points_;
  std::vector<Piece> pieces_;
  std::vector<double> cumulative_;
  std::size_t proposals_ = 0;
  std::size_t accepted_ = 0;
};

/// One exact draw from the normalized density (fresh envelope per call).
double tdr_sample_log_concave(Rng& rng, const LogConcaveDensity& density,
                              double mode_hint);

}  // namespace evbandit::numerics
