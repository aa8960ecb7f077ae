#pragma once

#include "gotube/dynamics.hpp"
#include "gotube/geometry.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace gotube {

/// Right-continuous empirical distribution function of a finite sample.
class EmpiricalCdf {
 public:
  explicit EmpiricalCdf(std::vector<double> samples);

  /// (1/n) #{x_i <= x}
  double operator()(double x) const;
  /// (1/n) #{x_i < x}
  double left_limit(double x) const;

  std::span<const double> sorted() const noexcept { return sorted_; }
  std::size_t size() const noexcept { return sorted_.size(); }

 private:
  std::vector<double> sorted_;
};

/// Generalized extreme value distribution with CDF
/// exp(-(1 + shape (x - location) / scale)^(-1/shape)); shape 0 is Gumbel.
struct GevParams {
  double location = 0.0;
  double scale = 1.0;
  double shape = 0.0;

  double cdf(double x) const;
  /// Inverse CDF for p in (0, 1).
  double quantile(double p) const;
  double log_pdf(double x) const;
};

/// Maximum-likelihood GEV fit on at least 20 samples. Starts from
/// probability-weighted moments, refines with BFGS, keeps shape in
/// [-0.9, 0.9]. Throws DegenerateSampleError on zero variance.
GevParams fit_gev(std::span<const double> samples);

/// Minimum-distance GEV fit: minimizes sup |G - F_n| with shape in
/// [-4, 0.9], starting from the likelihood fit. Bounded-support samples
/// (shape well below -1) are where this beats `fit_gev`.
GevParams fit_gev_ecdf(std::span<const double> samples);

/// GEV member (shape in [-4, 0.9]) whose lower bound G - epsilon - D^-(G)
/// certifies the smallest q-quantile. The lower-bound guarantee holds for
/// any G, so this only trades fit quality for a tighter quantile.
GevParams fit_gev_for_quantile(std::span<const double> samples, double epsilon, double q);

/// One-sided KS statistic sup_x (G(x) - F_n(x)), floored at zero.
double ks_minus(const GevParams& gev, const EmpiricalCdf& ecdf);

/// DKW/Massart deviation sqrt(ln(1/alpha) / (2n)) with alpha = min(gamma, 1/2).
double dkw_epsilon(std::size_t n, double gamma);

/// F_L(x) = G(x) - epsilon - ks_minus, clamped to [0, 1]. With probability at
/// least 1 - gamma it lies below the true CDF of the sampled statistic.
struct StochasticLowerBound {
  GevParams gev;
  double epsilon = 0.0;
  double ks_minus = 0.0;
  double gamma = 0.05;

  double cdf(double x) const;
};

/// Fits a GEV to `samples` and assembles the lower bound at level `gamma`.
StochasticLowerBound build_lower_bound(std::span<const double> samples, double gamma);

/// Solves F_L(x) = q. Returns std::nullopt ("unbounded") when
/// q + epsilon + ks_minus >= 1, i.e. the bound cannot certify that quantile.
std::optional<double> lower_bound_quantile(const StochasticLowerBound& bound, double q);

/// Lower bound at level `gamma` and its certified q-quantile, taking the
/// smaller of the likelihood fit and the quantile-optimized fit.
struct QuantileCertificate {
  StochasticLowerBound bound;
  std::optional<double> quantile;
};
QuantileCertificate certify_quantile(std::span<const double> samples, double gamma, double q);

/// Repeats `repetitions` times: draw `pairs` index pairs (a != b) uniformly
/// with replacement and record max |lambda_a - lambda_b| / |p_a - p_b|.
/// Pairs whose positions coincide are redrawn.
std::vector<double> sample_max_quotients(std::span<const Vector> positions,
                                         std::span<const double> lambdas, std::size_t pairs,
                                         std::size_t repetitions, Rng& rng);

}  // namespace gotube
