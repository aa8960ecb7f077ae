#include "gotube/extremes.hpp"

#include "gotube/errors.hpp"

#include <algorithm>
#include <cmath>

namespace gotube {

EmpiricalCdf::EmpiricalCdf(std::vector<double> samples) : sorted_(std::move(samples)) {
  if (sorted_.empty()) throw InsufficientSamplesError("empirical CDF needs at least one sample");
  std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalCdf::operator()(double x) const {
  const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
  return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

double EmpiricalCdf::left_limit(double x) const {
  const auto it = std::lower_bound(sorted_.begin(), sorted_.end(), x);
  return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

double ks_minus(const GevParams& gev, const EmpiricalCdf& ecdf) {
  const auto xs = ecdf.sorted();
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    d = std::max(d, gev.cdf(xs[i]) - static_cast<double>(i) / n);
  }
  return d;
}

double dkw_epsilon(std::size_t n, double gamma) {
  if (n < 1) throw ContractViolation("dkw_epsilon needs n >= 1");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ContractViolation("dkw_epsilon needs gamma in (0, 1)");
  const double alpha = std::min(gamma, 0.5);
  return std::sqrt(std::log(1.0 / alpha) / (2.0 * static_cast<double>(n)));
}

double StochasticLowerBound::cdf(double x) const {
  return std::clamp(gev.cdf(x) - epsilon - ks_minus, 0.0, 1.0);
}

StochasticLowerBound build_lower_bound(std::span<const double> samples, double gamma) {
  StochasticLowerBound bound;
  bound.gev = fit_gev(samples);
  bound.epsilon = dkw_epsilon(samples.size(), gamma);
  bound.ks_minus = ks_minus(bound.gev, EmpiricalCdf({samples.begin(), samples.end()}));
  bound.gamma = gamma;
  return bound;
}

std::optional<double> lower_bound_quantile(const StochasticLowerBound& bound, double q) {
  if (!(q > 0.0 && q < 1.0)) throw ContractViolation("quantile level must lie in (0, 1)");
  const double target = q + bound.epsilon + bound.ks_minus;
  if (target >= 1.0) return std::nullopt;
  return bound.gev.quantile(target);
}

QuantileCertificate certify_quantile(std::span<const double> samples, double gamma, double q) {
  const EmpiricalCdf ecdf({samples.begin(), samples.end()});
  auto make = [&](const GevParams& g) {
    QuantileCertificate c;
    c.bound.gev = g;
    c.bound.epsilon = dkw_epsilon(samples.size(), gamma);
    c.bound.ks_minus = ks_minus(g, ecdf);
    c.bound.gamma = gamma;
    c.quantile = lower_bound_quantile(c.bound, q);
    return c;
  };
  QuantileCertificate best = make(fit_gev(samples));
  QuantileCertificate tuned = make(fit_gev_for_quantile(samples, best.bound.epsilon, q));
  if (tuned.quantile && (!best.quantile || *tuned.quantile < *best.quantile)) best = tuned;
  return best;
}

std::vector<double> sample_max_quotients(std::span<const Vector> positions,
                                         std::span<const double> lambdas, std::size_t pairs,
                                         std::size_t repetitions, Rng& rng) {
  if (positions.size() != lambdas.size()) {
    throw ContractViolation("positions and stretching factors differ in length");
  }
  if (pairs < 1 || repetitions < 1) throw ContractViolation("pairs and repetitions must be >= 1");
  for (double l : lambdas) {
    if (!std::isfinite(l)) throw ContractViolation("stretching factors must be finite");
  }
  const bool distinct = positions.size() >= 2 &&
                        std::any_of(positions.begin() + 1, positions.end(),
                                    [&](const Vector& p) { return p != positions.front(); });
  if (!distinct) throw InsufficientSamplesError("need at least two distinct positions");

  std::uniform_int_distribution<std::size_t> pick(0, positions.size() - 1);
  std::vector<double> maxima;
  maxima.reserve(repetitions);
  for (std::size_t r = 0; r < repetitions; ++r) {
    double best = 0.0;
    for (std::size_t i = 0; i < pairs; ++i) {
      std::size_t a = 0, b = 0;
      double dist = 0.0;
      do {
        a = pick(rng);
        b = pick(rng);
        if (a == b) continue;
        dist = (positions[a] - positions[b]).norm();
      } while (a == b || !(dist > 0.0));
      best = std::max(best, std::abs(lambdas[a] - lambdas[b]) / dist);
    }
    maxima.push_back(best);
  }
  return maxima;
}

}  // namespace gotube
