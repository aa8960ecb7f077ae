#pragma once

#include "gotube/dynamics.hpp"
#include "gotube/errors.hpp"
#include "gotube/geometry.hpp"
#include "gotube/integrator.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace gotube {

/// Inputs of one tube construction.
struct GoTubeConfig {
  SystemPtr system;
  Vector center;
  double radius = 0.0;
  /// t_0 < t_1 < ... < t_k; one ball is emitted per entry after the first.
  std::vector<double> times;
  double mu = 1.1;
  double gamma = 0.05;
  std::size_t batch = 100;
  /// Upper bound on |V|; 0 means 200 * batch.
  std::size_t max_samples = 0;
  std::uint64_t seed = 0;
  Tolerances tolerances;
  /// Pairs per difference-quotient maximum.
  std::size_t stats_pairs = 20;
  /// Initial number of maxima fed to the extreme-value fit; doubled while
  /// the requested quantile cannot be certified.
  std::size_t stats_reps = 100;
  std::size_t stats_reps_max = std::size_t{1} << 17;
  /// Optional diagonal weights for the distance; empty means Euclidean.
  Vector distance_weights;
  unsigned threads = 1;

  std::size_t effective_max_samples() const { return max_samples ? max_samples : 200 * batch; }
  /// Throws ConfigError on the first invalid field.
  void validate() const;
};

/// Evenly spaced grid 0, dt, ..., horizon. Throws ConfigError unless
/// horizon / dt is (numerically) an integer.
std::vector<double> uniform_grid(double horizon, double dt);

/// One propagated surface sample.
struct SampleRecord {
  Vector initial;
  AugmentedState flow;
  double stretch = 0.0;
  double distance = 0.0;
  double cap_radius = 0.0;
};

struct BoundingBall {
  double time = 0.0;
  Vector center;
  double radius = 0.0;
  /// Largest sampled distance; radius == mu * max_distance.
  double max_distance = 0.0;
  std::size_t samples = 0;
  double coverage = 0.0;
  double delta_lambda = 0.0;
};

struct BoundingTube {
  std::vector<BoundingBall> balls;
  GoTubeConfig config;
  double runtime_seconds = 0.0;
};

/// The sample budget ran out before the coverage target was met. `partial()`
/// holds every ball emitted before the failing timestep.
class BudgetExceededError : public Error {
 public:
  BudgetExceededError(const std::string& what, BoundingTube partial, double coverage,
                      std::size_t step)
      : Error(what), partial_(std::move(partial)), coverage_(coverage), step_(step) {}
  const BoundingTube& partial() const noexcept { return partial_; }
  double achieved_coverage() const noexcept { return coverage_; }
  std::size_t step() const noexcept { return step_; }

 private:
  BoundingTube partial_;
  double coverage_;
  std::size_t step_;
};

/// Positive root of delta_lambda r^2 + lambda r = slack. Returns +inf when
/// both coefficients vanish. Throws ContractViolation on negative slack.
double compute_cap_radius(double lambda, double delta_lambda, double slack);

/// 1 - prod (1 - cap_fraction(r_x)), evaluated in log space.
double coverage_probability(std::span<const double> radii, int dimension, double sphere_radius);

/// Called once per emitted ball with the full sample set at that time.
using StepObserver = std::function<void(const BoundingBall&, std::span<const SampleRecord>)>;

/// Builds a bounding tube whose radii exceed the true maximal perturbation
/// with probability at least 1 - gamma at every timestep.
BoundingTube run_gotube(const GoTubeConfig& config, const StepObserver& observer = {});

struct TubeMetrics {
  std::vector<double> volumes;
  std::vector<double> radii;
  double average_volume = 0.0;
  double max_radius = 0.0;
};

TubeMetrics tube_metrics(const BoundingTube& tube);

/// Distance under the configured norm (Euclidean when `weights` is empty).
double weighted_distance(const Vector& a, const Vector& b, const Vector& weights);

/// Runs fn(i) for i in [0, count) on up to `threads` workers. Each index is
/// processed exactly once; the first exception is rethrown.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace gotube
