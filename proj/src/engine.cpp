#include "gotube/engine.hpp"

#include "gotube/extremes.hpp"
#include "gotube/log.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

namespace gotube {

void GoTubeConfig::validate() const {
  if (!system) throw ConfigError("system", "no system given");
  const int n = system->dimension();
  if (center.size() != n) {
    throw ConfigError("center", "expected " + std::to_string(n) + " coordinates, got " +
                                    std::to_string(center.size()));
  }
  if (!center.allFinite()) throw ConfigError("center", "coordinates must be finite");
  if (!(radius > 0.0) || !std::isfinite(radius)) throw ConfigError("radius", "must be finite and > 0");
  if (times.size() < 2) throw ConfigError("times", "need at least one step after t0");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i])) throw ConfigError("times", "must be finite");
    if (i > 0 && !(times[i] > times[i - 1])) throw ConfigError("times", "grid must be strictly increasing");
  }
  if (!(mu > 1.0) || !std::isfinite(mu)) throw ConfigError("mu", "must be finite and > 1");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma", "must lie in (0, 1)");
  if (batch < 1) throw ConfigError("batch", "must be >= 1");
  if (max_samples != 0 && max_samples < batch) throw ConfigError("max-samples", "must be >= batch");
  if (stats_pairs < 1) throw ConfigError("stats-m", "must be >= 1");
  if (stats_reps < 20) throw ConfigError("stats-n", "must be >= 20");
  if (stats_reps_max < stats_reps) throw ConfigError("stats-n", "exceeds the doubling limit");
  if (!(tolerances.abs > 0.0) || !(tolerances.rel > 0.0)) {
    throw ConfigError("abs-tol/rel-tol", "tolerances must be > 0");
  }
  if (distance_weights.size() != 0) {
    if (distance_weights.size() != n) throw ConfigError("distance-weights", "wrong length");
    if (!(distance_weights.array() > 0.0).all() || !distance_weights.allFinite()) {
      throw ConfigError("distance-weights", "weights must be finite and > 0");
    }
  }
  if (threads < 1) throw ConfigError("threads", "must be >= 1");
}

std::vector<double> uniform_grid(double horizon, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt", "must be finite and > 0");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw ConfigError("time-horizon", "must be finite and > 0");
  }
  const double ratio = horizon / dt;
  const long long k = std::llround(ratio);
  if (k < 1 || std::abs(ratio - static_cast<double>(k)) > 1e-9 * std::max(1.0, ratio)) {
    throw ConfigError("dt", "time horizon must be an integer multiple of dt");
  }
  std::vector<double> grid(static_cast<std::size_t>(k) + 1);
  for (long long j = 0; j <= k; ++j) grid[static_cast<std::size_t>(j)] = static_cast<double>(j) * dt;
  grid.back() = horizon;
  return grid;
}

double weighted_distance(const Vector& a, const Vector& b, const Vector& weights) {
  if (weights.size() == 0) return (a - b).norm();
  return std::sqrt((weights.array() * (a - b).array().square()).sum());
}

double compute_cap_radius(double lambda, double delta_lambda, double slack) {
  if (!std::isfinite(lambda) || !std::isfinite(delta_lambda) || !std::isfinite(slack)) {
    throw ContractViolation("cap radius inputs must be finite");
  }
  if (lambda < 0.0 || delta_lambda < 0.0) {
    throw ContractViolation("stretching factor and difference quotient must be >= 0");
  }
  if (slack < 0.0) throw ContractViolation("negative slack in cap radius");
  if (slack == 0.0) return 0.0;
  if (delta_lambda == 0.0) {
    if (lambda == 0.0) return std::numeric_limits<double>::infinity();
    return slack / lambda;
  }
  // Rationalized form of (-l + sqrt(l^2 + 4 dl s)) / (2 dl); no cancellation.
  return 2.0 * slack / (lambda + std::sqrt(lambda * lambda + 4.0 * delta_lambda * slack));
}

double coverage_probability(std::span<const double> radii, int dimension, double sphere_radius) {
  double log_miss = 0.0;
  for (double r : radii) {
    if (r < 0.0) throw ContractViolation("cap radii must be >= 0");
    const double p = cap_fraction(dimension, r, sphere_radius);
    if (p >= 1.0) return 1.0;
    log_miss += std::log1p(-p);
  }
  return -std::expm1(log_miss);
}

TubeMetrics tube_metrics(const BoundingTube& tube) {
  if (tube.balls.empty()) throw ContractViolation("tube_metrics needs a non-empty tube");
  TubeMetrics m;
  const int n = static_cast<int>(tube.balls.front().center.size());
  double sum = 0.0;
  for (const auto& ball : tube.balls) {
    const double v = ball_volume(n, ball.radius);
    m.volumes.push_back(v);
    m.radii.push_back(ball.radius);
    sum += v;
    m.max_radius = std::max(m.max_radius, ball.radius);
  }
  m.average_volume = sum / static_cast<double>(tube.balls.size());
  return m;
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(std::max(1u, threads), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      const std::size_t begin = count * w / workers;
      const std::size_t end = count * (w + 1) / workers;
      try {
        for (std::size_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

namespace {

struct QuotientEstimate {
  double delta_lambda = 0.0;
  bool degenerate = false;
};

class TubeBuilder {
 public:
  explicit TubeBuilder(const GoTubeConfig& config)
      : config_(config),
        system_(*config.system),
        dim_(system_.dimension()),
        sampling_rng_(config.seed),
        stats_reps_(config.stats_reps),
        coverage_target_(std::sqrt(1.0 - config.gamma)),
        gamma_hat_(1.0 - std::sqrt(1.0 - config.gamma)) {}

  BoundingTube run(const StepObserver& observer) {
    const auto started = std::chrono::steady_clock::now();
    BoundingTube tube;
    tube.config = config_;

    const Ball initial_ball{config_.center, config_.radius};
    std::vector<Vector> pending = sample_surface(initial_ball, config_.batch, sampling_rng_);
    center_.time = config_.times.front();
    center_.state = config_.center;
    center_.sensitivity = Matrix::Identity(dim_, dim_);

    for (std::size_t j = 1; j < config_.times.size(); ++j) {
      const double t = config_.times[j];
      try {
        center_ = integrate_augmented(system_, center_, t, config_.tolerances);
        advance_samples(t);
      } catch (const IntegrationBlowupError& e) {
        throw with_step(e, j);
      }

      double coverage = 0.0;
      QuotientEstimate estimate;
      for (std::size_t iteration = 0;; ++iteration) {
        try {
          add_batch(pending, t);
        } catch (const IntegrationBlowupError& e) {
          throw with_step(e, j);
        }
        const double max_distance = refresh_distances();
        estimate = estimate_quotient(j, iteration, tube);
        coverage = assign_caps(max_distance, estimate.delta_lambda);
        log(LogLevel::debug) << "step " << j << " iteration " << iteration << ": |V|="
                             << samples_.size() << " coverage=" << coverage
                             << " dlambda=" << estimate.delta_lambda;
        pending = sample_surface(initial_ball, config_.batch, sampling_rng_);
        if (coverage >= coverage_target_) break;
        if (samples_.size() + config_.batch > config_.effective_max_samples()) {
          std::ostringstream os;
          os << "sample budget of " << config_.effective_max_samples() << " exhausted at t=" << t
             << " with coverage " << coverage << " < " << coverage_target_;
          tube.runtime_seconds = elapsed(started);
          throw BudgetExceededError(os.str(), std::move(tube), coverage, j);
        }
      }

      BoundingBall ball;
      ball.time = t;
      ball.center = center_.state;
      ball.max_distance = current_max_;
      ball.radius = config_.mu * current_max_;
      ball.samples = samples_.size();
      ball.coverage = coverage;
      ball.delta_lambda = estimate.delta_lambda;
      log(LogLevel::info) << "t=" << t << " radius=" << ball.radius << " samples=" << ball.samples
                          << " coverage=" << coverage;
      if (observer) observer(ball, samples_);
      tube.balls.push_back(std::move(ball));
    }
    tube.runtime_seconds = elapsed(started);
    return tube;
  }

 private:
  static double elapsed(std::chrono::steady_clock::time_point since) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
  }

  IntegrationBlowupError with_step(const IntegrationBlowupError& e, std::size_t j) const {
    std::ostringstream os;
    os << "timestep " << j << " (t=" << config_.times[j] << "): " << e.what();
    return IntegrationBlowupError(os.str(), e.last_time());
  }

  void advance_samples(double t) {
    parallel_for(samples_.size(), config_.threads, [&](std::size_t i) {
      samples_[i].flow = integrate_augmented(system_, samples_[i].flow, t, config_.tolerances);
    });
    stretch_valid_ = 0;
  }

  void add_batch(const std::vector<Vector>& batch, double t) {
    const std::size_t offset = samples_.size();
    samples_.resize(offset + batch.size());
    parallel_for(batch.size(), config_.threads, [&](std::size_t i) {
      SampleRecord& rec = samples_[offset + i];
      rec.initial = batch[i];
      rec.flow = integrate_augmented(system_, batch[i], config_.times.front(), t, config_.tolerances);
    });
  }

  /// Updates distances and stretching factors; returns the sample maximum.
  double refresh_distances() {
    const Vector& w = config_.distance_weights;
    const std::size_t begin = stretch_valid_;
    parallel_for(samples_.size() - begin, config_.threads, [&](std::size_t k) {
      SampleRecord& rec = samples_[begin + k];
      rec.distance = weighted_distance(rec.flow.state, center_.state, w);
      rec.stretch = w.size() == 0
                        ? spectral_norm(rec.flow.sensitivity)
                        : spectral_norm(w.cwiseSqrt().asDiagonal() * rec.flow.sensitivity);
    });
    stretch_valid_ = samples_.size();
    current_max_ = 0.0;
    for (const auto& rec : samples_) current_max_ = std::max(current_max_, rec.distance);
    return current_max_;
  }

  QuotientEstimate estimate_quotient(std::size_t step, std::size_t iteration,
                                     const BoundingTube& tube) {
    positions_.clear();
    lambdas_.clear();
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& rec : samples_) {
      positions_.push_back(rec.initial);
      lambdas_.push_back(rec.stretch);
      lo = std::min(lo, rec.stretch);
      hi = std::max(hi, rec.stretch);
    }
    std::seed_seq seq{static_cast<std::uint32_t>(config_.seed),
                      static_cast<std::uint32_t>(config_.seed >> 32), 0x51a7u,
                      static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(iteration)};
    Rng rng(seq);

    // Differences below the solver's resolution carry no information about
    // the stretching landscape; use the observed maximum directly.
    const double floor = 100.0 * (config_.tolerances.abs + config_.tolerances.rel * hi);
    if (hi - lo <= floor) {
      const auto maxima =
          sample_max_quotients(positions_, lambdas_, config_.stats_pairs, stats_reps_, rng);
      return {*std::max_element(maxima.begin(), maxima.end()), true};
    }

    const double q = coverage_target_;
    // No lower bound can certify q while q + epsilon >= 1, so skip the
    // doublings that are bound to fail.
    while (q + dkw_epsilon(stats_reps_, gamma_hat_) >= 1.0 &&
           stats_reps_ * 2 <= config_.stats_reps_max) {
      stats_reps_ *= 2;
    }
    for (;;) {
      const auto maxima =
          sample_max_quotients(positions_, lambdas_, config_.stats_pairs, stats_reps_, rng);
      std::optional<double> quantile;
      try {
        quantile = certify_quantile(maxima, gamma_hat_, q).quantile;
      } catch (const DegenerateSampleError&) {
        return {*std::max_element(maxima.begin(), maxima.end()), true};
      }
      if (quantile) return {std::max(0.0, *quantile), false};
      if (stats_reps_ * 2 > config_.stats_reps_max) {
        std::ostringstream os;
        os << "difference-quotient statistics cannot certify the " << q << "-quantile with "
           << stats_reps_ << " maxima at t=" << config_.times[step];
        BoundingTube partial = tube;
        throw BudgetExceededError(os.str(), std::move(partial), 0.0, step);
      }
      stats_reps_ *= 2;
      log(LogLevel::debug) << "quantile unbounded, raising statistics samples to " << stats_reps_;
    }
  }

  double assign_caps(double max_distance, double delta_lambda) {
    radii_.resize(samples_.size());
    const double bound = config_.mu * max_distance;
    for (std::size_t i = 0; i < samples_.size(); ++i) {
      SampleRecord& rec = samples_[i];
      rec.cap_radius = compute_cap_radius(rec.stretch, delta_lambda, bound - rec.distance);
      radii_[i] = rec.cap_radius;
    }
    if (dim_ == 1) {
      // The 0-sphere is two points; coverage is the fraction of them capped.
      return radii_.empty() ? 0.0 : one_dimensional_coverage();
    }
    return coverage_probability(radii_, dim_, config_.radius);
  }

  double one_dimensional_coverage() const {
    double log_miss = 0.0;
    for (double r : radii_) {
      const double p = r >= 2.0 * config_.radius ? 1.0 : (r > 0.0 ? 0.5 : 0.0);
      if (p >= 1.0) return 1.0;
      log_miss += std::log1p(-p);
    }
    return -std::expm1(log_miss);
  }

  const GoTubeConfig& config_;
  const SystemSpec& system_;
  const int dim_;
  Rng sampling_rng_;
  std::size_t stats_reps_;
  const double coverage_target_;
  const double gamma_hat_;

  AugmentedState center_;
  std::vector<SampleRecord> samples_;
  std::size_t stretch_valid_ = 0;
  double current_max_ = 0.0;
  std::vector<Vector> positions_;
  std::vector<double> lambdas_;
  std::vector<double> radii_;
};

}  // namespace

BoundingTube run_gotube(const GoTubeConfig& config, const StepObserver& observer) {
  config.validate();
  TubeBuilder builder(config);
  return builder.run(observer);
}

}  // namespace gotube
