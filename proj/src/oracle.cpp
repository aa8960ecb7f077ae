#include "gotube/oracle.hpp"

#include "gotube/log.hpp"

#include <algorithm>
#include <optional>

namespace gotube {

namespace {

/// Distances to the reference trajectory at every grid time after the first,
/// or nullopt if the trajectory blew up.
std::optional<std::vector<double>> trajectory_distances(const SystemSpec& system,
                                                        const Vector& start,
                                                        std::span<const double> times,
                                                        std::span<const Vector> reference,
                                                        const Vector& weights,
                                                        const Tolerances& tolerances) {
  std::vector<double> out;
  out.reserve(times.size() - 1);
  Vector state = start;
  try {
    for (std::size_t j = 1; j < times.size(); ++j) {
      state = integrate_state(system, state, times[j - 1], times[j], tolerances);
      out.push_back(weighted_distance(state, reference[j - 1], weights));
    }
  } catch (const IntegrationBlowupError& e) {
    log(LogLevel::warn) << "excluding trajectory: " << e.what();
    return std::nullopt;
  }
  return out;
}

}  // namespace

ReachEstimate mc_reach_points(const SystemSpec& system, const Vector& center,
                              std::span<const Vector> points, std::span<const double> times,
                              const Tolerances& tolerances, unsigned threads) {
  if (times.size() < 2) throw ContractViolation("mc_reach needs at least two grid times");
  const Tolerances tight = tolerances.tightened(10.0);
  std::vector<Vector> reference;
  Vector c = center;
  for (std::size_t j = 1; j < times.size(); ++j) {
    c = integrate_state(system, c, times[j - 1], times[j], tight);
    reference.push_back(c);
  }
  std::vector<std::optional<std::vector<double>>> rows(points.size());
  parallel_for(points.size(), threads, [&](std::size_t i) {
    rows[i] = trajectory_distances(system, points[i], times, reference, Vector(), tight);
  });
  ReachEstimate est;
  est.max_distance.assign(times.size() - 1, 0.0);
  for (const auto& row : rows) {
    if (!row) {
      ++est.excluded;
      continue;
    }
    ++est.trajectories;
    for (std::size_t j = 0; j < row->size(); ++j) {
      est.max_distance[j] = std::max(est.max_distance[j], (*row)[j]);
    }
  }
  return est;
}

ReachEstimate mc_reach(const SystemSpec& system, const Ball& ball, std::span<const double> times,
                       std::size_t count, Rng& rng, const Tolerances& tolerances,
                       unsigned threads) {
  if (count < 1) throw ContractViolation("mc_reach needs count >= 1");
  const auto points = sample_surface(ball, count, rng);
  return mc_reach_points(system, ball.center, points, times, tolerances, threads);
}

Matrix fd_sensitivity(const SystemSpec& system, const Vector& x, double t, double step,
                      const Tolerances& tolerances) {
  if (!(step > 0.0)) throw ContractViolation("finite-difference step must be > 0");
  const int n = system.dimension();
  Matrix out(n, n);
  for (int i = 0; i < n; ++i) {
    Vector plus = x, minus = x;
    plus[i] += step;
    minus[i] -= step;
    const Vector fp = integrate_state(system, plus, 0.0, t, tolerances);
    const Vector fm = integrate_state(system, minus, 0.0, t, tolerances);
    out.col(i) = (fp - fm) / (2.0 * step);
  }
  return out;
}

ContainmentReport audit_points(const BoundingTube& tube, std::span<const Vector> points,
                               const Tolerances& tolerances, unsigned threads) {
  const auto& times = tube.config.times;
  if (tube.balls.size() + 1 > times.size()) throw ContractViolation("tube has more balls than grid steps");
  if (!tube.config.system) throw ContractViolation("tube has no system");
  const std::span<const double> grid(times.data(), tube.balls.size() + 1);
  std::vector<Vector> centers;
  for (const auto& ball : tube.balls) centers.push_back(ball.center);

  std::vector<std::optional<std::vector<double>>> rows(points.size());
  parallel_for(points.size(), threads, [&](std::size_t i) {
    rows[i] = trajectory_distances(*tube.config.system, points[i], grid, centers,
                                   tube.config.distance_weights, tolerances);
  });

  ContainmentReport report;
  report.requested = points.size();
  report.steps.resize(tube.balls.size());
  for (std::size_t j = 0; j < tube.balls.size(); ++j) report.steps[j].time = tube.balls[j].time;
  for (const auto& row : rows) {
    if (!row) {
      ++report.excluded;
      continue;
    }
    ++report.trajectories;
    for (std::size_t j = 0; j < row->size(); ++j) {
      auto& step = report.steps[j];
      const double radius = tube.balls[j].radius;
      ++step.trajectories;
      if ((*row)[j] > radius) ++step.violations;
      step.worst_ratio = std::max(step.worst_ratio, (*row)[j] / radius);
    }
  }
  for (auto& step : report.steps) {
    step.violation_rate = step.trajectories
                              ? static_cast<double>(step.violations) / static_cast<double>(step.trajectories)
                              : 0.0;
    report.max_violation_rate = std::max(report.max_violation_rate, step.violation_rate);
  }
  return report;
}

ContainmentReport audit_tube(const BoundingTube& tube, std::size_t count, Rng& rng,
                             unsigned threads) {
  if (count < 1) throw ContractViolation("audit needs count >= 1");
  const auto points = sample_surface({tube.config.center, tube.config.radius}, count, rng);
  return audit_points(tube, points, tube.config.tolerances.tightened(10.0), threads);
}

}  // namespace gotube
