#pragma once

#include "gotube/engine.hpp"

#include <vector>

namespace gotube {

/// Brute-force maximal distance per timestep from `count` surface samples.
struct ReachEstimate {
  std::vector<double> max_distance;
  std::size_t trajectories = 0;
  std::size_t excluded = 0;
};

/// Integrates `count` uniform surface samples of `ball` (state only) and
/// records max_x |chi(t_j, x) - chi(t_j, center)| for each t_j after the
/// first grid entry, integrating at 10x tighter than `tolerances`.
/// Blown-up trajectories are excluded and counted.
ReachEstimate mc_reach(const SystemSpec& system, const Ball& ball, std::span<const double> times,
                       std::size_t count, Rng& rng, const Tolerances& tolerances = {},
                       unsigned threads = 1);

/// Same, over caller-supplied initial points.
ReachEstimate mc_reach_points(const SystemSpec& system, const Vector& center,
                              std::span<const Vector> points, std::span<const double> times,
                              const Tolerances& tolerances = {}, unsigned threads = 1);

/// Central-difference estimate of d chi(t, x) / dx, one column per axis.
/// The default tolerances are tight enough for steps around 1e-5.
Matrix fd_sensitivity(const SystemSpec& system, const Vector& x, double t, double step,
                      const Tolerances& tolerances = {1e-14, 1e-13});

struct StepContainment {
  double time = 0.0;
  std::size_t trajectories = 0;
  std::size_t violations = 0;
  double violation_rate = 0.0;
  /// max d_j / delta_j over audited trajectories.
  double worst_ratio = 0.0;
};

struct ContainmentReport {
  std::vector<StepContainment> steps;
  std::size_t requested = 0;
  std::size_t trajectories = 0;
  std::size_t excluded = 0;
  double max_violation_rate = 0.0;
};

/// Counts, per ball, trajectories from `points` that leave the ball.
/// Uses `tolerances` as given; callers wanting an independent check pass
/// tightened tolerances.
ContainmentReport audit_points(const BoundingTube& tube, std::span<const Vector> points,
                               const Tolerances& tolerances, unsigned threads = 1);

/// Audits `tube` against `count` fresh surface trajectories drawn from
/// `rng`, integrated at 10x tighter tolerances than the tube's.
ContainmentReport audit_tube(const BoundingTube& tube, std::size_t count, Rng& rng,
                             unsigned threads = 1);

}  // namespace gotube
